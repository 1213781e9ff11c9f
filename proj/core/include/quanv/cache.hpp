// Copyright 2026 The quanvnet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quanv/imageops.hpp"

namespace quanv {

/**
 * One cached quanvolved feature map.
 *
 * On-disk layout (QNV1, little-endian, bit-exact):
 *   magic "QNV1" | u16 version=1 | u32 height | u32 width | u32 label |
 *   u32 depth_q | f64 x (height*width) row-major | u32 CRC32 of all
 *   preceding bytes.
 */
struct CacheRecord {
    ImageTensor map;
    std::uint32_t label = 0;
    std::uint32_t depth_q = 1;
};

inline constexpr char kCacheMagic[4] = {'Q', 'N', 'V', '1'};
inline constexpr std::uint16_t kCacheVersion = 1;

/// Serializes to bytes (no IO).
std::vector<unsigned char> encode_cache(const CacheRecord& record);

/// Parses bytes; throws CorruptionError naming the failed field
/// ("magic", "version", "truncated", "shape", "crc").
CacheRecord decode_cache(const std::vector<unsigned char>& bytes);

/// Atomic write (temp file + rename).
void write_cache(const std::string& path, const CacheRecord& record);

CacheRecord read_cache(const std::string& path);

struct NamedCacheRecord {
    std::string id;
    CacheRecord record;
};

/// Loads every *.qnv file in `dir`, sorted by filename so downstream
/// shuffles and splits are reproducible. Throws on any corrupt entry.
std::vector<NamedCacheRecord> load_cache_dir(const std::string& dir);

}  // namespace quanv
