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

#include "quanv/cache.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>

#include "quanv/bytes.hpp"
#include "quanv/crc32.hpp"
#include "quanv/error.hpp"

namespace quanv {

namespace {

constexpr std::size_t kHeaderSize = 4 + 2 + 4 * 4;  // magic, version, h/w/label/depth

}  // namespace

std::vector<unsigned char> encode_cache(const CacheRecord& record) {
    if (record.map.height <= 0 || record.map.width <= 0 ||
        record.map.size() != static_cast<std::size_t>(record.map.height) * record.map.width) {
        throw ShapeError("feature map dimensions are inconsistent");
    }
    std::vector<unsigned char> out;
    out.reserve(kHeaderSize + record.map.size() * 8 + 4);
    out.insert(out.end(), kCacheMagic, kCacheMagic + 4);
    put_u16_le(out, kCacheVersion);
    put_u32_le(out, static_cast<std::uint32_t>(record.map.height));
    put_u32_le(out, static_cast<std::uint32_t>(record.map.width));
    put_u32_le(out, record.label);
    put_u32_le(out, record.depth_q);
    for (double v : record.map.values) {
        put_f64_le(out, v);
    }
    put_u32_le(out, crc32(out.data(), out.size()));
    return out;
}

CacheRecord decode_cache(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < kHeaderSize + 4) {
        throw CorruptionError("truncated", "cache file shorter than header");
    }
    if (std::memcmp(bytes.data(), kCacheMagic, 4) != 0) {
        throw CorruptionError("magic", "bad cache magic, expected QNV1");
    }
    const std::uint16_t version = get_u16_le(bytes.data() + 4);
    if (version != kCacheVersion) {
        throw CorruptionError("version", "unsupported cache version " + std::to_string(version));
    }
    const std::uint32_t height = get_u32_le(bytes.data() + 6);
    const std::uint32_t width = get_u32_le(bytes.data() + 10);
    const std::uint32_t label = get_u32_le(bytes.data() + 14);
    const std::uint32_t depth = get_u32_le(bytes.data() + 18);
    if (height == 0 || width == 0 || height > (1u << 20) || width > (1u << 20)) {
        throw CorruptionError("shape", "implausible cache dimensions " + std::to_string(height) +
                                           "x" + std::to_string(width));
    }
    const std::size_t count = static_cast<std::size_t>(height) * width;
    const std::size_t expected = kHeaderSize + count * 8 + 4;
    if (bytes.size() != expected) {
        throw CorruptionError("truncated", "cache file has " + std::to_string(bytes.size()) +
                                               " bytes, expected " + std::to_string(expected));
    }
    const std::uint32_t stored_crc = get_u32_le(bytes.data() + bytes.size() - 4);
    const std::uint32_t actual_crc = crc32(bytes.data(), bytes.size() - 4);
    if (stored_crc != actual_crc) {
        throw CorruptionError("crc", "cache checksum mismatch");
    }

    CacheRecord record;
    record.label = label;
    record.depth_q = depth;
    record.map.height = static_cast<int>(height);
    record.map.width = static_cast<int>(width);
    record.map.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        record.map.values[i] = get_f64_le(bytes.data() + kHeaderSize + i * 8);
    }
    return record;
}

void write_cache(const std::string& path, const CacheRecord& record) {
    write_file_atomic(path, encode_cache(record));
}

CacheRecord read_cache(const std::string& path) { return decode_cache(read_file_bytes(path)); }

std::vector<NamedCacheRecord> load_cache_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw Error("cache directory not found: " + dir);
    }
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".qnv") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());

    std::vector<NamedCacheRecord> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        out.push_back({p.stem().string(), read_cache(p.string())});
    }
    return out;
}

}  // namespace quanv
