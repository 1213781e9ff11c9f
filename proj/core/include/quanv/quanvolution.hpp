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

#include <span>
#include <string>
#include <vector>

#include "quanv/circuit.hpp"
#include "quanv/dataset.hpp"
#include "quanv/imageops.hpp"

namespace quanv {

/**
 * Parameters of the quanvolution transform: non-overlapping patch_side x
 * patch_side patches taken every `step` pixels, each run through the
 * patch circuit; applied depth_q times, with in-between maps affinely
 * rescaled from [-1,1] back to [0,1] when rescale_intermediate is set.
 */
struct QuanvConfig {
    int step = 2;
    int patch_side = 2;
    int depth_q = 1;
    QuanvCircuitConfig circuit;
    bool rescale_intermediate = true;
    std::size_t threads = 0;  // patch-level workers; 0 = auto

    void validate() const;
};

/// Row-major flattening of the side x side patch at (row, col).
std::vector<double> extract_patch(const ImageTensor& image, int row, int col, int side);

/**
 * The quanvolution transform. Input values must lie in [0, 1]; each
 * output entry is the circuit readout of its patch, so the map lives in
 * [-1, 1] with dims (floor(H/step), floor(W/step)) per applied layer.
 * Patches are evaluated data-parallel; results land by index, so the map
 * is identical regardless of thread count.
 */
ImageTensor quanvolve_image(const ImageTensor& image, const QuanvConfig& config);

struct CacheEntry {
    enum class Status { Computed, Skipped, Errored };

    std::string id;
    std::string path;
    int label = 0;
    Status status = Status::Errored;
    std::string message;  // warning/error detail, empty when clean
};

struct CacheManifest {
    std::vector<CacheEntry> entries;

    std::size_t computed() const;
    std::size_t skipped() const;
    std::size_t errored() const;
};

/**
 * Quanvolves a batch of records into `cache_dir` (one QNV1 file per
 * record id), skipping any record whose cache file already exists and
 * validates against the expected shape, label, and depth. Stale or
 * corrupt cache files are recomputed and overwritten with a warning in
 * the manifest; per-record failures are collected, never fatal. Images
 * must already be normalized to [0, 1].
 */
CacheManifest quanvolve_dataset(std::span<const DatasetRecord> records,
                                const QuanvConfig& config, const std::string& cache_dir);

}  // namespace quanv
