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

#include "quanv/quanvolution.hpp"

#include <algorithm>
#include <filesystem>
#include <string>

#include "quanv/cache.hpp"
#include "quanv/error.hpp"
#include "quanv/parallel.hpp"

namespace quanv {

namespace fs = std::filesystem;

void QuanvConfig::validate() const {
    if (step < 1 || patch_side < 1 || depth_q < 1) {
        throw ArgumentError("step, patch_side and depth_q must be >= 1");
    }
    if (step < patch_side) {
        throw ArgumentError("overlapping patches (step < patch_side) are unsupported");
    }
    if (patch_side * patch_side != circuit.n_qubits) {
        throw ArgumentError("patch_side^2 must equal the circuit qubit count");
    }
    circuit.validate();
}

std::vector<double> extract_patch(const ImageTensor& image, int row, int col, int side) {
    if (side < 1) {
        throw ArgumentError("patch side must be >= 1");
    }
    if (row < 0 || col < 0 || row + side > image.height || col + side > image.width) {
        throw SizeError("patch at (" + std::to_string(row) + ", " + std::to_string(col) +
                        ") side " + std::to_string(side) + " exceeds image bounds");
    }
    std::vector<double> patch;
    patch.reserve(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            patch.push_back(image.at(row + r, col + c));
        }
    }
    return patch;
}

namespace {

ImageTensor quanvolve_layer(const ImageTensor& image, const QuanvConfig& config) {
    if (image.height < config.patch_side || image.width < config.patch_side) {
        throw SizeError("image (" + std::to_string(image.height) + "x" +
                        std::to_string(image.width) + ") smaller than patch side " +
                        std::to_string(config.patch_side));
    }
    for (double v : image.values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw RangeError("quanvolution input value " + std::to_string(v) +
                             " outside [0, 1]");
        }
    }
    const int out_h = image.height / config.step;
    const int out_w = image.width / config.step;
    if (out_h < 1 || out_w < 1) {
        throw SizeError("step " + std::to_string(config.step) + " larger than image");
    }

    ImageTensor out(out_h, out_w);
    parallel_for(
        static_cast<std::size_t>(out_h) * out_w,
        [&](std::size_t idx) {
            const int i = static_cast<int>(idx) / out_w;
            const int j = static_cast<int>(idx) % out_w;
            const std::vector<double> patch =
                extract_patch(image, i * config.step, j * config.step, config.patch_side);
            out.values[idx] = run_quanv_circuit(patch, config.circuit);
        },
        config.threads);
    return out;
}

}  // namespace

ImageTensor quanvolve_image(const ImageTensor& image, const QuanvConfig& config) {
    config.validate();
    ImageTensor current = quanvolve_layer(image, config);
    for (int layer = 1; layer < config.depth_q; ++layer) {
        if (config.rescale_intermediate) {
            for (double& v : current.values) {
                v = (v + 1.0) / 2.0;
            }
        }
        current = quanvolve_layer(current, config);
    }
    return current;
}

std::size_t CacheManifest::computed() const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(),
        [](const CacheEntry& e) { return e.status == CacheEntry::Status::Computed; }));
}

std::size_t CacheManifest::skipped() const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(),
        [](const CacheEntry& e) { return e.status == CacheEntry::Status::Skipped; }));
}

std::size_t CacheManifest::errored() const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(),
        [](const CacheEntry& e) { return e.status == CacheEntry::Status::Errored; }));
}

namespace {

// Expected output dims after depth_q floor-halving layers; throws if any
// layer underflows, mirroring quanvolve_image's own validation.
std::pair<int, int> expected_dims(const ImageTensor& image, const QuanvConfig& config) {
    int h = image.height;
    int w = image.width;
    for (int layer = 0; layer < config.depth_q; ++layer) {
        if (h < config.patch_side || w < config.patch_side) {
            throw SizeError("image too small for quanvolution layer " + std::to_string(layer));
        }
        h /= config.step;
        w /= config.step;
        if (h < 1 || w < 1) {
            throw SizeError("image too small for quanvolution layer " + std::to_string(layer));
        }
    }
    return {h, w};
}

}  // namespace

CacheManifest quanvolve_dataset(std::span<const DatasetRecord> records,
                                const QuanvConfig& config, const std::string& cache_dir) {
    config.validate();
    fs::create_directories(cache_dir);

    CacheManifest manifest;
    manifest.entries.resize(records.size());

    // Parallelism lives at the record level here; keep the per-image
    // patch loop serial to avoid nested pools.
    QuanvConfig inner = config;
    inner.threads = 1;

    parallel_for(
        records.size(),
        [&](std::size_t idx) {
            const DatasetRecord& record = records[idx];
            CacheEntry& entry = manifest.entries[idx];
            entry.id = record.id;
            entry.label = record.label;
            entry.path = (fs::path(cache_dir) / (record.id + ".qnv")).string();
            try {
                std::string stale_reason;
                if (fs::exists(entry.path)) {
                    const auto [eh, ew] = expected_dims(record.image, config);
                    try {
                        const CacheRecord cached = read_cache(entry.path);
                        if (cached.label == static_cast<std::uint32_t>(record.label) &&
                            cached.depth_q == static_cast<std::uint32_t>(config.depth_q) &&
                            cached.map.height == eh && cached.map.width == ew) {
                            entry.status = CacheEntry::Status::Skipped;
                            return;
                        }
                        stale_reason = "cache metadata mismatch";
                    } catch (const CorruptionError& e) {
                        stale_reason = std::string("corrupt cache (") + e.field() + ")";
                    }
                }

                CacheRecord fresh;
                fresh.map = quanvolve_image(record.image, inner);
                fresh.label = static_cast<std::uint32_t>(record.label);
                fresh.depth_q = static_cast<std::uint32_t>(config.depth_q);
                write_cache(entry.path, fresh);
                entry.status = CacheEntry::Status::Computed;
                if (!stale_reason.empty()) {
                    entry.message = stale_reason + ", recomputed";
                }
            } catch (const std::exception& e) {
                entry.status = CacheEntry::Status::Errored;
                entry.message = e.what();
            }
        },
        config.threads);

    return manifest;
}

}  // namespace quanv
