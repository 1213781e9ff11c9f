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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quanv/imageops.hpp"
#include "quanv/split.hpp"

namespace quanv {

/// One image flowing through the pipeline. `image` holds raw intensities
/// straight off disk (pre-normalization); `label` is the dataset's integer
/// class code.
struct DatasetRecord {
    std::string id;
    ImageTensor image;
    int label = 0;
};

/// Ordered (code -> name) mapping. The stock 3-class coding is
/// 1=meningioma, 2=glioma, 3=pituitary; the optional 4th synthetic class
/// is coded 4=other.
struct LabelMap {
    std::vector<std::pair<int, std::string>> entries;

    static LabelMap defaults(int classes = 3);

    bool contains(int code) const;
    /// Name for a code; "class<code>" if unmapped.
    std::string name_of(int code) const;
};

struct SplitSpec {
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct LoadIssue {
    std::string context;  // csv row / filename
    std::string message;
};

struct LoadResult {
    std::vector<DatasetRecord> records;
    std::vector<LoadIssue> errors;
};

/**
 * Loads a dataset directory: `labels.csv` (header `filename,label,id`,
 * UTF-8, LF) plus the referenced binary PGM images.
 *
 * A missing or unreadable labels.csv is fatal; a bad row (unknown label
 * code, missing or undecodable image) is collected in `errors` and the
 * remaining rows still load.
 */
LoadResult load_dataset_dir(const std::string& dir, const LabelMap& labels);

/**
 * Seeded synthetic corpus with one geometric pattern per class: filled
 * disc (code 1), hollow square (2), diagonal bar (3), and a cross for the
 * optional 4th class. Position/scale jitter and additive pixel noise are
 * drawn from the one seed; classes are exactly balanced. Pixel values are
 * integers in [0, 255], so a PGM round trip is lossless.
 */
std::vector<DatasetRecord> generate_synthetic(int per_class, int side, int classes,
                                              std::uint64_t seed);

/// Writes records as PGM files plus labels.csv into `dir` (created if
/// absent). Filenames are `<id>.pgm`.
void write_dataset_dir(const std::string& dir, std::span<const DatasetRecord> records);

/// Stratified seeded partition; see stratified_split_indices.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>>
split(const std::vector<DatasetRecord>& records, const SplitSpec& spec);

}  // namespace quanv
