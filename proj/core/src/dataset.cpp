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

#include "quanv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "quanv/bytes.hpp"
#include "quanv/error.hpp"
#include "quanv/pgm.hpp"
#include "quanv/rng.hpp"

namespace quanv {

namespace fs = std::filesystem;

LabelMap LabelMap::defaults(int classes) {
    if (classes != 3 && classes != 4) {
        throw ArgumentError("label map supports 3 or 4 classes");
    }
    LabelMap map;
    map.entries = {{1, "meningioma"}, {2, "glioma"}, {3, "pituitary"}};
    if (classes == 4) {
        map.entries.emplace_back(4, "other");
    }
    return map;
}

bool LabelMap::contains(int code) const {
    return std::any_of(entries.begin(), entries.end(),
                       [code](const auto& e) { return e.first == code; });
}

std::string LabelMap::name_of(int code) const {
    for (const auto& [c, name] : entries) {
        if (c == code) {
            return name;
        }
    }
    return "class" + std::to_string(code);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
    return s;
}

}  // namespace

LoadResult load_dataset_dir(const std::string& dir, const LabelMap& labels) {
    const fs::path csv_path = fs::path(dir) / "labels.csv";
    std::ifstream csv(csv_path);
    if (!csv) {
        throw Error("labels.csv not found in " + dir);
    }

    LoadResult result;
    std::string line;
    if (!std::getline(csv, line) || strip_cr(line) != "filename,label,id") {
        throw Error("labels.csv must start with header 'filename,label,id'");
    }

    int row = 1;
    while (std::getline(csv, line)) {
        ++row;
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const std::string context = "labels.csv:" + std::to_string(row);
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            result.errors.push_back({context, "expected 3 fields, got " +
                                                  std::to_string(fields.size())});
            continue;
        }
        const std::string& filename = fields[0];
        int code = 0;
        try {
            std::size_t used = 0;
            code = std::stoi(fields[1], &used);
            if (used != fields[1].size()) {
                throw std::invalid_argument("trailing junk");
            }
        } catch (const std::exception&) {
            result.errors.push_back({context, "unparseable label '" + fields[1] + "'"});
            continue;
        }
        if (!labels.contains(code)) {
            result.errors.push_back({context, "unknown label code " + std::to_string(code)});
            continue;
        }
        try {
            DatasetRecord record;
            record.image = read_pgm((fs::path(dir) / filename).string());
            record.label = code;
            record.id = fields[2].empty() ? fs::path(filename).stem().string() : fields[2];
            result.records.push_back(std::move(record));
        } catch (const Error& e) {
            result.errors.push_back({filename, e.what()});
        }
    }
    return result;
}

namespace {

enum class Pattern { Disc, HollowSquare, DiagonalBar, Cross };

ImageTensor render_pattern(Pattern pattern, int side, Rng& rng) {
    const double s = static_cast<double>(side);
    const double cx = s * 0.5 + (rng.uniform() - 0.5) * 0.05 * s;
    const double cy = s * 0.5 + (rng.uniform() - 0.5) * 0.05 * s;
    const double size_jitter = rng.uniform() - 0.5;
    const double fg = 195.0 + rng.uniform() * 25.0;
    const double bg = 22.0 + rng.uniform() * 10.0;

    auto inside = [&](double x, double y) {
        switch (pattern) {
            case Pattern::Disc: {
                const double r = s * (0.21 + size_jitter * 0.03);
                return x * x + y * y <= r * r;
            }
            case Pattern::HollowSquare: {
                const double outer = s * (0.31 + size_jitter * 0.03);
                const double thickness = s * 0.09;
                const double m = std::max(std::abs(x), std::abs(y));
                return m <= outer && m >= outer - thickness;
            }
            case Pattern::DiagonalBar: {
                const double w = s * (0.10 + size_jitter * 0.02);
                return std::abs(x - y) <= w;
            }
            case Pattern::Cross: {
                const double w = s * (0.08 + size_jitter * 0.02);
                const double arm = s * 0.32;
                return (std::abs(x) <= w && std::abs(y) <= arm) ||
                       (std::abs(y) <= w && std::abs(x) <= arm);
            }
        }
        return false;
    };

    ImageTensor image(side, side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const double x = (c + 0.5) - cx;
            const double y = (r + 0.5) - cy;
            double v = inside(x, y) ? fg : bg;
            v += (rng.uniform() - 0.5) * 16.0;
            image.at(r, c) = static_cast<double>(std::lround(std::clamp(v, 0.0, 255.0)));
        }
    }
    return image;
}

}  // namespace

std::vector<DatasetRecord> generate_synthetic(int per_class, int side, int classes,
                                              std::uint64_t seed) {
    if (per_class < 1) {
        throw ArgumentError("per_class must be >= 1");
    }
    if (side < 8) {
        throw SizeError("synthetic images need side >= 8");
    }
    if (classes != 3 && classes != 4) {
        throw ArgumentError("classes must be 3 or 4");
    }

    constexpr Pattern kPatterns[] = {Pattern::Disc, Pattern::HollowSquare, Pattern::DiagonalBar,
                                     Pattern::Cross};
    Rng rng(seed);
    std::vector<DatasetRecord> records;
    records.reserve(static_cast<std::size_t>(per_class) * classes);
    char idbuf[32];
    for (int cls = 0; cls < classes; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            std::snprintf(idbuf, sizeof(idbuf), "c%d_%05d", cls + 1, i);
            DatasetRecord record;
            record.id = idbuf;
            record.label = cls + 1;
            record.image = render_pattern(kPatterns[cls], side, rng);
            records.push_back(std::move(record));
        }
    }
    return records;
}

void write_dataset_dir(const std::string& dir, std::span<const DatasetRecord> records) {
    fs::create_directories(dir);
    std::string csv = "filename,label,id\n";
    for (const DatasetRecord& record : records) {
        const std::string filename = record.id + ".pgm";
        write_pgm((fs::path(dir) / filename).string(), record.image);
        csv += filename + "," + std::to_string(record.label) + "," + record.id + "\n";
    }
    write_file_atomic((fs::path(dir) / "labels.csv").string(),
                      std::vector<unsigned char>(csv.begin(), csv.end()));
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>>
split(const std::vector<DatasetRecord>& records, const SplitSpec& spec) {
    std::vector<int> labels;
    labels.reserve(records.size());
    for (const DatasetRecord& r : records) {
        labels.push_back(r.label);
    }
    const auto [train_idx, val_idx] = stratified_split_indices(labels, spec.val_fraction, spec.seed);

    std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
    out.first.reserve(train_idx.size());
    out.second.reserve(val_idx.size());
    for (std::size_t i : train_idx) {
        out.first.push_back(records[i]);
    }
    for (std::size_t i : val_idx) {
        out.second.push_back(records[i]);
    }
    return out;
}

}  // namespace quanv
