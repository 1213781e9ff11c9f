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

#include "quanv/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "quanv/error.hpp"
#include "quanv/rng.hpp"

namespace quanv {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const std::vector<int>& labels, double val_fraction,
                         std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (n < 2) {
        throw SizeError("need at least 2 records to split");
    }
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw ArgumentError("val_fraction must lie in (0, 1)");
    }

    std::size_t val_total =
        static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    val_total = std::clamp<std::size_t>(val_total, 1, n - 1);

    // class label -> member indices, in label then record order
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        groups[labels[i]].push_back(i);
    }

    // Largest-remainder apportionment of val_total across classes.
    struct Share {
        int label;
        std::size_t count;
        std::size_t base;
        double remainder;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (const auto& [label, members] : groups) {
        const double exact = val_fraction * static_cast<double>(members.size());
        const auto base = std::min<std::size_t>(static_cast<std::size_t>(exact), members.size());
        shares.push_back({label, members.size(), base, exact - static_cast<double>(base)});
        assigned += base;
    }
    std::stable_sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
        if (a.remainder != b.remainder) {
            return a.remainder > b.remainder;
        }
        return a.label < b.label;
    });
    for (auto& share : shares) {
        if (assigned >= val_total) {
            break;
        }
        if (share.base < share.count) {
            ++share.base;
            ++assigned;
        }
    }
    // Rounding pathologies (tiny classes) can leave a shortfall; top up
    // wherever capacity remains so |val| stays exact.
    for (auto& share : shares) {
        while (assigned < val_total && share.base < share.count) {
            ++share.base;
            ++assigned;
        }
    }

    std::map<int, std::size_t> val_quota;
    for (const Share& share : shares) {
        val_quota[share.label] = share.base;
    }

    Rng rng(seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    for (auto& [label, members] : groups) {
        rng.shuffle(members);
        const std::size_t quota = val_quota[label];
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < quota ? val_idx : train_idx).push_back(members[i]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    return {std::move(train_idx), std::move(val_idx)};
}

}  // namespace quanv
