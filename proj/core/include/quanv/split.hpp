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
#include <utility>
#include <vector>

namespace quanv {

/**
 * Seeded stratified train/validation partition over per-record labels.
 *
 * The validation side holds round(val_fraction * N) records (clamped so
 * neither side is empty), apportioned per class by largest remainder so
 * every class stays within +/-1 of exact proportionality. Selection within
 * a class is a seeded shuffle; both returned index lists are ascending.
 */
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const std::vector<int>& labels, double val_fraction,
                         std::uint64_t seed);

}  // namespace quanv
