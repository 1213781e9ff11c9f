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

#include <string>

#include "quanv/imageops.hpp"

namespace quanv {

/// Reads a binary (P5) PGM with maxval <= 255. Pixel values are returned
/// as raw intensities in [0, 255]. Header comments (#) are honored.
ImageTensor read_pgm(const std::string& path);

/// Writes a binary (P5) PGM with maxval 255. Values must lie in
/// [0, 255]; they are rounded to the nearest integer. Atomic
/// (temp file + rename).
void write_pgm(const std::string& path, const ImageTensor& image);

}  // namespace quanv
