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

#include <vector>

namespace quanv {

/// Row-major 2-D grid of reals. Raw pixels live in [0, 255] (or [0, 1]
/// after normalization); quanvolved feature maps live in [-1, 1].
struct ImageTensor {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    ImageTensor() = default;
    ImageTensor(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return values.size(); }
};

struct Kernel {
    int height = 0;
    int width = 0;
    std::vector<double> weights;

    double at(int r, int c) const { return weights[static_cast<std::size_t>(r) * width + c]; }
};

enum class GlobalPoolMode { Max, Avg };

/// Valid (unpadded) 2-D correlation: out(i,j) = sum_mn X(i+m, j+n) K(m,n).
/// Output dims are (H-kh+1, W-kw+1).
ImageTensor conv2d_valid(const ImageTensor& image, const Kernel& kernel);

/// Max over each window x window tile, stepping by `stride`; trailing
/// partial windows are discarded.
ImageTensor max_pool(const ImageTensor& image, int window, int stride);

/// Mean over each tile.
ImageTensor avg_pool(const ImageTensor& image, int window, int stride);

/// Mean of squares over each tile (no square root).
ImageTensor l2_pool(const ImageTensor& image, int window, int stride);

/// Single scalar per feature map.
double global_pool(const ImageTensor& image, GlobalPoolMode mode);

/// Grows every side by `margin` pixels of `fill`, preserving the interior.
ImageTensor pad(const ImageTensor& image, int margin, double fill);

/// Corner-aligned bilinear resampling; an identity resize is exact.
ImageTensor resize_bilinear(const ImageTensor& image, int out_h, int out_w);

/// Divides by max_raw, mapping [0, max_raw] onto [0, 1]. Values outside
/// [0, max_raw] raise RangeError.
ImageTensor normalize01(const ImageTensor& image, double max_raw);

}  // namespace quanv
