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

#include "quanv/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quanv/error.hpp"

namespace quanv {

namespace {

void require_nonempty(const ImageTensor& image) {
    if (image.height <= 0 || image.width <= 0) {
        throw SizeError("image must be non-empty");
    }
}

void require_pool_args(const ImageTensor& image, int window, int stride) {
    require_nonempty(image);
    if (window < 1 || stride < 1) {
        throw ArgumentError("window and stride must be >= 1");
    }
    if (window > image.height || window > image.width) {
        throw SizeError("pooling window exceeds image dimensions");
    }
}

template <typename Reduce>
ImageTensor pool(const ImageTensor& image, int window, int stride, Reduce reduce) {
    require_pool_args(image, window, stride);
    const int out_h = (image.height - window) / stride + 1;
    const int out_w = (image.width - window) / stride + 1;
    ImageTensor out(out_h, out_w);
    for (int i = 0; i < out_h; ++i) {
        for (int j = 0; j < out_w; ++j) {
            out.at(i, j) = reduce(image, i * stride, j * stride, window);
        }
    }
    return out;
}

}  // namespace

ImageTensor conv2d_valid(const ImageTensor& image, const Kernel& kernel) {
    require_nonempty(image);
    if (kernel.height < 1 || kernel.width < 1) {
        throw SizeError("kernel must be non-empty");
    }
    if (kernel.height > image.height || kernel.width > image.width) {
        throw SizeError("kernel (" + std::to_string(kernel.height) + "x" +
                        std::to_string(kernel.width) + ") larger than image (" +
                        std::to_string(image.height) + "x" + std::to_string(image.width) + ")");
    }
    const int out_h = image.height - kernel.height + 1;
    const int out_w = image.width - kernel.width + 1;
    ImageTensor out(out_h, out_w);
    for (int i = 0; i < out_h; ++i) {
        for (int j = 0; j < out_w; ++j) {
            double acc = 0.0;
            for (int m = 0; m < kernel.height; ++m) {
                for (int n = 0; n < kernel.width; ++n) {
                    acc += image.at(i + m, j + n) * kernel.at(m, n);
                }
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

ImageTensor max_pool(const ImageTensor& image, int window, int stride) {
    return pool(image, window, stride,
                [](const ImageTensor& img, int r0, int c0, int w) {
                    double best = img.at(r0, c0);
                    for (int m = 0; m < w; ++m) {
                        for (int n = 0; n < w; ++n) {
                            best = std::max(best, img.at(r0 + m, c0 + n));
                        }
                    }
                    return best;
                });
}

ImageTensor avg_pool(const ImageTensor& image, int window, int stride) {
    return pool(image, window, stride,
                [](const ImageTensor& img, int r0, int c0, int w) {
                    double acc = 0.0;
                    for (int m = 0; m < w; ++m) {
                        for (int n = 0; n < w; ++n) {
                            acc += img.at(r0 + m, c0 + n);
                        }
                    }
                    return acc / (static_cast<double>(w) * w);
                });
}

ImageTensor l2_pool(const ImageTensor& image, int window, int stride) {
    return pool(image, window, stride,
                [](const ImageTensor& img, int r0, int c0, int w) {
                    double acc = 0.0;
                    for (int m = 0; m < w; ++m) {
                        for (int n = 0; n < w; ++n) {
                            const double v = img.at(r0 + m, c0 + n);
                            acc += v * v;
                        }
                    }
                    return acc / (static_cast<double>(w) * w);
                });
}

double global_pool(const ImageTensor& image, GlobalPoolMode mode) {
    require_nonempty(image);
    if (mode == GlobalPoolMode::Max) {
        return *std::max_element(image.values.begin(), image.values.end());
    }
    double acc = 0.0;
    for (double v : image.values) {
        acc += v;
    }
    return acc / static_cast<double>(image.values.size());
}

ImageTensor pad(const ImageTensor& image, int margin, double fill) {
    if (margin < 0) {
        throw ArgumentError("padding margin must be >= 0");
    }
    if (margin == 0) {
        return image;
    }
    ImageTensor out(image.height + 2 * margin, image.width + 2 * margin, fill);
    for (int i = 0; i < image.height; ++i) {
        for (int j = 0; j < image.width; ++j) {
            out.at(i + margin, j + margin) = image.at(i, j);
        }
    }
    return out;
}

ImageTensor resize_bilinear(const ImageTensor& image, int out_h, int out_w) {
    require_nonempty(image);
    if (out_h < 1 || out_w < 1) {
        throw SizeError("resize target dimensions must be >= 1");
    }
    const double row_scale =
        out_h > 1 ? static_cast<double>(image.height - 1) / (out_h - 1) : 0.0;
    const double col_scale =
        out_w > 1 ? static_cast<double>(image.width - 1) / (out_w - 1) : 0.0;

    ImageTensor out(out_h, out_w);
    for (int i = 0; i < out_h; ++i) {
        const double sr = i * row_scale;
        const int r0 = std::min(static_cast<int>(sr), image.height - 1);
        const int r1 = std::min(r0 + 1, image.height - 1);
        const double fr = sr - r0;
        for (int j = 0; j < out_w; ++j) {
            const double sc = j * col_scale;
            const int c0 = std::min(static_cast<int>(sc), image.width - 1);
            const int c1 = std::min(c0 + 1, image.width - 1);
            const double fc = sc - c0;
            const double top = image.at(r0, c0) * (1.0 - fc) + image.at(r0, c1) * fc;
            const double bottom = image.at(r1, c0) * (1.0 - fc) + image.at(r1, c1) * fc;
            out.at(i, j) = top * (1.0 - fr) + bottom * fr;
        }
    }
    return out;
}

ImageTensor normalize01(const ImageTensor& image, double max_raw) {
    if (!(max_raw > 0.0)) {
        throw ArgumentError("max_raw must be positive");
    }
    ImageTensor out = image;
    for (double& v : out.values) {
        if (!(v >= 0.0 && v <= max_raw)) {
            throw RangeError("raw value " + std::to_string(v) + " outside [0, " +
                             std::to_string(max_raw) + "]");
        }
        v /= max_raw;
    }
    return out;
}

}  // namespace quanv
