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

#include "quanv/pgm.hpp"

#include <cmath>
#include <cstdint>

#include "quanv/bytes.hpp"
#include "quanv/error.hpp"

namespace quanv {

namespace {

// Skips PNM whitespace and '#' comments, then parses a decimal token.
long parse_pnm_int(const std::vector<unsigned char>& bytes, std::size_t& pos,
                   const std::string& path) {
    for (;;) {
        while (pos < bytes.size() && std::isspace(bytes[pos])) {
            ++pos;
        }
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') {
                ++pos;
            }
            continue;
        }
        break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
        throw CorruptionError("truncated", "malformed PGM header in " + path);
    }
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
        value = value * 10 + (bytes[pos] - '0');
        if (value > 1'000'000'000L) {
            throw CorruptionError("shape", "PGM header value out of range in " + path);
        }
        ++pos;
    }
    return value;
}

}  // namespace

ImageTensor read_pgm(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw CorruptionError("magic", "not a binary PGM (P5): " + path);
    }
    std::size_t pos = 2;
    const long width = parse_pnm_int(bytes, pos, path);
    const long height = parse_pnm_int(bytes, pos, path);
    const long maxval = parse_pnm_int(bytes, pos, path);
    if (width < 1 || height < 1 || width > 65535 || height > 65535) {
        throw CorruptionError("shape", "bad PGM dimensions in " + path);
    }
    if (maxval < 1 || maxval > 255) {
        throw CorruptionError("version", "unsupported PGM maxval " + std::to_string(maxval) +
                                             " in " + path);
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw CorruptionError("truncated", "missing pixel separator in " + path);
    }
    ++pos;  // single whitespace byte between header and raster

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos < count) {
        throw CorruptionError("truncated", "PGM raster shorter than header promises: " + path);
    }

    ImageTensor image(static_cast<int>(height), static_cast<int>(width));
    for (std::size_t i = 0; i < count; ++i) {
        image.values[i] = static_cast<double>(bytes[pos + i]);
    }
    return image;
}

void write_pgm(const std::string& path, const ImageTensor& image) {
    if (image.height <= 0 || image.width <= 0) {
        throw SizeError("cannot write an empty image");
    }
    std::vector<unsigned char> out;
    const std::string header =
        "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.insert(out.end(), header.begin(), header.end());
    out.reserve(out.size() + image.size());
    for (double v : image.values) {
        if (!(v >= 0.0 && v <= 255.0)) {
            throw RangeError("pixel value " + std::to_string(v) + " outside [0, 255]");
        }
        out.push_back(static_cast<unsigned char>(std::lround(v)));
    }
    write_file_atomic(path, out);
}

}  // namespace quanv
