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

#include <benchmark/benchmark.h>

#include "quanv/quanvolution.hpp"
#include "quanv/rng.hpp"

namespace {

quanv::ImageTensor make_image(int side) {
    quanv::Rng rng(1);
    quanv::ImageTensor image(side, side);
    for (double& v : image.values) {
        v = rng.uniform();
    }
    return image;
}

void BM_QuanvolveImage(benchmark::State& state) {
    const quanv::ImageTensor image = make_image(static_cast<int>(state.range(0)));
    quanv::QuanvConfig config;
    config.threads = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(quanv::quanvolve_image(image, config).values.data());
    }
    const long long patches = (state.range(0) / 2) * (state.range(0) / 2);
    state.SetItemsProcessed(state.iterations() * patches);
}
BENCHMARK(BM_QuanvolveImage)
    ->Args({28, 1})
    ->Args({28, 0})
    ->Args({64, 1})
    ->Args({64, 0})
    ->Unit(benchmark::kMillisecond);

}  // namespace
