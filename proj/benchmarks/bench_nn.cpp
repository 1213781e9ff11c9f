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

#include "quanv/nn.hpp"
#include "quanv/rng.hpp"

namespace {

quanv::Tensor3 make_input(const quanv::ModelShape& shape, std::uint64_t seed) {
    quanv::Rng rng(seed);
    quanv::Tensor3 t(shape.input_channels, shape.input_h, shape.input_w);
    for (double& v : t.values) {
        v = rng.uniform(-1.0, 1.0);
    }
    return t;
}

void BM_ForwardEval(benchmark::State& state) {
    quanv::ModelShape shape;
    const quanv::ModelParams params = quanv::weight_init(shape, 1);
    const quanv::Tensor3 input = make_input(shape, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(quanv::forward(params, input, nullptr).probs.data());
    }
}
BENCHMARK(BM_ForwardEval);

void BM_ForwardBackward(benchmark::State& state) {
    quanv::ModelShape shape;
    const quanv::ModelParams params = quanv::weight_init(shape, 1);
    const quanv::Tensor3 input = make_input(shape, 2);
    for (auto _ : state) {
        const quanv::Activations acts = quanv::forward(params, input, nullptr);
        benchmark::DoNotOptimize(quanv::backward(params, acts, 1).conv1.weights.data());
    }
}
BENCHMARK(BM_ForwardBackward);

void BM_TrainEpoch(benchmark::State& state) {
    quanv::Rng rng(3);
    std::vector<quanv::LabeledMap> maps;
    for (int i = 0; i < 120; ++i) {
        quanv::ImageTensor map(14, 14);
        for (double& v : map.values) {
            v = rng.uniform(-1.0, 1.0);
        }
        maps.push_back({std::move(map), 1 + i % 3});
    }
    quanv::TrainConfig config;
    config.epochs = 1;
    config.seed = 7;
    config.threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(quanv::train(maps, config).second.val_accuracy);
    }
}
BENCHMARK(BM_TrainEpoch)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
