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

#include <numbers>

#include "quanv/circuit.hpp"
#include "quanv/statevector.hpp"

namespace {

void BM_ApplySingleQubitGate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    quanv::StateVector sv = quanv::zero_state(n);
    const quanv::GateMatrix rx = quanv::gate_rx(0.3);
    const int target[] = {0};
    for (auto _ : state) {
        quanv::apply_gate_inplace(sv, rx, target);
        benchmark::DoNotOptimize(sv.amps.data());
    }
    state.SetItemsProcessed(state.iterations() * (1LL << n));
}
BENCHMARK(BM_ApplySingleQubitGate)->Arg(4)->Arg(8)->Arg(12)->Arg(16);

void BM_ApplyTwoQubitGate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    quanv::StateVector sv = quanv::zero_state(n);
    const quanv::GateMatrix crz = quanv::gate_crz(std::numbers::pi / 2);
    const int targets[] = {0, n - 1};
    for (auto _ : state) {
        quanv::apply_gate_inplace(sv, crz, targets);
        benchmark::DoNotOptimize(sv.amps.data());
    }
    state.SetItemsProcessed(state.iterations() * (1LL << n));
}
BENCHMARK(BM_ApplyTwoQubitGate)->Arg(4)->Arg(8)->Arg(12)->Arg(16);

void BM_PatchCircuitReadout(benchmark::State& state) {
    const quanv::QuanvCircuitConfig config;
    const double pixels[] = {0.1, 0.6, 0.3, 0.9};
    for (auto _ : state) {
        benchmark::DoNotOptimize(quanv::run_quanv_circuit(pixels, config));
    }
}
BENCHMARK(BM_PatchCircuitReadout);

void BM_DenseCircuitUnitary(benchmark::State& state) {
    const quanv::QuanvCircuitConfig config;
    const double pixels[] = {0.1, 0.6, 0.3, 0.9};
    const quanv::CircuitSpec spec = quanv::build_quanv_circuit(pixels, config);
    for (auto _ : state) {
        benchmark::DoNotOptimize(quanv::circuit_unitary(spec, 4).m.data());
    }
}
BENCHMARK(BM_DenseCircuitUnitary);

}  // namespace
