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

#include "quanv/circuit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "quanv/error.hpp"
#include "quanv/rng.hpp"

namespace quanv {

namespace {

void require_pixel(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw RangeError("pixel value " + std::to_string(value) + " outside [0, 1]");
    }
}

}  // namespace

void QuanvCircuitConfig::validate() const {
    if (n_qubits < 2 || n_qubits > kMaxQubits) {
        throw ArgumentError("quanvolution circuit needs 2.." + std::to_string(kMaxQubits) +
                            " qubits");
    }
    if (readout_qubit < 0 || readout_qubit >= n_qubits) {
        throw ArgumentError("readout qubit out of range");
    }
    if (!std::isfinite(theta)) {
        throw ArgumentError("theta must be finite");
    }
    if (readout.mode == Readout::Mode::Sampled && readout.shots == 0) {
        throw ArgumentError("sampled readout needs shots >= 1");
    }
}

StateVector encode_pixel(double value) {
    require_pixel(value);
    StateVector state = zero_state(1);
    const int target[] = {0};
    apply_gate_inplace(state, gate_rx(value * std::numbers::pi), target);
    return state;
}

CircuitSpec build_quanv_circuit(std::span<const double> pixels,
                                const QuanvCircuitConfig& config) {
    config.validate();
    if (static_cast<int>(pixels.size()) != config.n_qubits) {
        throw ArgumentError("expected " + std::to_string(config.n_qubits) + " pixels, got " +
                            std::to_string(pixels.size()));
    }
    for (double p : pixels) {
        require_pixel(p);
    }

    const int n = config.n_qubits;
    CircuitSpec spec;
    for (int q = 0; q < n; ++q) {
        spec.ops.push_back({GateKind::RX, pixels[q] * std::numbers::pi, {q}});
    }
    const int cr_pairs = config.cr_ring_closure ? n : n - 1;
    for (int k = 0; k < cr_pairs; ++k) {
        const int control = k;
        const int target = (k + 1) % n;
        spec.ops.push_back({GateKind::CRZ, config.theta, {control, target}});
        spec.ops.push_back({GateKind::CRX, config.theta, {control, target}});
    }
    for (int k = 0; k < n; ++k) {
        spec.ops.push_back({GateKind::CZ, 0.0, {k, (k + 1) % n}});
    }
    return spec;
}

double run_quanv_circuit(std::span<const double> pixels, const QuanvCircuitConfig& config) {
    const CircuitSpec spec = build_quanv_circuit(pixels, config);
    const StateVector state = simulate(spec, config.n_qubits);
    if (config.readout.mode == Readout::Mode::Sampled) {
        return sample_z(state, config.readout_qubit, config.readout.shots, config.readout.seed);
    }
    return expectation_z(state, config.readout_qubit);
}

double swap_test(const StateVector& a, const StateVector& b, const Readout& readout) {
    if (a.n_qubits != b.n_qubits) {
        throw ArgumentError("swap test requires equal register sizes");
    }
    const int k = a.n_qubits;
    StateVector reg = tensor(tensor(zero_state(1), a), b);

    const GateMatrix h = gate_hadamard();
    const GateMatrix cswap = gate_cswap();
    const int ancilla[] = {0};
    apply_gate_inplace(reg, h, ancilla);
    for (int i = 0; i < k; ++i) {
        const int targets[] = {0, 1 + i, 1 + k + i};
        apply_gate_inplace(reg, cswap, targets);
    }
    apply_gate_inplace(reg, h, ancilla);

    const double p0 = probability_zero(reg, 0);
    if (readout.mode == Readout::Mode::Exact) {
        return p0;
    }
    if (readout.shots == 0) {
        throw ArgumentError("sampled readout needs shots >= 1");
    }
    Rng rng(readout.seed);
    std::uint64_t zeros = 0;
    for (std::uint64_t s = 0; s < readout.shots; ++s) {
        if (rng.uniform() < p0) {
            ++zeros;
        }
    }
    return static_cast<double>(zeros) / static_cast<double>(readout.shots);
}

}  // namespace quanv
