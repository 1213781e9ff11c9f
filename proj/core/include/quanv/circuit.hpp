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
#include <numbers>
#include <span>

#include "quanv/statevector.hpp"

namespace quanv {

/// How a circuit's measurement is evaluated: the analytic expectation, or
/// an empirical mean over seeded shots.
struct Readout {
    enum class Mode { Exact, Sampled };

    Mode mode = Mode::Exact;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static Readout exact() { return {}; }
    static Readout sampled(std::uint64_t shots, std::uint64_t seed) {
        return {Mode::Sampled, shots, seed};
    }
};

/**
 * Parameters of the quanvolution circuit: a per-qubit RX encoding layer
 * (angle = pixel * pi), a controlled-rotation layer (CRZ then CRX with
 * fixed angle `theta` on each adjacent pair, optionally closing the
 * (last, first) ring), a closed CZ ring, and a Pauli-Z readout on one
 * qubit.
 */
struct QuanvCircuitConfig {
    int n_qubits = 4;
    double theta = std::numbers::pi / 2.0;
    bool cr_ring_closure = true;
    int readout_qubit = 0;
    Readout readout = Readout::exact();

    void validate() const;
};

/// RX(value * pi)|0> on one qubit: cos(v pi/2)|0> - i sin(v pi/2)|1>.
/// `value` must lie in [0, 1].
StateVector encode_pixel(double value);

/// The gate program for one patch. pixels.size() must equal n_qubits and
/// every pixel must lie in [0, 1].
CircuitSpec build_quanv_circuit(std::span<const double> pixels, const QuanvCircuitConfig& config);

/// Simulates the patch circuit from |0...0> and returns the Z readout on
/// config.readout_qubit, in [-1, 1].
double run_quanv_circuit(std::span<const double> pixels, const QuanvCircuitConfig& config);

/**
 * SWAP-test overlap estimate for two equal-sized registers.
 *
 * Builds ancilla (x) a (x) b, applies H on the ancilla, a controlled SWAP
 * of each (a_i, b_i) pair, H again, and returns P(ancilla = 0), which
 * equals (1 + |<a|b>|^2) / 2 exactly; sampled mode returns the empirical
 * frequency of ancilla = 0.
 */
double swap_test(const StateVector& a, const StateVector& b,
                 const Readout& readout = Readout::exact());

}  // namespace quanv
