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

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "quanv/circuit_spec.hpp"

namespace quanv {

using cplx = std::complex<double>;

/**
 * Dense state vector of an n-qubit register.
 *
 * Qubit 0 is the leftmost (most significant) position in basis-state
 * indexing: |q0 q1 ... q_{n-1}> lives at index q0*2^{n-1} + ... + q_{n-1}.
 * Amplitudes are unit-norm after construction and after every gate; a gate
 * application that drifts the norm by more than 1e-8 throws InternalError
 * instead of silently renormalizing.
 */
struct StateVector {
    int n_qubits = 0;
    std::vector<cplx> amps;

    std::size_t size() const { return amps.size(); }
};

/// Square complex matrix of a 1-, 2-, or 3-qubit gate (or of a whole
/// register, for the dense oracle). Row-major.
struct GateMatrix {
    int dim = 0;
    std::vector<cplx> m;

    cplx& at(int r, int c) { return m[static_cast<std::size_t>(r) * dim + c]; }
    const cplx& at(int r, int c) const { return m[static_cast<std::size_t>(r) * dim + c]; }
};

inline constexpr int kMaxQubits = 20;      // desk-scale register cap
inline constexpr int kMaxOracleQubits = 8; // dense-unitary oracle cap
inline constexpr double kNormDriftTol = 1e-8;

/// |0...0> on n qubits. 1 <= n_qubits <= kMaxQubits.
StateVector zero_state(int n_qubits);

// Gate factories. Matrices follow the conventions stated on each one; all
// are unitary to < 1e-12 by construction.

/// [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]]
GateMatrix gate_rx(double theta);
/// (1/sqrt 2) [[1, 1], [1, -1]]
GateMatrix gate_hadamard();
/// diag(1, 1, e^{-i t/2}, e^{+i t/2}) in |control target> ordering.
GateMatrix gate_crz(double theta);
/// Identity on |00>,|01>; RX(t) block on |10>,|11>.
GateMatrix gate_crx(double theta);
/// diag(1, 1, 1, -1)
GateMatrix gate_cz();
/// 8x8 permutation: swaps the two targets when the (first) control is 1.
GateMatrix gate_cswap();

/// The matrix for one CircuitSpec entry.
GateMatrix gate_matrix(const GateOp& op);

/**
 * Applies `gate` to the listed qubits (first target = most significant bit
 * of the gate's local index) and the identity elsewhere.
 *
 * Requires gate.dim == 2^targets.size() and distinct, in-range targets.
 */
StateVector apply_gate(const StateVector& state, const GateMatrix& gate,
                       std::span<const int> targets);

/// In-place variant; the building block of circuit simulation loops.
void apply_gate_inplace(StateVector& state, const GateMatrix& gate,
                        std::span<const int> targets);

/// Runs the spec gate-by-gate from |0...0>.
StateVector simulate(const CircuitSpec& spec, int n_qubits);

/// Runs the spec gate-by-gate from an arbitrary start state.
StateVector simulate(const CircuitSpec& spec, const StateVector& start);

/// <Z_qubit> = P(qubit=0) - P(qubit=1), in [-1, 1].
double expectation_z(const StateVector& state, int qubit);

/// P(qubit = 0), in [0, 1].
double probability_zero(const StateVector& state, int qubit);

/// Empirical mean of `shots` +/-1 measurement outcomes of Z on `qubit`,
/// drawn from the exact distribution by the seeded portable RNG.
double sample_z(const StateVector& state, int qubit, std::uint64_t shots, std::uint64_t seed);

/// <a|b> for equal-sized registers.
cplx inner_product(const StateVector& a, const StateVector& b);

/// Kronecker product; a's qubits become the most significant block.
StateVector tensor(const StateVector& a, const StateVector& b);

/// sqrt(sum |amp|^2)
double state_norm(const StateVector& state);

// Dense-matrix utilities. circuit_unitary is the brute-force oracle: each
// gate is embedded into the full 2^n x 2^n space entry-by-entry and the
// embeddings are matrix-multiplied, sharing no code path with apply_gate.

GateMatrix identity_matrix(int dim);
GateMatrix matmul(const GateMatrix& a, const GateMatrix& b);
GateMatrix dagger(const GateMatrix& a);
/// max_ij |(U^dagger U - I)_ij|
double unitarity_defect(const GateMatrix& u);
/// Dense matrix-vector product.
StateVector matvec(const GateMatrix& u, const StateVector& state);
/// Embeds `gate` on `targets` into the full register space.
GateMatrix embed_gate(const GateMatrix& gate, std::span<const int> targets, int n_qubits);
/// Product of embedded gate matrices for the whole spec. n_qubits <= 8.
GateMatrix circuit_unitary(const CircuitSpec& spec, int n_qubits);

}  // namespace quanv
