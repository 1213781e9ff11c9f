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

#include "quanv/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quanv/error.hpp"
#include "quanv/rng.hpp"

namespace quanv {

namespace {

void require_finite(double theta) {
    if (!std::isfinite(theta)) {
        throw ArgumentError("gate angle must be finite");
    }
}

void require_qubit(const StateVector& state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits) {
        throw ArgumentError("qubit index " + std::to_string(qubit) + " out of range for " +
                            std::to_string(state.n_qubits) + "-qubit register");
    }
}

// Bit position (from LSB) of qubit q under the qubit-0-is-leftmost rule.
inline int bit_pos(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

double norm_squared(const StateVector& state) {
    double s = 0.0;
    for (const cplx& a : state.amps) {
        s += std::norm(a);
    }
    return s;
}

}  // namespace

StateVector zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw SizeError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                        std::to_string(n_qubits));
    }
    StateVector state;
    state.n_qubits = n_qubits;
    state.amps.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    state.amps[0] = cplx{1.0, 0.0};
    return state;
}

GateMatrix gate_rx(double theta) {
    require_finite(theta);
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    GateMatrix g{2, {cplx{c, 0.0}, cplx{0.0, -s}, cplx{0.0, -s}, cplx{c, 0.0}}};
    return g;
}

GateMatrix gate_hadamard() {
    const double h = 1.0 / std::sqrt(2.0);
    return GateMatrix{2, {cplx{h, 0}, cplx{h, 0}, cplx{h, 0}, cplx{-h, 0}}};
}

GateMatrix gate_crz(double theta) {
    require_finite(theta);
    GateMatrix g = identity_matrix(4);
    g.at(2, 2) = std::exp(cplx{0.0, -theta / 2.0});
    g.at(3, 3) = std::exp(cplx{0.0, theta / 2.0});
    return g;
}

GateMatrix gate_crx(double theta) {
    require_finite(theta);
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    GateMatrix g = identity_matrix(4);
    g.at(2, 2) = cplx{c, 0.0};
    g.at(2, 3) = cplx{0.0, -s};
    g.at(3, 2) = cplx{0.0, -s};
    g.at(3, 3) = cplx{c, 0.0};
    return g;
}

GateMatrix gate_cz() {
    GateMatrix g = identity_matrix(4);
    g.at(3, 3) = cplx{-1.0, 0.0};
    return g;
}

GateMatrix gate_cswap() {
    GateMatrix g = identity_matrix(8);
    // |1 t1 t2>: indices 5 (|101>) and 6 (|110>) exchange.
    g.at(5, 5) = g.at(6, 6) = cplx{0.0, 0.0};
    g.at(5, 6) = g.at(6, 5) = cplx{1.0, 0.0};
    return g;
}

GateMatrix gate_matrix(const GateOp& op) {
    switch (op.kind) {
        case GateKind::RX:
            return gate_rx(op.param);
        case GateKind::H:
            return gate_hadamard();
        case GateKind::CRZ:
            return gate_crz(op.param);
        case GateKind::CRX:
            return gate_crx(op.param);
        case GateKind::CZ:
            return gate_cz();
        case GateKind::CSWAP:
            return gate_cswap();
    }
    throw ArgumentError("unknown gate kind");
}

void apply_gate_inplace(StateVector& state, const GateMatrix& gate,
                        std::span<const int> targets) {
    const int n = state.n_qubits;
    const int k = static_cast<int>(targets.size());
    if (k < 1 || k > 3 || gate.dim != (1 << k)) {
        throw ArgumentError("gate dimension " + std::to_string(gate.dim) +
                            " does not match " + std::to_string(k) + " target(s)");
    }
    for (int m = 0; m < k; ++m) {
        if (targets[m] < 0 || targets[m] >= n) {
            throw ArgumentError("target qubit " + std::to_string(targets[m]) + " out of range");
        }
        for (int l = m + 1; l < k; ++l) {
            if (targets[m] == targets[l]) {
                throw ArgumentError("duplicate target qubit " + std::to_string(targets[m]));
            }
        }
    }

    // targets[0] is the most significant bit of the gate's local index.
    std::size_t target_mask[3];
    std::size_t all_targets = 0;
    for (int m = 0; m < k; ++m) {
        target_mask[m] = std::size_t{1} << bit_pos(n, targets[m]);
        all_targets |= target_mask[m];
    }

    const int local_dim = 1 << k;
    std::size_t offset[8];
    for (int local = 0; local < local_dim; ++local) {
        std::size_t off = 0;
        for (int m = 0; m < k; ++m) {
            if ((local >> (k - 1 - m)) & 1) {
                off |= target_mask[m];
            }
        }
        offset[local] = off;
    }

    // Ascending bit positions not covered by any target.
    int free_pos[kMaxQubits];
    int n_free = 0;
    for (int p = 0; p < n; ++p) {
        if (!(all_targets >> p & 1)) {
            free_pos[n_free++] = p;
        }
    }

    cplx in[8];
    cplx out[8];
    const std::size_t outer = std::size_t{1} << n_free;
    for (std::size_t r = 0; r < outer; ++r) {
        std::size_t base = 0;
        for (int j = 0; j < n_free; ++j) {
            if ((r >> j) & 1) {
                base |= std::size_t{1} << free_pos[j];
            }
        }
        for (int local = 0; local < local_dim; ++local) {
            in[local] = state.amps[base | offset[local]];
        }
        for (int row = 0; row < local_dim; ++row) {
            cplx acc{0.0, 0.0};
            for (int col = 0; col < local_dim; ++col) {
                acc += gate.at(row, col) * in[col];
            }
            out[row] = acc;
        }
        for (int local = 0; local < local_dim; ++local) {
            state.amps[base | offset[local]] = out[local];
        }
    }

    // Written so a NaN norm also trips the check.
    const double drift = std::abs(norm_squared(state) - 1.0);
    if (!(drift <= kNormDriftTol)) {
        throw InternalError("state norm drifted by " + std::to_string(drift) +
                            " after gate application");
    }
}

StateVector apply_gate(const StateVector& state, const GateMatrix& gate,
                       std::span<const int> targets) {
    StateVector result = state;
    apply_gate_inplace(result, gate, targets);
    return result;
}

StateVector simulate(const CircuitSpec& spec, const StateVector& start) {
    StateVector state = start;
    for (const GateOp& op : spec.ops) {
        apply_gate_inplace(state, gate_matrix(op), op.targets);
    }
    return state;
}

StateVector simulate(const CircuitSpec& spec, int n_qubits) {
    return simulate(spec, zero_state(n_qubits));
}

double expectation_z(const StateVector& state, int qubit) {
    require_qubit(state, qubit);
    const std::size_t mask = std::size_t{1} << bit_pos(state.n_qubits, qubit);
    double value = 0.0;
    for (std::size_t i = 0; i < state.amps.size(); ++i) {
        const double p = std::norm(state.amps[i]);
        value += (i & mask) ? -p : p;
    }
    return std::clamp(value, -1.0, 1.0);
}

double probability_zero(const StateVector& state, int qubit) {
    require_qubit(state, qubit);
    const std::size_t mask = std::size_t{1} << bit_pos(state.n_qubits, qubit);
    double p0 = 0.0;
    for (std::size_t i = 0; i < state.amps.size(); ++i) {
        if (!(i & mask)) {
            p0 += std::norm(state.amps[i]);
        }
    }
    return std::clamp(p0, 0.0, 1.0);
}

double sample_z(const StateVector& state, int qubit, std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) {
        throw ArgumentError("shots must be >= 1");
    }
    const double p0 = probability_zero(state, qubit);
    Rng rng(seed);
    std::int64_t sum = 0;
    for (std::uint64_t s = 0; s < shots; ++s) {
        sum += rng.uniform() < p0 ? 1 : -1;
    }
    return static_cast<double>(sum) / static_cast<double>(shots);
}

cplx inner_product(const StateVector& a, const StateVector& b) {
    if (a.n_qubits != b.n_qubits) {
        throw ArgumentError("inner product requires equal register sizes");
    }
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.amps.size(); ++i) {
        acc += std::conj(a.amps[i]) * b.amps[i];
    }
    return acc;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    if (a.n_qubits + b.n_qubits > kMaxQubits) {
        throw SizeError("tensor product exceeds the register cap");
    }
    StateVector out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    out.amps.resize(a.amps.size() * b.amps.size());
    for (std::size_t i = 0; i < a.amps.size(); ++i) {
        for (std::size_t j = 0; j < b.amps.size(); ++j) {
            out.amps[i * b.amps.size() + j] = a.amps[i] * b.amps[j];
        }
    }
    return out;
}

double state_norm(const StateVector& state) { return std::sqrt(norm_squared(state)); }

GateMatrix identity_matrix(int dim) {
    GateMatrix g;
    g.dim = dim;
    g.m.assign(static_cast<std::size_t>(dim) * dim, cplx{0.0, 0.0});
    for (int i = 0; i < dim; ++i) {
        g.at(i, i) = cplx{1.0, 0.0};
    }
    return g;
}

GateMatrix matmul(const GateMatrix& a, const GateMatrix& b) {
    if (a.dim != b.dim) {
        throw ArgumentError("matrix dimension mismatch");
    }
    GateMatrix out;
    out.dim = a.dim;
    out.m.assign(a.m.size(), cplx{0.0, 0.0});
    for (int i = 0; i < a.dim; ++i) {
        for (int l = 0; l < a.dim; ++l) {
            const cplx ail = a.at(i, l);
            if (ail == cplx{0.0, 0.0}) {
                continue;
            }
            for (int j = 0; j < a.dim; ++j) {
                out.at(i, j) += ail * b.at(l, j);
            }
        }
    }
    return out;
}

GateMatrix dagger(const GateMatrix& a) {
    GateMatrix out;
    out.dim = a.dim;
    out.m.resize(a.m.size());
    for (int i = 0; i < a.dim; ++i) {
        for (int j = 0; j < a.dim; ++j) {
            out.at(i, j) = std::conj(a.at(j, i));
        }
    }
    return out;
}

double unitarity_defect(const GateMatrix& u) {
    const GateMatrix p = matmul(dagger(u), u);
    double worst = 0.0;
    for (int i = 0; i < p.dim; ++i) {
        for (int j = 0; j < p.dim; ++j) {
            const cplx expect = i == j ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            worst = std::max(worst, std::abs(p.at(i, j) - expect));
        }
    }
    return worst;
}

StateVector matvec(const GateMatrix& u, const StateVector& state) {
    if (static_cast<std::size_t>(u.dim) != state.amps.size()) {
        throw ArgumentError("matrix/state dimension mismatch");
    }
    StateVector out;
    out.n_qubits = state.n_qubits;
    out.amps.assign(state.amps.size(), cplx{0.0, 0.0});
    for (int i = 0; i < u.dim; ++i) {
        cplx acc{0.0, 0.0};
        for (int j = 0; j < u.dim; ++j) {
            acc += u.at(i, j) * state.amps[j];
        }
        out.amps[i] = acc;
    }
    return out;
}

GateMatrix embed_gate(const GateMatrix& gate, std::span<const int> targets, int n_qubits) {
    const int k = static_cast<int>(targets.size());
    if (gate.dim != (1 << k)) {
        throw ArgumentError("gate dimension does not match target count");
    }
    for (int m = 0; m < k; ++m) {
        if (targets[m] < 0 || targets[m] >= n_qubits) {
            throw ArgumentError("target qubit " + std::to_string(targets[m]) + " out of range");
        }
        for (int l = m + 1; l < k; ++l) {
            if (targets[m] == targets[l]) {
                throw ArgumentError("duplicate target qubit " + std::to_string(targets[m]));
            }
        }
    }
    const int dim = 1 << n_qubits;
    std::size_t rest_mask = dim - 1;
    for (int m = 0; m < k; ++m) {
        rest_mask &= ~(std::size_t{1} << bit_pos(n_qubits, targets[m]));
    }

    auto local_index = [&](int full) {
        int local = 0;
        for (int m = 0; m < k; ++m) {
            const int bit = (full >> bit_pos(n_qubits, targets[m])) & 1;
            local |= bit << (k - 1 - m);
        }
        return local;
    };

    GateMatrix full = identity_matrix(dim);
    full.m.assign(full.m.size(), cplx{0.0, 0.0});
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            if ((static_cast<std::size_t>(r) & rest_mask) !=
                (static_cast<std::size_t>(c) & rest_mask)) {
                continue;
            }
            full.at(r, c) = gate.at(local_index(r), local_index(c));
        }
    }
    return full;
}

GateMatrix circuit_unitary(const CircuitSpec& spec, int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxOracleQubits) {
        throw SizeError("dense circuit unitary limited to " +
                        std::to_string(kMaxOracleQubits) + " qubits");
    }
    GateMatrix total = identity_matrix(1 << n_qubits);
    for (const GateOp& op : spec.ops) {
        const GateMatrix full = embed_gate(gate_matrix(op), op.targets, n_qubits);
        total = matmul(full, total);
    }
    return total;
}

}  // namespace quanv
