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

// Test-only utilities: random-instance generators and independent
// naive-loop oracles the implementations are checked against. The oracles
// deliberately share no code with the library paths they verify.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "quanv/imageops.hpp"
#include "quanv/rng.hpp"
#include "quanv/statevector.hpp"

namespace test_helpers {

using quanv::cplx;
using quanv::ImageTensor;
using quanv::Kernel;
using quanv::Rng;
using quanv::StateVector;

/// Standard normal via Box-Muller on the portable uniform.
inline double gaussian(Rng& rng) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(2.0 * M_PI * u2);
}

/// Haar-ish random state: complex Gaussian amplitudes, normalized.
inline StateVector random_state(Rng& rng, int n_qubits) {
    StateVector state = quanv::zero_state(n_qubits);
    double norm_sq = 0.0;
    for (auto& amp : state.amps) {
        amp = cplx{gaussian(rng), gaussian(rng)};
        norm_sq += std::norm(amp);
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& amp : state.amps) {
        amp *= inv;
    }
    return state;
}

/// Random gate drawn from the library's gate set with random distinct
/// targets on an n-qubit register.
inline quanv::GateOp random_gate_op(Rng& rng, int n_qubits) {
    using quanv::GateKind;
    static constexpr GateKind kKinds[] = {GateKind::RX,  GateKind::H,  GateKind::CRZ,
                                          GateKind::CRX, GateKind::CZ, GateKind::CSWAP};
    quanv::GateOp op;
    for (;;) {
        op.kind = kKinds[rng.below(6)];
        const int arity = op.kind == GateKind::CSWAP ? 3
                          : (op.kind == GateKind::RX || op.kind == GateKind::H) ? 1
                                                                                : 2;
        if (arity <= n_qubits) {
            std::vector<int> qubits(n_qubits);
            std::iota(qubits.begin(), qubits.end(), 0);
            rng.shuffle(qubits);
            op.targets.assign(qubits.begin(), qubits.begin() + arity);
            break;
        }
    }
    op.param = quanv::gate_has_param(op.kind) ? rng.uniform(-2.0 * M_PI, 2.0 * M_PI) : 0.0;
    return op;
}

inline quanv::CircuitSpec random_circuit(Rng& rng, int n_qubits, int max_len) {
    quanv::CircuitSpec spec;
    const auto len = 1 + rng.below(static_cast<std::uint64_t>(max_len));
    for (std::uint64_t g = 0; g < len; ++g) {
        spec.ops.push_back(random_gate_op(rng, n_qubits));
    }
    return spec;
}

inline ImageTensor random_image(Rng& rng, int h, int w, double lo = 0.0, double hi = 1.0) {
    ImageTensor image(h, w);
    for (double& v : image.values) {
        v = rng.uniform(lo, hi);
    }
    return image;
}

inline Kernel random_kernel(Rng& rng, int h, int w) {
    Kernel kernel{h, w, {}};
    kernel.weights.resize(static_cast<std::size_t>(h) * w);
    for (double& v : kernel.weights) {
        v = rng.uniform(-1.0, 1.0);
    }
    return kernel;
}

// ---- naive oracles -----------------------------------------------------

inline ImageTensor naive_conv2d(const ImageTensor& x, const Kernel& k) {
    ImageTensor out(x.height - k.height + 1, x.width - k.width + 1);
    for (int i = 0; i + k.height <= x.height; ++i) {
        for (int j = 0; j + k.width <= x.width; ++j) {
            double acc = 0.0;
            for (int m = 0; m < k.height; ++m) {
                for (int n = 0; n < k.width; ++n) {
                    acc += x.at(i + m, j + n) * k.at(m, n);
                }
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

/// Collects each window into a scratch vector, then reduces it; shares no
/// loop structure with the library pooling kernels.
template <typename Reduce>
ImageTensor naive_pool(const ImageTensor& x, int window, int stride, Reduce reduce) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r + window <= x.height; r += stride) {
        std::vector<double> row;
        for (int c = 0; c + window <= x.width; c += stride) {
            std::vector<double> values;
            for (int m = 0; m < window; ++m) {
                for (int n = 0; n < window; ++n) {
                    values.push_back(x.at(r + m, c + n));
                }
            }
            row.push_back(reduce(values));
        }
        rows.push_back(row);
    }
    ImageTensor out(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            out.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
        }
    }
    return out;
}

inline ImageTensor naive_max_pool(const ImageTensor& x, int window, int stride) {
    return naive_pool(x, window, stride, [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end());
    });
}

inline ImageTensor naive_avg_pool(const ImageTensor& x, int window, int stride) {
    return naive_pool(x, window, stride, [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    });
}

inline ImageTensor naive_l2_pool(const ImageTensor& x, int window, int stride) {
    return naive_pool(x, window, stride, [](const std::vector<double>& v) {
        double acc = 0.0;
        for (double e : v) {
            acc += e * e;
        }
        return acc / static_cast<double>(v.size());
    });
}

inline double max_image_diff(const ImageTensor& a, const ImageTensor& b) {
    if (a.height != b.height || a.width != b.width) {
        return 1e300;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    }
    return worst;
}

inline double max_amp_diff(const StateVector& a, const StateVector& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i) {
        worst = std::max(worst, std::abs(a.amps[i] - b.amps[i]));
    }
    return worst;
}

/// Permutes a state's qubits: qubit q of the result is qubit perm[q] of
/// the input (bit relabeling in the index).
inline StateVector permute_qubits(const StateVector& state, const std::vector<int>& perm) {
    const int n = state.n_qubits;
    StateVector out = state;
    for (std::size_t idx = 0; idx < state.amps.size(); ++idx) {
        std::size_t dst = 0;
        for (int q = 0; q < n; ++q) {
            const int bit = static_cast<int>(idx >> (n - 1 - perm[q])) & 1;
            dst |= static_cast<std::size_t>(bit) << (n - 1 - q);
        }
        out.amps[dst] = state.amps[idx];
    }
    return out;
}

}  // namespace test_helpers
