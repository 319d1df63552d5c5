// Copyright 2026 The hyqml Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "qsim.hpp"

namespace hyqml::varcircuit {

inline constexpr std::size_t max_depth = 64;

/// Circuit topology: `qubits` wires and `depth` entangling layers.
struct CircuitSpec {
    std::size_t qubits = 4;
    std::size_t depth = 6;

    void validate() const {
        if (qubits < 1 || qubits > qsim::max_qubits) {
            throw ConfigError("qubits must be in [1, " +
                              std::to_string(qsim::max_qubits) + "], got " +
                              std::to_string(qubits));
        }
        if (depth > max_depth) {
            throw ConfigError("depth must be in [0, " +
                              std::to_string(max_depth) + "], got " +
                              std::to_string(depth));
        }
    }

    bool operator==(const CircuitSpec &) const = default;
};

/// Trainable rotation angles, one row per entangling layer.
using QuantumParams = Matrix;

/// Theta Jacobian column `l * q + i` belongs to layer l, wire i.
struct Jacobians {
    Matrix thetas; ///< q outputs x (d*q) angles
    Matrix embed;  ///< q outputs x q embedding angles
    std::vector<double> value;
};

namespace detail {
inline std::atomic<std::uint64_t> &forward_counter() {
    static std::atomic<std::uint64_t> counter{0};
    return counter;
}

inline void check_shapes(const CircuitSpec &spec, const QuantumParams &params,
                         std::span<const double> embed) {
    spec.validate();
    if (params.rows != spec.depth || params.cols != spec.qubits) {
        throw ConfigError("quantum params shape (" +
                          std::to_string(params.rows) + ", " +
                          std::to_string(params.cols) + ") != (" +
                          std::to_string(spec.depth) + ", " +
                          std::to_string(spec.qubits) + ")");
    }
    if (embed.size() != spec.qubits) {
        throw ConfigError("embedding length " + std::to_string(embed.size()) +
                          " != qubits " + std::to_string(spec.qubits));
    }
}

inline std::vector<double> run(const CircuitSpec &spec,
                               const QuantumParams &params,
                               std::span<const double> embed) {
    forward_counter().fetch_add(1, std::memory_order_relaxed);
    const std::size_t q = spec.qubits;
    qsim::StateVector<double> state(q);
    for (std::size_t i = 0; i < q; ++i) {
        state.apply_h(i);
    }
    for (std::size_t i = 0; i < q; ++i) {
        state.apply_ry(i, embed[i]);
    }
    for (std::size_t l = 0; l < spec.depth; ++l) {
        for (std::size_t i = 0; i + 1 < q; i += 2) {
            state.apply_cnot(i, i + 1);
        }
        for (std::size_t i = 1; i + 1 < q; i += 2) {
            state.apply_cnot(i, i + 1);
        }
        for (std::size_t i = 0; i < q; ++i) {
            state.apply_ry(i, params(l, i));
        }
    }
    return state.expect_z_all();
}
} // namespace detail

/// Number of circuit executions since process start (or the last reset),
/// counted across all threads.
inline std::uint64_t forward_invocations() noexcept {
    return detail::forward_counter().load(std::memory_order_relaxed);
}

inline void reset_forward_invocations() noexcept {
    detail::forward_counter().store(0, std::memory_order_relaxed);
}

/**
 * @brief Runs the dressed circuit and returns <Z> on every wire.
 *
 * Layout: H on every wire, RY(embed[i]) on wire i, then per layer a CNOT
 * chain on even pairs (0,1),(2,3),..., a CNOT chain on odd pairs
 * (1,2),(3,4),..., and RY(params(l, i)) on each wire.
 */
[[nodiscard]] inline std::vector<double>
quantum_forward(const CircuitSpec &spec, const QuantumParams &params,
                std::span<const double> embed) {
    detail::check_shapes(spec, params, embed);
    return detail::run(spec, params, embed);
}

/**
 * @brief Exact Jacobians of every output w.r.t. every angle.
 *
 * Each column is [f(phi + pi/2) - f(phi - pi/2)] / 2, which is exact for
 * RY generators. Costs circuit_evals_per_sample(spec) circuit runs.
 */
[[nodiscard]] inline Jacobians param_shift_grad(const CircuitSpec &spec,
                                                const QuantumParams &params,
                                                std::span<const double> embed) {
    detail::check_shapes(spec, params, embed);
    constexpr double shift = std::numbers::pi / 2;
    const std::size_t q = spec.qubits;
    const std::size_t n_theta = spec.depth * q;

    Jacobians out{Matrix(q, n_theta), Matrix(q, q), detail::run(spec, params, embed)};

    QuantumParams shifted = params;
    for (std::size_t p = 0; p < n_theta; ++p) {
        const double orig = shifted.data[p];
        shifted.data[p] = orig + shift;
        const auto plus = detail::run(spec, shifted, embed);
        shifted.data[p] = orig - shift;
        const auto minus = detail::run(spec, shifted, embed);
        shifted.data[p] = orig;
        for (std::size_t o = 0; o < q; ++o) {
            out.thetas(o, p) = 0.5 * (plus[o] - minus[o]);
        }
    }

    std::vector<double> angles(embed.begin(), embed.end());
    for (std::size_t j = 0; j < q; ++j) {
        const double orig = angles[j];
        angles[j] = orig + shift;
        const auto plus = detail::run(spec, params, angles);
        angles[j] = orig - shift;
        const auto minus = detail::run(spec, params, angles);
        angles[j] = orig;
        for (std::size_t o = 0; o < q; ++o) {
            out.embed(o, j) = 0.5 * (plus[o] - minus[o]);
        }
    }
    return out;
}

/// One forward run plus two shifted runs per trainable and embedding angle.
[[nodiscard]] constexpr std::uint64_t
circuit_evals_per_sample(const CircuitSpec &spec) noexcept {
    return 1 + 2 * (spec.depth * spec.qubits + spec.qubits);
}

} // namespace hyqml::varcircuit
