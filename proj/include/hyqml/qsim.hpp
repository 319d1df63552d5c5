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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace hyqml::qsim {

/// Largest register the simulator will allocate (2^24 complex doubles).
inline constexpr std::size_t max_qubits = 24;

/**
 * @brief Dense statevector over `num_qubits` wires.
 *
 * Wire 0 is the most significant bit of the basis-state index, so for two
 * qubits the amplitude order is |00>, |01>, |10>, |11> with the left digit
 * belonging to wire 0.
 *
 * Gates are applied in place by pairing indices that differ only in the
 * target bit; no gate matrix over the full register is ever built.
 */
template <class PrecisionT = double> class StateVector {
  public:
    using ComplexT = std::complex<PrecisionT>;

    /// |0...0> on `num_qubits` wires.
    explicit StateVector(std::size_t num_qubits)
        : num_qubits_(checked_qubits(num_qubits)),
          amps_(std::size_t{1} << num_qubits, ComplexT{0, 0}) {
        amps_[0] = ComplexT{1, 0};
    }

    /// Wraps explicit amplitudes; the length must be a power of two.
    explicit StateVector(std::vector<ComplexT> amplitudes)
        : num_qubits_(qubits_for_length(amplitudes.size())),
          amps_(std::move(amplitudes)) {}

    [[nodiscard]] std::size_t num_qubits() const noexcept {
        return num_qubits_;
    }
    [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const ComplexT> amplitudes() const noexcept {
        return amps_;
    }
    [[nodiscard]] const ComplexT &operator[](std::size_t i) const {
        return amps_[i];
    }

    /// Resets to |0...0> without reallocating.
    void reset() noexcept {
        std::fill(amps_.begin(), amps_.end(), ComplexT{0, 0});
        amps_[0] = ComplexT{1, 0};
    }

    StateVector &apply_h(std::size_t wire) {
        const std::size_t mask = bit_of(wire);
        const PrecisionT s = PrecisionT{1} / std::numbers::sqrt2_v<PrecisionT>;
        for_each_pair(mask, [s](ComplexT &a0, ComplexT &a1) {
            const ComplexT v0 = a0;
            const ComplexT v1 = a1;
            a0 = s * (v0 + v1);
            a1 = s * (v0 - v1);
        });
        return *this;
    }

    /// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    StateVector &apply_ry(std::size_t wire, PrecisionT theta) {
        if (!std::isfinite(theta)) {
            throw NumericError("RY angle must be finite");
        }
        const std::size_t mask = bit_of(wire);
        const PrecisionT c = std::cos(theta / 2);
        const PrecisionT s = std::sin(theta / 2);
        for_each_pair(mask, [c, s](ComplexT &a0, ComplexT &a1) {
            const ComplexT v0 = a0;
            const ComplexT v1 = a1;
            a0 = c * v0 - s * v1;
            a1 = s * v0 + c * v1;
        });
        return *this;
    }

    StateVector &apply_cnot(std::size_t control, std::size_t target) {
        if (control == target) {
            throw IndexError("CNOT control and target must differ (wire " +
                             std::to_string(control) + ")");
        }
        const std::size_t cmask = bit_of(control);
        const std::size_t tmask = bit_of(target);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cmask) != 0 && (i & tmask) == 0) {
                std::swap(amps_[i], amps_[i | tmask]);
            }
        }
        return *this;
    }

    /// <Z> on one wire: sum of |amp|^2 weighted by +1 (bit 0) or -1 (bit 1).
    [[nodiscard]] PrecisionT expect_z(std::size_t wire) const {
        const std::size_t mask = bit_of(wire);
        PrecisionT acc = 0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const PrecisionT p = std::norm(amps_[i]);
            acc += (i & mask) == 0 ? p : -p;
        }
        return acc;
    }

    /// <Z> on every wire. Accumulation order per wire matches expect_z, so
    /// results are bit-identical to the per-wire calls.
    [[nodiscard]] std::vector<PrecisionT> expect_z_all() const {
        std::vector<PrecisionT> out(num_qubits_, PrecisionT{0});
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const PrecisionT p = std::norm(amps_[i]);
            for (std::size_t w = 0; w < num_qubits_; ++w) {
                out[w] += (i & (std::size_t{1} << (num_qubits_ - 1 - w))) == 0
                              ? p
                              : -p;
            }
        }
        return out;
    }

    [[nodiscard]] PrecisionT norm() const noexcept {
        PrecisionT acc = 0;
        for (const auto &a : amps_) {
            acc += std::norm(a);
        }
        return std::sqrt(acc);
    }

  private:
    static std::size_t checked_qubits(std::size_t q) {
        if (q < 1 || q > max_qubits) {
            throw ConfigError("qubit count " + std::to_string(q) +
                              " outside [1, " + std::to_string(max_qubits) +
                              "] (simulator cap is " +
                              std::to_string(max_qubits) + " qubits)");
        }
        return q;
    }

    static std::size_t qubits_for_length(std::size_t len) {
        std::size_t q = 0;
        while ((std::size_t{1} << q) < len) {
            ++q;
        }
        if (len < 2 || (std::size_t{1} << q) != len) {
            throw ConfigError("amplitude count " + std::to_string(len) +
                              " is not 2^q with q >= 1");
        }
        return checked_qubits(q);
    }

    [[nodiscard]] std::size_t bit_of(std::size_t wire) const {
        if (wire >= num_qubits_) {
            throw IndexError("wire " + std::to_string(wire) +
                             " out of range for " +
                             std::to_string(num_qubits_) + " qubits");
        }
        return std::size_t{1} << (num_qubits_ - 1 - wire);
    }

    // Visits (i0, i0 | mask) for every i0 with the mask bit clear, in
    // ascending i0 order.
    template <class Kernel> void for_each_pair(std::size_t mask, Kernel &&k) {
        const std::size_t half = amps_.size() >> 1U;
        const std::size_t low = mask - 1;
        for (std::size_t k0 = 0; k0 < half; ++k0) {
            const std::size_t i0 = ((k0 & ~low) << 1U) | (k0 & low);
            k(amps_[i0], amps_[i0 | mask]);
        }
    }

    std::size_t num_qubits_;
    std::vector<ComplexT> amps_;
};

template <class PrecisionT = double>
[[nodiscard]] StateVector<PrecisionT> new_zero_state(std::size_t num_qubits) {
    return StateVector<PrecisionT>(num_qubits);
}

} // namespace hyqml::qsim
