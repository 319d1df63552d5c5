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

#include <cstddef>
#include <span>
#include <vector>

namespace hyqml {

/// Row-major dense matrix of doubles. Sizes in this library are small
/// (at most a few thousand entries per block), so no expression templates.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double &operator()(std::size_t r, std::size_t c) {
        return data[r * cols + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data[r * cols + c];
    }

    std::span<double> row(std::size_t r) {
        return {data.data() + r * cols, cols};
    }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    bool operator==(const Matrix &) const = default;
};

/// out = m * x + b
inline void affine(const Matrix &m, std::span<const double> x,
                   std::span<const double> b, std::span<double> out) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = b[r];
        const auto w = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            acc += w[c] * x[c];
        }
        out[r] = acc;
    }
}

} // namespace hyqml
