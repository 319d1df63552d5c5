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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace hyqml::dataplane {

/// Labeled feature vectors. Immutable once built.
struct Dataset {
    Matrix features; ///< n x D
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] std::size_t feature_dim() const noexcept {
        return features.cols;
    }
    [[nodiscard]] std::span<const double> sample(std::size_t i) const {
        return features.row(i);
    }

    void validate() const {
        if (labels.empty()) {
            throw InputError("dataset is empty");
        }
        if (features.rows != labels.size()) {
            throw InputError("feature rows != label count");
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] >= num_classes) {
                throw InputError("label " + std::to_string(labels[i]) +
                                 " at row " + std::to_string(i) +
                                 " >= num_classes " +
                                 std::to_string(num_classes));
            }
        }
        for (double v : features.data) {
            if (!std::isfinite(v)) {
                throw InputError("non-finite feature value");
            }
        }
    }

    /// Rows `indices` in the given order; num_classes is kept.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const {
        Dataset out;
        out.num_classes = num_classes;
        out.features = Matrix(indices.size(), feature_dim());
        out.labels.reserve(indices.size());
        for (std::size_t r = 0; r < indices.size(); ++r) {
            const auto src = sample(indices[r]);
            std::copy(src.begin(), src.end(), out.features.row(r).begin());
            out.labels.push_back(labels[indices[r]]);
        }
        return out;
    }

    bool operator==(const Dataset &) const = default;
};

/**
 * @brief Gaussian class clusters standing in for frozen-backbone features.
 *
 * Each class gets a random unit direction; its samples are
 * margin * direction + N(0, I). Sample i has label i % C, so class counts
 * differ by at most one.
 */
[[nodiscard]] inline Dataset generate_synthetic(std::size_t n, std::size_t dim,
                                                std::size_t classes,
                                                double margin,
                                                std::uint64_t seed) {
    if (classes < 1 || n < classes) {
        throw InputError("synthetic dataset needs n >= C >= 1 (n=" +
                         std::to_string(n) +
                         ", C=" + std::to_string(classes) + ")");
    }
    if (dim < 1) {
        throw InputError("feature dimension must be >= 1");
    }
    if (!(margin >= 0.0) || !std::isfinite(margin)) {
        throw InputError("margin must be finite and >= 0");
    }

    Xoshiro256 rng(seed);
    Matrix directions(classes, dim);
    for (std::size_t c = 0; c < classes; ++c) {
        auto row = directions.row(c);
        double norm2 = 0.0;
        for (auto &v : row) {
            v = rng.normal();
            norm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto &v : row) {
            v *= inv;
        }
    }

    Dataset ds;
    ds.num_classes = classes;
    ds.features = Matrix(n, dim);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        ds.labels[i] = c;
        const auto dir = directions.row(c);
        auto row = ds.features.row(i);
        for (std::size_t k = 0; k < dim; ++k) {
            row[k] = margin * dir[k] + rng.normal();
        }
    }
    return ds;
}

namespace detail {
inline std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') {
        s.remove_suffix(1);
    }
    return s;
}
} // namespace detail

/// Parses "label,f1,...,fD" rows. C is max label + 1.
[[nodiscard]] inline Dataset parse_csv(std::istream &in) {
    Dataset ds;
    std::vector<double> values;
    std::size_t dim = 0;
    std::size_t max_label = 0;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = detail::trim_cr(line);
        if (text.empty()) {
            continue;
        }
        std::size_t field = 0;
        std::size_t start = 0;
        const std::size_t row_begin = values.size();
        std::size_t label = 0;
        while (true) {
            const std::size_t comma = text.find(',', start);
            const std::string_view tok = text.substr(
                start, comma == std::string_view::npos ? std::string_view::npos
                                                       : comma - start);
            const char *first = tok.data();
            const char *last = tok.data() + tok.size();
            if (field == 0) {
                const auto [ptr, ec] = std::from_chars(first, last, label);
                if (ec != std::errc{} || ptr != last || tok.empty()) {
                    throw ParseError("label '" + std::string(tok) +
                                         "' is not a non-negative integer",
                                     line_no);
                }
            } else {
                double v = 0.0;
                const auto [ptr, ec] = std::from_chars(first, last, v);
                if (ec != std::errc{} || ptr != last || tok.empty() ||
                    !std::isfinite(v)) {
                    throw ParseError("field " + std::to_string(field + 1) +
                                         " '" + std::string(tok) +
                                         "' is not a finite number",
                                     line_no);
                }
                values.push_back(v);
            }
            ++field;
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        const std::size_t row_dim = values.size() - row_begin;
        if (row_dim == 0) {
            throw ParseError("row has a label but no features", line_no);
        }
        if (ds.labels.empty()) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw ParseError("row has " + std::to_string(row_dim + 1) +
                                 " fields, expected " + std::to_string(dim + 1),
                             line_no);
        }
        ds.labels.push_back(label);
        max_label = std::max(max_label, label);
    }
    if (ds.labels.empty()) {
        throw ParseError("no samples in file", line_no == 0 ? 1 : line_no);
    }
    ds.num_classes = max_label + 1;
    ds.features.rows = ds.labels.size();
    ds.features.cols = dim;
    ds.features.data = std::move(values);
    return ds;
}

[[nodiscard]] inline Dataset load_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open dataset file '" + path + "'");
    }
    return parse_csv(in);
}

/// Shortest round-trip decimal form of each value.
inline void write_csv(const Dataset &ds, std::ostream &out) {
    char buf[64];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.labels[i];
        for (double v : ds.sample(i)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            out << ',' << std::string_view(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

inline void write_csv(const Dataset &ds, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write dataset file '" + path + "'");
    }
    write_csv(ds, out);
}

/// One worker's view of an epoch.
struct Shard {
    std::size_t worker_id = 0;
    std::size_t num_workers = 1;
    std::size_t epoch = 0;
    std::vector<std::size_t> indices;
};

/// Permutation of 0..n seeded by (seed, epoch); shared by all workers.
[[nodiscard]] inline std::vector<std::size_t>
epoch_permutation(std::size_t n, std::size_t epoch, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Xoshiro256 rng(hash_combine(seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

/**
 * @brief Distributed sampler.
 *
 * The epoch permutation is truncated to floor(n/N)*N entries and dealt
 * round-robin: worker w takes positions w, w+N, w+2N, ... All shards have
 * the same length; the n mod N tail is dropped for this epoch.
 */
[[nodiscard]] inline Shard shard(std::size_t n, std::size_t num_workers,
                                 std::size_t worker_id, std::size_t epoch,
                                 std::uint64_t seed) {
    if (num_workers < 1 || num_workers > n) {
        throw ConfigError("worker count " + std::to_string(num_workers) +
                          " must be in [1, n=" + std::to_string(n) + "]");
    }
    if (worker_id >= num_workers) {
        throw IndexError("worker id " + std::to_string(worker_id) +
                         " >= worker count " + std::to_string(num_workers));
    }
    const auto order = epoch_permutation(n, epoch, seed);
    const std::size_t per_worker = n / num_workers;
    Shard s{worker_id, num_workers, epoch, {}};
    s.indices.reserve(per_worker);
    for (std::size_t k = 0; k < per_worker; ++k) {
        s.indices.push_back(order[worker_id + k * num_workers]);
    }
    return s;
}

[[nodiscard]] inline Shard shard(const Dataset &ds, std::size_t num_workers,
                                 std::size_t worker_id, std::size_t epoch,
                                 std::uint64_t seed) {
    return shard(ds.size(), num_workers, worker_id, epoch, seed);
}

/// Contiguous chunks of the shard's indices; the last may be short.
/// The spans borrow from `s`.
[[nodiscard]] inline std::vector<std::span<const std::size_t>>
batches(const Shard &s, std::size_t batch_size) {
    if (batch_size < 1) {
        throw ConfigError("batch size must be >= 1");
    }
    std::vector<std::span<const std::size_t>> out;
    const std::span<const std::size_t> all(s.indices);
    for (std::size_t b = 0; b < all.size(); b += batch_size) {
        out.push_back(all.subspan(b, std::min(batch_size, all.size() - b)));
    }
    return out;
}

/// Fixed 80/20 train/validation split by seeded shuffle.
struct Split {
    Dataset train;
    Dataset validation;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> holdout_indices;
};

inline constexpr std::uint64_t split_stream = 0x5350'4C49'54ULL; // "SPLIT"

[[nodiscard]] inline Split split_train_val(const Dataset &ds,
                                           std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (n < 2) {
        throw InputError("need at least 2 samples to split train/validation");
    }
    const std::size_t n_val = std::max<std::size_t>(1, (n * 20 + 50) / 100);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Xoshiro256 rng(hash_combine(seed, split_stream));
    rng.shuffle(std::span<std::size_t>(order));

    Split out;
    out.holdout_indices.assign(order.begin(), order.begin() + n_val);
    out.train_indices.assign(order.begin() + n_val, order.end());
    out.train = ds.subset(out.train_indices);
    out.validation = ds.subset(out.holdout_indices);
    return out;
}

} // namespace hyqml::dataplane
