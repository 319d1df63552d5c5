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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dataplane.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "varcircuit.hpp"

namespace hyqml::hybridnet {

using varcircuit::CircuitSpec;

/// Every trainable block of the dressed network. Also used for gradients
/// and optimizer velocity, which share the same shapes.
struct Weights {
    Matrix pre_w;               ///< q x D
    std::vector<double> pre_b;  ///< q
    Matrix thetas;              ///< d x q
    Matrix post_w;              ///< C x q
    std::vector<double> post_b; ///< C

    static Weights zeros(const CircuitSpec &spec, std::size_t feature_dim,
                         std::size_t num_classes) {
        return {Matrix(spec.qubits, feature_dim),
                std::vector<double>(spec.qubits, 0.0),
                Matrix(spec.depth, spec.qubits),
                Matrix(num_classes, spec.qubits),
                std::vector<double>(num_classes, 0.0)};
    }

    [[nodiscard]] Weights zeros_like() const {
        Weights w = *this;
        for (auto b : w.blocks()) {
            std::fill(b.begin(), b.end(), 0.0);
        }
        return w;
    }

    /// Blocks in checkpoint order.
    std::array<std::span<double>, 5> blocks() {
        return {pre_w.data, pre_b, thetas.data, post_w.data, post_b};
    }
    [[nodiscard]] std::array<std::span<const double>, 5> blocks() const {
        return {pre_w.data, pre_b, thetas.data, post_w.data, post_b};
    }

    [[nodiscard]] std::size_t size() const noexcept {
        return pre_w.data.size() + pre_b.size() + thetas.data.size() +
               post_w.data.size() + post_b.size();
    }

    [[nodiscard]] bool all_finite() const {
        for (auto b : blocks()) {
            for (double v : b) {
                if (!std::isfinite(v)) {
                    return false;
                }
            }
        }
        return true;
    }

    [[nodiscard]] bool same_shape(const Weights &o) const noexcept {
        const auto a = blocks();
        const auto b = o.blocks();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].size() != b[i].size()) {
                return false;
            }
        }
        return pre_w.rows == o.pre_w.rows && thetas.rows == o.thetas.rows &&
               post_w.rows == o.post_w.rows;
    }

    bool operator==(const Weights &) const = default;
};

using Gradients = Weights;

struct HybridModel {
    CircuitSpec spec;
    std::size_t feature_dim = 0;
    std::size_t num_classes = 0;
    Weights weights;

    void validate() const {
        spec.validate();
        if (feature_dim < 1 || num_classes < 1) {
            throw ConfigError("feature_dim and num_classes must be >= 1");
        }
        if (!weights.same_shape(
                Weights::zeros(spec, feature_dim, num_classes))) {
            throw ConfigError("weight shapes inconsistent with spec (q=" +
                              std::to_string(spec.qubits) +
                              ", d=" + std::to_string(spec.depth) +
                              ", D=" + std::to_string(feature_dim) +
                              ", C=" + std::to_string(num_classes) + ")");
        }
        if (!weights.all_finite()) {
            throw NumericError("model weights contain non-finite values");
        }
    }

    bool operator==(const HybridModel &) const = default;
};

enum class LrScaling { linear, none };

/// Optimizer and data-parallel training knobs. Defaults: 30 epochs,
/// batch 4 per worker, SGD(lr 0.0004, momentum 0.9), one worker.
struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 4;
    double base_lr = 0.0004;
    double momentum = 0.9;
    std::size_t workers = 1;
    std::uint64_t seed = 1;
    LrScaling lr_scaling = LrScaling::linear;
    /// Multiply the learning rate by 0.1 every 10 epochs. Off by default.
    bool step_decay = false;

    void validate() const {
        if (epochs < 1) {
            throw ConfigError("epochs must be >= 1");
        }
        if (batch_size < 1) {
            throw ConfigError("batch size must be >= 1");
        }
        if (workers < 1) {
            throw ConfigError("worker count must be >= 1");
        }
        if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
            throw ConfigError("base learning rate must be finite and > 0");
        }
        if (!(momentum >= 0.0) || !std::isfinite(momentum)) {
            throw ConfigError("momentum must be finite and >= 0");
        }
    }
};

/**
 * @brief Seeded initialization.
 *
 * Linear layers (weights and biases) are uniform in +-1/sqrt(fan_in);
 * circuit angles are Normal(0, 0.01), so training starts close to the
 * identity circuit.
 */
[[nodiscard]] inline HybridModel init_model(const CircuitSpec &spec,
                                            std::size_t feature_dim,
                                            std::size_t num_classes,
                                            std::uint64_t seed) {
    spec.validate();
    HybridModel m{spec, feature_dim, num_classes,
                  Weights::zeros(spec, feature_dim, num_classes)};
    Xoshiro256 rng(seed);
    const double pre_bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    const double post_bound = 1.0 / std::sqrt(static_cast<double>(spec.qubits));
    for (auto &v : m.weights.pre_w.data) {
        v = rng.uniform(-pre_bound, pre_bound);
    }
    for (auto &v : m.weights.pre_b) {
        v = rng.uniform(-pre_bound, pre_bound);
    }
    for (auto &v : m.weights.thetas.data) {
        v = rng.normal(0.0, 0.01);
    }
    for (auto &v : m.weights.post_w.data) {
        v = rng.uniform(-post_bound, post_bound);
    }
    for (auto &v : m.weights.post_b) {
        v = rng.uniform(-post_bound, post_bound);
    }
    return m;
}

/// Intermediate values of one forward pass, kept for backward().
struct ForwardTrace {
    std::vector<double> pre;    ///< z = W1 x + b1
    std::vector<double> embed;  ///< (pi/2) tanh(z)
    std::vector<double> qout;   ///< <Z> per wire
    std::vector<double> logits; ///< W2 qout + b2
};

namespace detail {
inline void check_features(const HybridModel &model,
                           std::span<const double> features) {
    if (features.size() != model.feature_dim) {
        throw ConfigError("feature vector length " +
                          std::to_string(features.size()) +
                          " != model feature_dim " +
                          std::to_string(model.feature_dim));
    }
    for (double v : features) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite feature value");
        }
    }
}

inline ForwardTrace pre_stage(const HybridModel &model,
                              std::span<const double> features) {
    const auto &w = model.weights;
    const std::size_t q = model.spec.qubits;
    ForwardTrace t;
    t.pre.resize(q);
    affine(w.pre_w, features, w.pre_b, t.pre);
    t.embed.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
        t.embed[i] = std::numbers::pi / 2 * std::tanh(t.pre[i]);
    }
    return t;
}

inline void post_stage(const HybridModel &model, ForwardTrace &t) {
    t.logits.resize(model.num_classes);
    affine(model.weights.post_w, t.qout, model.weights.post_b, t.logits);
}
} // namespace detail

[[nodiscard]] inline ForwardTrace forward_trace(const HybridModel &model,
                                                std::span<const double> features) {
    model.validate();
    detail::check_features(model, features);
    ForwardTrace t = detail::pre_stage(model, features);
    t.qout = varcircuit::quantum_forward(model.spec, model.weights.thetas,
                                         t.embed);
    detail::post_stage(model, t);
    return t;
}

[[nodiscard]] inline std::vector<double>
forward(const HybridModel &model, std::span<const double> features) {
    return forward_trace(model, features).logits;
}

[[nodiscard]] inline std::vector<double>
softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto &v : p) {
        v /= sum;
    }
    return p;
}

/// -log softmax(logits)[label], via log-sum-exp with max subtraction.
[[nodiscard]] inline double loss_cross_entropy(std::span<const double> logits,
                                               std::size_t label) {
    if (label >= logits.size()) {
        throw InputError("label " + std::to_string(label) + " >= class count " +
                         std::to_string(logits.size()));
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) {
        sum += std::exp(l - mx);
    }
    return std::log(sum) + mx - logits[label];
}

struct SampleGradient {
    Gradients grads;
    double loss = 0.0;
};

/**
 * @brief Gradient of the cross-entropy loss for one sample.
 *
 * The circuit part uses parameter-shift Jacobians; everything else is the
 * analytic chain rule, with d(embed)/dz = (pi/2)(1 - tanh(z)^2).
 */
[[nodiscard]] inline SampleGradient
backward(const HybridModel &model, std::span<const double> features,
         std::size_t label) {
    model.validate();
    detail::check_features(model, features);
    if (label >= model.num_classes) {
        throw InputError("label " + std::to_string(label) +
                         " >= class count " +
                         std::to_string(model.num_classes));
    }
    const std::size_t q = model.spec.qubits;
    const std::size_t classes = model.num_classes;
    const auto &w = model.weights;

    ForwardTrace t = detail::pre_stage(model, features);
    auto jac = varcircuit::param_shift_grad(model.spec, w.thetas, t.embed);
    t.qout = std::move(jac.value);
    detail::post_stage(model, t);

    SampleGradient out{w.zeros_like(), loss_cross_entropy(t.logits, label)};
    Gradients &g = out.grads;

    auto dlogits = softmax(t.logits);
    dlogits[label] -= 1.0;

    std::vector<double> dq(q, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        g.post_b[c] = dlogits[c];
        for (std::size_t i = 0; i < q; ++i) {
            g.post_w(c, i) = dlogits[c] * t.qout[i];
            dq[i] += w.post_w(c, i) * dlogits[c];
        }
    }

    for (std::size_t p = 0; p < g.thetas.data.size(); ++p) {
        double acc = 0.0;
        for (std::size_t o = 0; o < q; ++o) {
            acc += dq[o] * jac.thetas(o, p);
        }
        g.thetas.data[p] = acc;
    }

    for (std::size_t j = 0; j < q; ++j) {
        double de = 0.0;
        for (std::size_t o = 0; o < q; ++o) {
            de += dq[o] * jac.embed(o, j);
        }
        const double th = std::tanh(t.pre[j]);
        const double dz = de * (std::numbers::pi / 2) * (1.0 - th * th);
        g.pre_b[j] = dz;
        auto row = g.pre_w.row(j);
        for (std::size_t k = 0; k < features.size(); ++k) {
            row[k] = dz * features[k];
        }
    }
    return out;
}

/// Mean gradient and mean loss over `indices` of `data`, summed in index
/// order.
[[nodiscard]] inline SampleGradient
batch_gradient(const HybridModel &model, const dataplane::Dataset &data,
               std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw InputError("empty batch");
    }
    SampleGradient acc{model.weights.zeros_like(), 0.0};
    for (std::size_t idx : indices) {
        const auto s = backward(model, data.sample(idx), data.labels[idx]);
        auto dst = acc.grads.blocks();
        const auto src = s.grads.blocks();
        for (std::size_t b = 0; b < dst.size(); ++b) {
            for (std::size_t i = 0; i < dst[b].size(); ++i) {
                dst[b][i] += src[b][i];
            }
        }
        acc.loss += s.loss;
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (auto b : acc.grads.blocks()) {
        for (auto &v : b) {
            v *= inv;
        }
    }
    acc.loss *= inv;
    return acc;
}

/// v <- momentum * v + g;  w <- w - lr * v.
inline void sgd_step(HybridModel &model, const Gradients &grads, double lr,
                     double momentum, Weights &velocity) {
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ConfigError("learning rate must be finite and > 0");
    }
    if (!grads.same_shape(model.weights) ||
        !velocity.same_shape(model.weights)) {
        throw ConfigError("gradient/velocity shapes do not match the model");
    }
    if (!grads.all_finite()) {
        throw NumericError("non-finite gradient; aborting training");
    }
    auto w = model.weights.blocks();
    auto v = velocity.blocks();
    const auto g = grads.blocks();
    for (std::size_t b = 0; b < w.size(); ++b) {
        for (std::size_t i = 0; i < w[b].size(); ++i) {
            v[b][i] = momentum * v[b][i] + g[b][i];
            w[b][i] -= lr * v[b][i];
        }
    }
}

/// Index of the largest logit; ties go to the lowest index.
[[nodiscard]] inline std::size_t argmax(std::span<const double> logits) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) {
            best = i;
        }
    }
    return best;
}

[[nodiscard]] inline double evaluate(const HybridModel &model,
                                     const dataplane::Dataset &data) {
    if (data.size() == 0) {
        throw InputError("cannot evaluate on an empty dataset");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (argmax(forward(model, data.sample(i))) == data.labels[i]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Checkpoint format: "HYQN1", then q, d, D, C as little-endian uint32,
// then pre_w, pre_b, thetas, post_w, post_b as little-endian float64,
// row-major.

inline constexpr std::string_view checkpoint_magic = "HYQN1";

namespace detail {
inline void put_u32(std::ostream &out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFU);
    }
    out.write(reinterpret_cast<const char *>(b), 4);
}

inline void put_f64(std::ostream &out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFU);
    }
    out.write(reinterpret_cast<const char *>(b), 8);
}

inline std::uint64_t get_le(std::istream &in, int nbytes) {
    unsigned char b[8] = {};
    if (!in.read(reinterpret_cast<char *>(b), nbytes)) {
        throw InputError("checkpoint truncated");
    }
    std::uint64_t v = 0;
    for (int i = nbytes - 1; i >= 0; --i) {
        v = (v << 8U) | b[i];
    }
    return v;
}
} // namespace detail

inline void save_checkpoint(const HybridModel &model, std::ostream &out) {
    model.validate();
    out.write(checkpoint_magic.data(),
              static_cast<std::streamsize>(checkpoint_magic.size()));
    detail::put_u32(out, static_cast<std::uint32_t>(model.spec.qubits));
    detail::put_u32(out, static_cast<std::uint32_t>(model.spec.depth));
    detail::put_u32(out, static_cast<std::uint32_t>(model.feature_dim));
    detail::put_u32(out, static_cast<std::uint32_t>(model.num_classes));
    for (auto block : model.weights.blocks()) {
        for (double v : block) {
            detail::put_f64(out, v);
        }
    }
}

[[nodiscard]] inline HybridModel load_checkpoint(std::istream &in) {
    char magic[5] = {};
    if (!in.read(magic, 5) ||
        std::string_view(magic, 5) != checkpoint_magic) {
        throw InputError("not a HYQN1 checkpoint");
    }
    HybridModel m;
    m.spec.qubits = detail::get_le(in, 4);
    m.spec.depth = detail::get_le(in, 4);
    m.feature_dim = detail::get_le(in, 4);
    m.num_classes = detail::get_le(in, 4);
    m.spec.validate();
    if (m.feature_dim < 1 || m.num_classes < 1) {
        throw InputError("checkpoint has empty feature or class dimension");
    }
    m.weights = Weights::zeros(m.spec, m.feature_dim, m.num_classes);
    for (auto block : m.weights.blocks()) {
        for (auto &v : block) {
            v = std::bit_cast<double>(detail::get_le(in, 8));
        }
    }
    m.validate();
    return m;
}

inline void save_checkpoint(const HybridModel &model, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write checkpoint '" + path + "'");
    }
    save_checkpoint(model, out);
}

[[nodiscard]] inline HybridModel load_checkpoint(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open checkpoint '" + path + "'");
    }
    return load_checkpoint(in);
}

} // namespace hyqml::hybridnet
