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
#include <atomic>
#include <condition_variable>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dataplane.hpp"
#include "error.hpp"
#include "hybridnet.hpp"

namespace hyqml::ddp {

using hybridnet::Gradients;
using hybridnet::HybridModel;
using hybridnet::LrScaling;
using hybridnet::TrainConfig;

/// Per-worker batch times worker count.
[[nodiscard]] inline std::size_t effective_batch_size(std::size_t per_worker,
                                                      std::size_t workers) {
    if (per_worker < 1 || workers < 1) {
        throw ConfigError("batch size and worker count must be >= 1");
    }
    return per_worker * workers;
}

[[nodiscard]] inline double scale_lr(double base_lr, std::size_t workers,
                                     LrScaling mode) {
    if (!(base_lr > 0.0)) {
        throw ConfigError("base learning rate must be > 0");
    }
    return mode == LrScaling::linear
               ? base_lr * static_cast<double>(workers)
               : base_lr;
}

/**
 * @brief Fixed pairwise reduction tree over ascending worker ids.
 *
 * Round r adds slot i + 2^r into slot i for every i divisible by 2^(r+1).
 * The order is fixed before any worker runs, so the result never depends
 * on thread scheduling.
 */
struct ReduceTopology {
    std::size_t num_workers = 1;

    template <class AddFn> void reduce(AddFn &&add_into) const {
        for (std::size_t stride = 1; stride < num_workers; stride *= 2) {
            for (std::size_t i = 0; i + stride < num_workers;
                 i += 2 * stride) {
                add_into(i, i + stride);
            }
        }
    }
};

/// Elementwise mean of N same-shaped gradient sets, summed in tree order.
[[nodiscard]] inline Gradients
allreduce_mean(std::span<const Gradients> per_worker) {
    if (per_worker.empty()) {
        throw ConfigError("allreduce over zero workers");
    }
    for (std::size_t w = 1; w < per_worker.size(); ++w) {
        if (!per_worker[w].same_shape(per_worker[0])) {
            throw TrainingAborted("gradient shape mismatch in allreduce", w);
        }
    }
    std::vector<Gradients> slots(per_worker.begin(), per_worker.end());
    ReduceTopology{slots.size()}.reduce([&](std::size_t dst, std::size_t src) {
        auto d = slots[dst].blocks();
        const auto s = std::as_const(slots[src]).blocks();
        for (std::size_t b = 0; b < d.size(); ++b) {
            for (std::size_t i = 0; i < d[b].size(); ++i) {
                d[b][i] += s[b][i];
            }
        }
    });
    const double inv = 1.0 / static_cast<double>(slots.size());
    for (auto b : slots[0].blocks()) {
        for (auto &v : b) {
            v *= inv;
        }
    }
    return std::move(slots[0]);
}

[[nodiscard]] inline double allreduce_mean(std::span<const double> values) {
    std::vector<double> slots(values.begin(), values.end());
    ReduceTopology{slots.size()}.reduce(
        [&](std::size_t dst, std::size_t src) { slots[dst] += slots[src]; });
    return slots[0] / static_cast<double>(slots.size());
}

struct EpochMetrics {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double wall_seconds = 0.0;
};

enum class Execution { threaded, serial };

struct Options {
    Execution execution = Execution::threaded;
    /// Compare every replica against replica 0 after each optimizer step.
    bool check_replicas = true;
    /// Called by each worker after computing its local gradient; throwing
    /// from it simulates a worker crash.
    std::function<void(std::size_t worker, std::size_t step)> fault_hook;
    /// Invoked once per optimizer step with the reduced gradient, from a
    /// single thread.
    std::function<void(std::size_t step, const Gradients &)> step_observer;
};

struct TrainResult {
    HybridModel model;
    std::vector<EpochMetrics> history;
    double effective_lr = 0.0;
    std::size_t steps = 0;
    /// Largest |replica_w - replica_0| seen after any step (0 when replicas
    /// stayed bit-identical, or when checking was disabled).
    double max_replica_divergence = 0.0;
    /// Sum of per-epoch wall seconds.
    double train_seconds = 0.0;
};

namespace detail {

inline double replica_divergence(std::span<const HybridModel> replicas) {
    double worst = 0.0;
    const auto ref = replicas[0].weights.blocks();
    for (std::size_t w = 1; w < replicas.size(); ++w) {
        const auto other = replicas[w].weights.blocks();
        for (std::size_t b = 0; b < ref.size(); ++b) {
            for (std::size_t i = 0; i < ref[b].size(); ++i) {
                const double d = std::abs(other[b][i] - ref[b][i]);
                // NaN-safe: a NaN difference counts as divergence.
                if (!(d <= worst)) {
                    worst = std::isnan(d) ? INFINITY : d;
                }
            }
        }
    }
    return worst;
}

/// Reusable barrier; the last thread to arrive runs `on_complete` before
/// anyone is released.
class PhaseBarrier {
public:
    PhaseBarrier(std::size_t count, std::function<void()> on_complete)
        : expected_(count), on_complete_(std::move(on_complete)) {}

    void arrive_and_wait() {
        std::unique_lock lock(mutex_);
        const std::uint64_t phase = phase_;
        if (++arrived_ == expected_) {
            on_complete_();
            arrived_ = 0;
            ++phase_;
            lock.unlock();
            cv_.notify_all();
            return;
        }
        cv_.wait(lock, [&] { return phase_ != phase; });
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t expected_;
    std::size_t arrived_ = 0;
    std::uint64_t phase_ = 0;
    std::function<void()> on_complete_;
};

// Shared state of one training run. Workers write only their own slots;
// the reducer writes `reduced`/`step_loss` between the two barriers.
struct Engine {
    const dataplane::Dataset &train;
    const dataplane::Dataset &validation;
    const TrainConfig &config;
    const Options &options;
    std::size_t workers;
    double lr;

    std::vector<HybridModel> replicas;
    std::vector<hybridnet::Weights> velocity;
    std::vector<Gradients> local;
    std::vector<double> local_loss;
    Gradients reduced;
    double step_loss = 0.0;
    std::size_t step = 0;
    double epoch_loss_sum = 0.0;
    std::size_t epoch_steps = 0;
    double divergence = 0.0;

    std::atomic<bool> aborted{false};
    // Written only by barrier completions, so every worker reads the same
    // value for a given phase.
    bool halted = false;
    std::mutex failure_mutex;
    std::size_t failed_worker = 0;
    std::string failure;

    Engine(const HybridModel &model, const dataplane::Dataset &tr,
           const dataplane::Dataset &val, const TrainConfig &cfg,
           const Options &opts)
        : train(tr), validation(val), config(cfg), options(opts),
          workers(cfg.workers),
          lr(scale_lr(cfg.base_lr, cfg.workers, cfg.lr_scaling)),
          replicas(cfg.workers, model),
          velocity(cfg.workers, model.weights.zeros_like()),
          local(cfg.workers, model.weights.zeros_like()),
          local_loss(cfg.workers, 0.0), reduced(model.weights.zeros_like()) {}

    double lr_for_epoch(std::size_t epoch) const {
        return config.step_decay ? lr * std::pow(0.1, epoch / 10) : lr;
    }

    void fail(std::size_t worker, const std::string &what) {
        std::lock_guard lock(failure_mutex);
        if (!aborted.load()) {
            failed_worker = worker;
            failure = what;
            aborted.store(true);
        }
    }

    // Local phase for one worker. Returns false if the worker failed.
    bool compute_local(std::size_t w, std::span<const std::size_t> batch) {
        try {
            auto g = hybridnet::batch_gradient(replicas[w], train, batch);
            local[w] = std::move(g.grads);
            local_loss[w] = g.loss;
            if (options.fault_hook) {
                options.fault_hook(w, step);
            }
            return true;
        } catch (const std::exception &e) {
            fail(w, e.what());
            return false;
        }
    }

    void reduce() noexcept {
        if (aborted.load()) {
            halted = true;
            return;
        }
        try {
            reduced = allreduce_mean(local);
            step_loss = allreduce_mean(local_loss);
            if (!reduced.all_finite()) {
                fail(0, "non-finite gradient after allreduce at step " +
                            std::to_string(step));
            } else if (options.step_observer) {
                options.step_observer(step, reduced);
            }
        } catch (const TrainingAborted &e) {
            fail(e.worker(), e.what());
        } catch (const std::exception &e) {
            fail(0, e.what());
        }
        halted = aborted.load();
    }

    void apply(std::size_t w, std::size_t epoch) {
        hybridnet::sgd_step(replicas[w], reduced, lr_for_epoch(epoch),
                            config.momentum, velocity[w]);
    }

    void after_step() noexcept {
        if (aborted.load()) {
            halted = true;
            return;
        }
        if (options.check_replicas) {
            divergence = std::max(divergence, replica_divergence(replicas));
        }
        epoch_loss_sum += step_loss;
        ++epoch_steps;
        ++step;
    }

    EpochMetrics finish_epoch(std::size_t epoch, double seconds_so_far) {
        EpochMetrics m;
        m.epoch = epoch;
        m.mean_loss = epoch_steps > 0
                          ? epoch_loss_sum / static_cast<double>(epoch_steps)
                          : 0.0;
        m.train_accuracy = hybridnet::evaluate(replicas[0], train);
        m.val_accuracy = hybridnet::evaluate(replicas[0], validation);
        m.wall_seconds = seconds_so_far;
        epoch_loss_sum = 0.0;
        epoch_steps = 0;
        return m;
    }
};

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace detail

/**
 * @brief Lockstep data-parallel training.
 *
 * Every epoch each worker takes its shard of `train`, walks its batches in
 * lockstep with the others, computes a local mean gradient per batch, and
 * waits at the pre-reduce barrier. The reducer averages the local gradients
 * in ReduceTopology order; every worker then applies the same SGD update to
 * its own replica and waits at the post-update barrier. Epoch metrics come
 * from replica 0 evaluated on the full train and validation sets.
 *
 * Execution::serial runs the N logical workers on the calling thread and
 * produces bit-identical results.
 */
[[nodiscard]] inline TrainResult
train_distributed(const HybridModel &model, const dataplane::Dataset &train,
                  const dataplane::Dataset &validation,
                  const TrainConfig &config, const Options &options = {}) {
    config.validate();
    model.validate();
    train.validate();
    validation.validate();
    if (train.feature_dim() != model.feature_dim ||
        validation.feature_dim() != model.feature_dim) {
        throw ConfigError("dataset feature dimension does not match model");
    }
    if (train.num_classes > model.num_classes ||
        validation.num_classes > model.num_classes) {
        throw ConfigError("dataset has more classes than the model outputs");
    }
    if (config.workers > train.size()) {
        throw ConfigError("worker count " + std::to_string(config.workers) +
                          " exceeds training set size " +
                          std::to_string(train.size()));
    }

    const std::size_t n_workers = config.workers;
    detail::Engine eng(model, train, validation, config, options);
    TrainResult result;
    result.effective_lr = eng.lr;

    auto shard_batches = [&](std::size_t w, std::size_t epoch,
                             dataplane::Shard &shard_out) {
        shard_out = dataplane::shard(train, n_workers, w, epoch, config.seed);
        return dataplane::batches(shard_out, config.batch_size);
    };

    if (options.execution == Execution::serial) {
        std::vector<dataplane::Shard> shards(n_workers);
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            const auto t0 = detail::Clock::now();
            std::vector<std::vector<std::span<const std::size_t>>> per_worker;
            for (std::size_t w = 0; w < n_workers; ++w) {
                per_worker.push_back(shard_batches(w, epoch, shards[w]));
            }
            for (std::size_t k = 0; k < per_worker[0].size(); ++k) {
                for (std::size_t w = 0; w < n_workers; ++w) {
                    if (!eng.compute_local(w, per_worker[w][k])) {
                        break;
                    }
                }
                eng.reduce();
                if (eng.aborted.load()) {
                    throw TrainingAborted(eng.failure, eng.failed_worker);
                }
                for (std::size_t w = 0; w < n_workers; ++w) {
                    try {
                        eng.apply(w, epoch);
                    } catch (const std::exception &e) {
                        eng.fail(w, e.what());
                        break;
                    }
                }
                eng.after_step();
                if (eng.aborted.load()) {
                    throw TrainingAborted(eng.failure, eng.failed_worker);
                }
            }
            result.history.push_back(
                eng.finish_epoch(epoch, detail::seconds_since(t0)));
        }
    } else {
        detail::PhaseBarrier pre_reduce(n_workers, [&eng] { eng.reduce(); });
        detail::PhaseBarrier post_update(n_workers,
                                         [&eng] { eng.after_step(); });

        // A failing worker records the failure and still arrives, so the
        // phase completes and every worker sees the abort flag.
        auto worker_main = [&](std::size_t w) {
            dataplane::Shard shard;
            for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
                const auto t0 = detail::Clock::now();
                std::vector<std::span<const std::size_t>> my_batches;
                try {
                    my_batches = shard_batches(w, epoch, shard);
                } catch (const std::exception &e) {
                    eng.fail(w, e.what());
                    pre_reduce.arrive_and_wait();
                    return;
                }
                for (const auto batch : my_batches) {
                    (void)eng.compute_local(w, batch);
                    pre_reduce.arrive_and_wait();
                    if (eng.halted) {
                        return;
                    }
                    try {
                        eng.apply(w, epoch);
                    } catch (const std::exception &e) {
                        eng.fail(w, e.what());
                    }
                    post_update.arrive_and_wait();
                    if (eng.halted) {
                        return;
                    }
                }
                if (w == 0) {
                    result.history.push_back(
                        eng.finish_epoch(epoch, detail::seconds_since(t0)));
                }
            }
        };

        std::vector<std::jthread> threads;
        threads.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            threads.emplace_back(worker_main, w);
        }
        threads.clear();
        if (eng.aborted.load()) {
            throw TrainingAborted(eng.failure, eng.failed_worker);
        }
    }

    result.steps = eng.step;
    result.max_replica_divergence = eng.divergence;
    for (const auto &m : result.history) {
        result.train_seconds += m.wall_seconds;
    }
    result.model = std::move(eng.replicas[0]);
    return result;
}

} // namespace hyqml::ddp
