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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dataplane.hpp"
#include "ddp.hpp"
#include "error.hpp"
#include "hybridnet.hpp"
#include "latency.hpp"
#include "varcircuit.hpp"

namespace hyqml::bench {

/// Parameters of a generated dataset.
struct SyntheticSource {
    std::size_t n = 245;
    std::size_t dim = 512;
    std::size_t classes = 2;
    double margin = 3.0;
};

struct CsvSource {
    std::string path;
};

using DataSource = std::variant<SyntheticSource, CsvSource>;

/// One sweep point: everything needed to reproduce a training run.
struct RunConfig {
    std::string sweep = "single";
    varcircuit::CircuitSpec spec;
    hybridnet::TrainConfig train;
    ddp::Execution execution = ddp::Execution::threaded;
};

struct RunRecord {
    std::string sweep;
    std::size_t qubits = 0;
    std::size_t depth = 0;
    std::size_t epochs = 0;
    std::size_t workers = 0;
    std::size_t batch = 0;
    double eff_lr = 0.0;
    std::size_t n = 0;
    double seconds = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";
};

inline constexpr std::string_view run_csv_header =
    "sweep,qubits,depth,epochs,workers,batch,eff_lr,n,seconds,train_acc,"
    "val_acc,seed,status";

inline constexpr std::string_view latency_csv_header =
    "sweep,profile,n_train,qubits,depth,epochs,latency_s,queue_s,job_cap,"
    "jobs_per_epoch,total_jobs,epoch_seconds,projected_seconds,"
    "budget_seconds,feasible,first_failure_epoch";

inline void write_header(std::ostream &out) { out << run_csv_header << '\n'; }

inline void write_row(std::ostream &out, const RunRecord &r) {
    std::ostringstream s;
    s << std::setprecision(17);
    s << r.sweep << ',' << r.qubits << ',' << r.depth << ',' << r.epochs << ','
      << r.workers << ',' << r.batch << ',' << r.eff_lr << ',' << r.n << ','
      << std::setprecision(6) << r.seconds << std::setprecision(17) << ','
      << r.train_acc << ',' << r.val_acc << ',' << r.seed << ',' << r.status;
    out << s.str() << '\n';
    out.flush();
}

inline void write_latency_header(std::ostream &out) {
    out << latency_csv_header << '\n';
}

inline void write_latency_row(std::ostream &out,
                              const latency::FeasibilityReport &r,
                              const latency::BackendProfile &p) {
    out << "latency," << r.profile << ',' << r.n_train << ',' << r.spec.qubits
        << ',' << r.spec.depth << ',' << r.epochs << ',' << p.mean_job_latency
        << ',' << p.queue_overhead << ','
        << (p.job_cap ? std::to_string(*p.job_cap) : std::string{}) << ','
        << r.jobs_per_epoch << ',' << r.total_jobs << ',' << r.epoch_seconds
        << ',' << r.projected_seconds << ',' << r.budget_seconds << ','
        << (r.feasible ? 1 : 0) << ','
        << (r.first_failure_epoch ? std::to_string(*r.first_failure_epoch)
                                  : std::string{})
        << '\n';
}

/// Materialized data for a sweep: full set plus the fixed 80/20 split.
struct PreparedData {
    dataplane::Dataset full;
    dataplane::Split split;
};

[[nodiscard]] inline PreparedData prepare_data(const DataSource &source,
                                               std::uint64_t seed) {
    PreparedData out;
    if (const auto *syn = std::get_if<SyntheticSource>(&source)) {
        out.full = dataplane::generate_synthetic(syn->n, syn->dim,
                                                 syn->classes, syn->margin,
                                                 seed);
    } else {
        out.full = dataplane::load_csv(std::get<CsvSource>(source).path);
    }
    out.full.validate();
    out.split = dataplane::split_train_val(out.full, seed);
    return out;
}

inline constexpr std::uint64_t init_stream = 0x494E4954ULL; // "INIT"

/// Seed used for model initialization, derived from the run seed.
[[nodiscard]] inline std::uint64_t init_seed(std::uint64_t seed) {
    return hash_combine(seed, init_stream);
}

struct RunOutcome {
    RunRecord record;
    std::optional<ddp::TrainResult> result;
    std::string error;
};

/// One full training run. Errors become a failure-marked record.
[[nodiscard]] inline RunOutcome run_once(const RunConfig &cfg,
                                         const PreparedData &data) {
    RunOutcome out;
    RunRecord &r = out.record;
    r.sweep = cfg.sweep;
    r.qubits = cfg.spec.qubits;
    r.depth = cfg.spec.depth;
    r.epochs = cfg.train.epochs;
    r.workers = cfg.train.workers;
    r.batch = cfg.train.batch_size;
    r.n = data.full.size();
    r.seed = cfg.train.seed;
    try {
        r.eff_lr = ddp::scale_lr(cfg.train.base_lr, cfg.train.workers,
                                 cfg.train.lr_scaling);
        const auto model =
            hybridnet::init_model(cfg.spec, data.full.feature_dim(),
                                  data.full.num_classes,
                                  init_seed(cfg.train.seed));
        ddp::Options opts;
        opts.execution = cfg.execution;
        opts.check_replicas = false;
        auto result = ddp::train_distributed(model, data.split.train,
                                             data.split.validation, cfg.train,
                                             opts);
        r.seconds = result.train_seconds;
        r.train_acc = result.history.back().train_accuracy;
        r.val_acc = result.history.back().val_accuracy;
        out.result = std::move(result);
    } catch (const Error &e) {
        r.status = std::string("failed:") + e.kind();
        out.error = e.what();
    } catch (const std::bad_alloc &) {
        r.status = "failed:memory";
        out.error = "out of memory";
    }
    return out;
}

/// Runs each point in order, streaming one CSV row per point.
inline std::vector<RunRecord>
run_sweep(const std::vector<RunConfig> &points, const PreparedData &data,
          std::ostream *csv = nullptr,
          const std::function<void(const RunOutcome &)> &on_point = {}) {
    std::vector<RunRecord> records;
    for (const auto &p : points) {
        auto outcome = run_once(p, data);
        if (csv != nullptr) {
            write_row(*csv, outcome.record);
        }
        if (on_point) {
            on_point(outcome);
        }
        records.push_back(std::move(outcome.record));
    }
    return records;
}

[[nodiscard]] inline std::vector<RunConfig>
qubit_points(const std::vector<std::size_t> &qubits, const RunConfig &base) {
    std::vector<RunConfig> pts;
    for (auto q : qubits) {
        RunConfig c = base;
        c.sweep = "qubits";
        c.spec.qubits = q;
        pts.push_back(c);
    }
    return pts;
}

[[nodiscard]] inline std::vector<RunConfig>
epoch_points(const std::vector<std::size_t> &epochs, const RunConfig &base) {
    std::vector<RunConfig> pts;
    for (auto e : epochs) {
        RunConfig c = base;
        c.sweep = "epochs";
        c.train.epochs = e;
        pts.push_back(c);
    }
    return pts;
}

[[nodiscard]] inline std::vector<RunConfig>
worker_points(const std::vector<std::size_t> &workers, const RunConfig &base) {
    std::vector<RunConfig> pts;
    for (auto n : workers) {
        RunConfig c = base;
        c.sweep = "workers";
        c.train.workers = n;
        pts.push_back(c);
    }
    return pts;
}

inline std::vector<RunRecord>
sweep_qubits(const std::vector<std::size_t> &qubits, const RunConfig &base,
             const PreparedData &data, std::ostream *csv = nullptr) {
    return run_sweep(qubit_points(qubits, base), data, csv);
}

inline std::vector<RunRecord>
sweep_epochs(const std::vector<std::size_t> &epochs, const RunConfig &base,
             const PreparedData &data, std::ostream *csv = nullptr) {
    return run_sweep(epoch_points(epochs, base), data, csv);
}

inline std::vector<RunRecord>
sweep_workers(const std::vector<std::size_t> &workers, const RunConfig &base,
              const PreparedData &data, std::ostream *csv = nullptr) {
    return run_sweep(worker_points(workers, base), data, csv);
}

/// The default profile pair: an effective remote queue and a local
/// simulator.
[[nodiscard]] inline std::vector<latency::BackendProfile> default_profiles() {
    return {{"remote-queue", 1.3, 0.0, std::nullopt},
            {"local-simulator", 0.001, 0.0, std::nullopt}};
}

inline std::vector<latency::FeasibilityReport>
bench_latency(std::uint64_t n_train, const varcircuit::CircuitSpec &spec,
              std::uint64_t epochs,
              const std::vector<latency::BackendProfile> &profiles,
              double budget_seconds, std::ostream *csv = nullptr) {
    std::vector<latency::FeasibilityReport> out;
    for (const auto &p : profiles) {
        out.push_back(
            latency::feasibility_report(n_train, spec, epochs, p, budget_seconds));
        if (csv != nullptr) {
            write_latency_row(*csv, out.back(), p);
        }
    }
    return out;
}

/**
 * @brief Seconds per quantum_forward call, best of `trials`.
 *
 * Each trial repeats the circuit until at least `min_seconds` have passed.
 * Angles are fixed nonzero values so no gate degenerates to identity.
 */
[[nodiscard]] inline double time_circuit(const varcircuit::CircuitSpec &spec,
                                         int trials = 5,
                                         double min_seconds = 0.05) {
    using Clock = std::chrono::steady_clock;
    varcircuit::QuantumParams params(spec.depth, spec.qubits);
    for (std::size_t i = 0; i < params.data.size(); ++i) {
        params.data[i] = 0.1 + 0.01 * static_cast<double>(i);
    }
    std::vector<double> embed(spec.qubits);
    for (std::size_t i = 0; i < embed.size(); ++i) {
        embed[i] = 0.3 - 0.02 * static_cast<double>(i);
    }
    double best = std::numeric_limits<double>::infinity();
    volatile double sink = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::size_t reps = 0;
        const auto t0 = Clock::now();
        double elapsed = 0.0;
        do {
            sink = sink + varcircuit::quantum_forward(spec, params, embed)[0];
            ++reps;
            elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        } while (elapsed < min_seconds);
        best = std::min(best, elapsed / static_cast<double>(reps));
    }
    return best;
}

/// "<sweep>_<YYYYmmdd-HHMMSS>.csv" in local time.
[[nodiscard]] inline std::string default_output_name(const std::string &sweep) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    std::ostringstream s;
    s << sweep << '_' << std::put_time(&tm, "%Y%m%d-%H%M%S") << ".csv";
    return s.str();
}

} // namespace hyqml::bench
