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

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "error.hpp"
#include "varcircuit.hpp"

namespace hyqml::latency {

/// Remote backend cost model: every circuit run is one job.
struct BackendProfile {
    std::string name;
    double mean_job_latency = 0.0; ///< seconds
    double queue_overhead = 0.0;   ///< seconds per job
    /// Jobs accepted before the backend starts rejecting submissions.
    std::optional<std::uint64_t> job_cap;

    void validate() const {
        if (!(mean_job_latency >= 0.0) || !(queue_overhead >= 0.0) ||
            !std::isfinite(mean_job_latency) || !std::isfinite(queue_overhead)) {
            throw ConfigError("backend latencies must be finite and >= 0");
        }
    }
};

[[nodiscard]] inline std::uint64_t
jobs_per_epoch(std::uint64_t n_train, const varcircuit::CircuitSpec &spec) {
    if (n_train < 1) {
        throw ConfigError("n_train must be >= 1");
    }
    spec.validate();
    return n_train * varcircuit::circuit_evals_per_sample(spec);
}

[[nodiscard]] inline double epoch_wall_seconds(std::uint64_t jobs,
                                               const BackendProfile &profile) {
    profile.validate();
    return static_cast<double>(jobs) *
           (profile.mean_job_latency + profile.queue_overhead);
}

struct FeasibilityReport {
    std::string profile;
    std::uint64_t n_train = 0;
    varcircuit::CircuitSpec spec;
    std::uint64_t epochs = 0;
    std::uint64_t jobs_per_epoch = 0;
    std::uint64_t total_jobs = 0;
    double epoch_seconds = 0.0;
    double projected_seconds = 0.0;
    double budget_seconds = 0.0;
    bool feasible = false;
    /// 1-based epoch during which the job cap is exceeded.
    std::optional<std::uint64_t> first_failure_epoch;
};

[[nodiscard]] inline FeasibilityReport
feasibility_report(std::uint64_t n_train, const varcircuit::CircuitSpec &spec,
                   std::uint64_t epochs, const BackendProfile &profile,
                   double budget_seconds) {
    if (!(budget_seconds > 0.0)) {
        throw ConfigError("time budget must be > 0");
    }
    FeasibilityReport r;
    r.profile = profile.name;
    r.n_train = n_train;
    r.spec = spec;
    r.epochs = epochs;
    r.jobs_per_epoch = jobs_per_epoch(n_train, spec);
    r.total_jobs = r.jobs_per_epoch * epochs;
    r.epoch_seconds = epoch_wall_seconds(r.jobs_per_epoch, profile);
    r.projected_seconds = static_cast<double>(epochs) * r.epoch_seconds;
    r.budget_seconds = budget_seconds;
    bool within_cap = true;
    if (profile.job_cap && *profile.job_cap < r.total_jobs) {
        within_cap = false;
        // Epoch k (1-based) has submitted k * jobs_per_epoch jobs by its end.
        r.first_failure_epoch = *profile.job_cap / r.jobs_per_epoch + 1;
    }
    r.feasible = r.projected_seconds <= budget_seconds && within_cap;
    return r;
}

inline void print_report(std::ostream &out, const FeasibilityReport &r) {
    out << "backend " << r.profile << '\n'
        << "  circuit          q=" << r.spec.qubits << " d=" << r.spec.depth
        << '\n'
        << "  training samples " << r.n_train << '\n'
        << "  jobs per epoch   " << r.jobs_per_epoch << '\n'
        << "  epoch time       " << r.epoch_seconds << " s ("
        << r.epoch_seconds / 3600.0 << " h)\n"
        << "  projected total  " << r.projected_seconds << " s over "
        << r.epochs << " epochs (" << r.projected_seconds / 3600.0 << " h)\n"
        << "  budget           " << r.budget_seconds << " s\n";
    if (r.first_failure_epoch) {
        out << "  job cap hit in epoch " << *r.first_failure_epoch << '\n';
    }
    out << "  verdict          " << (r.feasible ? "feasible" : "infeasible")
        << '\n';
}

} // namespace hyqml::latency
