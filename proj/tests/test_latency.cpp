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

#include <catch_amalgamated.hpp>

#include <sstream>

#include "hyqml/dataplane.hpp"
#include "hyqml/hybridnet.hpp"
#include "hyqml/latency.hpp"

using namespace hyqml;
using namespace hyqml::latency;

TEST_CASE("Jobs per epoch", "[latency]") {
    REQUIRE(jobs_per_epoch(244, {4, 6}) == 13908);
    REQUIRE(jobs_per_epoch(1, {1, 0}) == 3);
    REQUIRE(jobs_per_epoch(488, {4, 6}) == 2 * jobs_per_epoch(244, {4, 6}));
    REQUIRE_THROWS_AS(jobs_per_epoch(0, {4, 6}), ConfigError);
}

TEST_CASE("Jobs per epoch matches an instrumented training epoch",
          "[latency]") {
    const auto ds = dataplane::generate_synthetic(20, 8, 2, 1.0, 2);
    auto model = hybridnet::init_model({2, 1}, 8, 2, 1);
    auto v = model.weights.zeros_like();
    varcircuit::reset_forward_invocations();
    const auto s = dataplane::shard(ds, 1, 0, 0, 1);
    for (const auto batch : dataplane::batches(s, 4)) {
        hybridnet::sgd_step(model,
                            hybridnet::batch_gradient(model, ds, batch).grads,
                            0.01, 0.9, v);
    }
    REQUIRE(varcircuit::forward_invocations() == jobs_per_epoch(20, {2, 1}));
}

TEST_CASE("Epoch wall seconds", "[latency]") {
    const BackendProfile remote{"remote", 1.3, 0.0, std::nullopt};
    const double t = epoch_wall_seconds(13908, remote);
    REQUIRE(t == Catch::Approx(18080.4));
    REQUIRE(t >= 18000.0);
    REQUIRE(t <= 19500.0);
    REQUIRE(epoch_wall_seconds(0, remote) == 0.0);
    REQUIRE(epoch_wall_seconds(13908, {"free", 0.0, 0.0, std::nullopt}) == 0.0);
    REQUIRE(epoch_wall_seconds(10, {"q", 1.0, 0.5, std::nullopt}) == 15.0);
    REQUIRE_THROWS_AS(epoch_wall_seconds(1, {"bad", -1.0, 0.0, std::nullopt}),
                      ConfigError);
}

TEST_CASE("Effective latency implied by the observed failure window",
          "[latency]") {
    // Failing 18,000-19,500 s into the first epoch of 13,908 jobs implies a
    // per-job latency inside the 1-5 s queue range.
    const double lo = 18000.0 / 13908.0;
    const double hi = 19500.0 / 13908.0;
    REQUIRE(lo >= 1.0);
    REQUIRE(hi <= 5.0);
    REQUIRE(1.3 >= lo);
    REQUIRE(1.3 <= hi);
}

TEST_CASE("Feasibility report", "[latency]") {
    const varcircuit::CircuitSpec spec{4, 6};
    const BackendProfile remote{"remote", 1.3, 0.0, std::nullopt};

    const auto r = feasibility_report(244, spec, 30, remote, 24 * 3600.0);
    REQUIRE_FALSE(r.feasible);
    REQUIRE(r.total_jobs == 30 * 13908);
    REQUIRE(r.projected_seconds == Catch::Approx(30 * 18080.4));
    REQUIRE(r.projected_seconds / 3600.0 == Catch::Approx(150.67).epsilon(1e-3));
    REQUIRE_FALSE(r.first_failure_epoch);

    const BackendProfile local{"local", 0.001, 0.0, std::nullopt};
    const auto l = feasibility_report(244, spec, 30, local, 3600.0);
    REQUIRE(l.feasible);
    REQUIRE(l.projected_seconds == Catch::Approx(417.24));

    BackendProfile capped = local;
    capped.job_cap = 5000;
    const auto c = feasibility_report(244, spec, 30, capped, 3600.0);
    REQUIRE_FALSE(c.feasible);
    REQUIRE(c.first_failure_epoch == 1);

    capped.job_cap = 2 * 13908;
    REQUIRE(feasibility_report(244, spec, 30, capped, 3600.0)
                .first_failure_epoch == 3);

    REQUIRE_THROWS_AS(feasibility_report(244, spec, 30, local, 0.0),
                      ConfigError);

    std::ostringstream text;
    print_report(text, r);
    REQUIRE_THAT(text.str(), Catch::Matchers::ContainsSubstring("infeasible"));
}

TEST_CASE("Projected time is monotone", "[latency]") {
    const BackendProfile p{"p", 0.5, 0.1, std::nullopt};
    const auto base = feasibility_report(100, {3, 2}, 5, p, 1.0);
    REQUIRE(feasibility_report(101, {3, 2}, 5, p, 1.0).projected_seconds >=
            base.projected_seconds);
    REQUIRE(feasibility_report(100, {4, 2}, 5, p, 1.0).projected_seconds >=
            base.projected_seconds);
    REQUIRE(feasibility_report(100, {3, 3}, 5, p, 1.0).projected_seconds >=
            base.projected_seconds);
    REQUIRE(feasibility_report(100, {3, 2}, 6, p, 1.0).projected_seconds >=
            base.projected_seconds);
    const BackendProfile slower{"p", 0.6, 0.1, std::nullopt};
    REQUIRE(feasibility_report(100, {3, 2}, 5, slower, 1.0).projected_seconds >=
            base.projected_seconds);
}
