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

// Benchmark harness: qubit, epoch, worker and latency sweeps written as CSV.

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "hyqml/hyqml.hpp"

namespace {

using namespace hyqml;

std::vector<std::size_t> parse_list(const std::string &text,
                                    const std::string &flag) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok = text.substr(
            start, comma == std::string::npos ? std::string::npos
                                              : comma - start);
        std::size_t v = 0;
        const auto [ptr, ec] =
            std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
            throw ConfigError(flag + ": '" + tok + "' is not a count");
        }
        out.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::vector<double> parse_reals(const std::string &text,
                                const std::string &flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok = text.substr(
            start, comma == std::string::npos ? std::string::npos
                                              : comma - start);
        double v = 0.0;
        const auto [ptr, ec] =
            std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
            throw ConfigError(flag + ": '" + tok + "' is not a number");
        }
        out.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

bench::SyntheticSource parse_synthetic(const std::string &text) {
    const auto v = parse_reals(text, "--synthetic");
    if (v.size() != 4) {
        throw ConfigError("--synthetic expects n,D,C,margin");
    }
    for (int i = 0; i < 3; ++i) {
        if (v[i] < 1 || v[i] != std::floor(v[i])) {
            throw ConfigError("--synthetic n, D and C must be positive integers");
        }
    }
    return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
            static_cast<std::size_t>(v[2]), v[3]};
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Hybrid quantum-classical training benchmark harness"};

    std::string sweep = "qubits";
    std::string qubits_arg;
    std::size_t depth = 6;
    std::string epochs_arg;
    std::string workers_arg;
    std::size_t batch = 4;
    double lr = 0.0004;
    double momentum = 0.9;
    std::string lr_scaling = "linear";
    std::string dataset_path;
    std::string synthetic_arg;
    std::uint64_t seed = 1;
    std::string out_path;
    bool serial = false;
    bool step_decay = false;
    std::string latency_arg = "1.3,0.001";
    double queue = 0.0;
    std::uint64_t job_cap = 0;
    double budget = 24.0 * 3600.0;
    std::uint64_t n_train = 244;

    app.add_option("--sweep", sweep, "Sweep to run")
        ->check(CLI::IsMember({"qubits", "epochs", "workers", "latency"}));
    app.add_option("--qubits", qubits_arg,
                   "Qubit count or comma list (default 3..10 for the qubit "
                   "sweep, 4 otherwise)");
    app.add_option("--depth", depth, "Entangling layers")->capture_default_str();
    app.add_option("--epochs", epochs_arg,
                   "Epoch count or comma list (default 15,30,60,120 for the "
                   "epoch sweep, 30 otherwise)");
    app.add_option("--workers", workers_arg,
                   "Worker count or comma list (default 1,2,4,8 for the "
                   "worker sweep, 1 otherwise)");
    app.add_option("--batch-size", batch, "Per-worker batch size")
        ->capture_default_str();
    app.add_option("--lr", lr, "Base learning rate")->capture_default_str();
    app.add_option("--momentum", momentum, "SGD momentum")
        ->capture_default_str();
    app.add_option("--lr-scaling", lr_scaling, "Learning-rate scaling")
        ->check(CLI::IsMember({"linear", "none"}))
        ->capture_default_str();
    auto *ds_opt =
        app.add_option("--dataset", dataset_path, "CSV dataset (label,f1,...)");
    app.add_option("--synthetic", synthetic_arg,
                   "Synthetic dataset n,D,C,margin (default 245,512,2,3)")
        ->excludes(ds_opt);
    app.add_option("--seed", seed, "Seed for data, split, init and shuffles")
        ->capture_default_str();
    app.add_option("--out", out_path,
                   "Output CSV (default <sweep>_<timestamp>.csv)");
    app.add_flag("--serial", serial,
                 "Run the logical workers on one thread (same numbers)");
    app.add_flag("--step-decay", step_decay,
                 "Multiply the learning rate by 0.1 every 10 epochs");
    app.add_option("--latency", latency_arg,
                   "Latency sweep: per-job latencies in seconds")
        ->capture_default_str();
    app.add_option("--queue", queue, "Latency sweep: queue seconds per job")
        ->capture_default_str();
    app.add_option("--job-cap", job_cap,
                   "Latency sweep: jobs accepted before failures (0 = none)");
    app.add_option("--budget", budget, "Latency sweep: time budget in seconds")
        ->capture_default_str();
    app.add_option("--n-train", n_train, "Latency sweep: training samples")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (out_path.empty()) {
            out_path = bench::default_output_name(sweep);
        }
        std::ofstream csv(out_path);
        if (!csv) {
            throw InputError("cannot write '" + out_path + "'");
        }

        auto list_or = [](const std::string &arg, const std::string &flag,
                          std::vector<std::size_t> fallback) {
            return arg.empty() ? fallback : parse_list(arg, flag);
        };
        auto single = [](const std::vector<std::size_t> &v,
                         const std::string &flag) {
            if (v.size() != 1) {
                throw ConfigError(flag + " takes a single value for this sweep");
            }
            return v.front();
        };

        if (sweep == "latency") {
            varcircuit::CircuitSpec spec{
                single(list_or(qubits_arg, "--qubits", {4}), "--qubits"),
                depth};
            const auto epochs =
                single(list_or(epochs_arg, "--epochs", {30}), "--epochs");
            std::vector<latency::BackendProfile> profiles;
            for (double l : parse_reals(latency_arg, "--latency")) {
                std::ostringstream name;
                name << "latency-" << l << "s";
                latency::BackendProfile p{name.str(), l, queue, std::nullopt};
                if (job_cap > 0) {
                    p.job_cap = job_cap;
                }
                profiles.push_back(p);
            }
            bench::write_latency_header(csv);
            const auto reports = bench::bench_latency(n_train, spec, epochs,
                                                      profiles, budget, &csv);
            for (const auto &r : reports) {
                latency::print_report(std::cout, r);
            }
            std::cout << "wrote " << out_path << '\n';
            return 0;
        }

        bench::RunConfig base;
        base.spec.depth = depth;
        base.train.batch_size = batch;
        base.train.base_lr = lr;
        base.train.momentum = momentum;
        base.train.seed = seed;
        base.train.step_decay = step_decay;
        base.train.lr_scaling = lr_scaling == "linear"
                                    ? hybridnet::LrScaling::linear
                                    : hybridnet::LrScaling::none;
        base.execution =
            serial ? ddp::Execution::serial : ddp::Execution::threaded;

        const auto qubit_list = list_or(
            qubits_arg, "--qubits",
            sweep == "qubits" ? std::vector<std::size_t>{3, 4, 5, 6, 7, 8, 9, 10}
                              : std::vector<std::size_t>{4});
        const auto epoch_list = list_or(
            epochs_arg, "--epochs",
            sweep == "epochs" ? std::vector<std::size_t>{15, 30, 60, 120}
                              : std::vector<std::size_t>{30});
        const auto worker_list = list_or(
            workers_arg, "--workers",
            sweep == "workers" ? std::vector<std::size_t>{1, 2, 4, 8}
                               : std::vector<std::size_t>{1});

        std::vector<bench::RunConfig> points;
        if (sweep == "qubits") {
            base.train.epochs = single(epoch_list, "--epochs");
            base.train.workers = single(worker_list, "--workers");
            points = bench::qubit_points(qubit_list, base);
        } else if (sweep == "epochs") {
            base.spec.qubits = single(qubit_list, "--qubits");
            base.train.workers = single(worker_list, "--workers");
            points = bench::epoch_points(epoch_list, base);
        } else {
            base.spec.qubits = single(qubit_list, "--qubits");
            base.train.epochs = single(epoch_list, "--epochs");
            const unsigned hw = std::thread::hardware_concurrency();
            for (auto n : worker_list) {
                if (hw != 0 && n > hw) {
                    std::cerr << "warning: " << n << " workers exceed the "
                              << hw << " hardware threads\n";
                }
            }
            points = bench::worker_points(worker_list, base);
        }

        bench::DataSource source = bench::SyntheticSource{};
        if (!dataset_path.empty()) {
            source = bench::CsvSource{dataset_path};
        } else if (!synthetic_arg.empty()) {
            source = parse_synthetic(synthetic_arg);
        }
        const auto data = bench::prepare_data(source, seed);

        {
            std::ofstream holdout(out_path + ".holdout");
            for (auto i : data.split.holdout_indices) {
                holdout << i << '\n';
            }
        }

        bench::write_header(csv);
        bench::run_sweep(points, data, &csv, [](const bench::RunOutcome &o) {
            const auto &r = o.record;
            std::cout << r.sweep << " q=" << r.qubits << " d=" << r.depth
                      << " epochs=" << r.epochs << " N=" << r.workers
                      << " eff_lr=" << r.eff_lr << " : ";
            if (r.status == "ok") {
                std::cout << r.seconds << " s, train_acc=" << r.train_acc
                          << ", val_acc=" << r.val_acc << '\n';
            } else {
                std::cout << r.status << " (" << o.error << ")\n";
            }
        });
        std::cout << "wrote " << out_path << " (held-out indices in "
                  << out_path << ".holdout)\n";
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
