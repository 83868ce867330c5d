#pragma once

// Repeated-run driver: methods x epsilons x runs on one fixed instance.
//
// "Iterations" counts cycles for Method 1 (cyclic/permuted) and single prox
// steps for Method 2. The trajectory of a seeded run does not depend on the
// stopping threshold, so each (method, run) pair is executed once with the
// tightest epsilon and the looser thresholds are read off the same trace at
// their first crossing; the result is identical to separate runs.

#include "proxsplit/bench.hpp"
#include "proxsplit/io.hpp"
#include "proxsplit/methods.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace proxsplit {

struct ExperimentConfig {
    std::vector<Method> methods{Method::Cyclic, Method::Stochastic};
    Schedule schedule{1.0, 1.0};
    std::vector<double> epsilons{1e-10};
    std::size_t runs = 30;
    std::uint64_t base_seed = 1;
    std::uint64_t max_outer = 100000;
    std::optional<std::filesystem::path> out_dir;
    std::size_t trace_runs = static_cast<std::size_t>(-1);  // persist traces of the first trace_runs runs
    std::size_t threads = 0;                                // 0: PROXSPLIT_THREADS or hardware concurrency
    TimingMode timing = TimingMode::Sidecar;
    bool force = false;
};

struct ExperimentResult {
    std::vector<SummaryRow> rows;
    bool complete = true;
    std::string error;
};

/// Sampler/permutation seed of repetition `run`.
inline std::uint64_t run_seed(std::uint64_t base, std::size_t run) { return CounterRng::derive(base, run); }

inline std::size_t default_thread_count() {
    if (const char* env = std::getenv("PROXSPLIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Number of records up to and including the first step at or below eps
/// (all records when none qualifies).
inline std::size_t iterations_to(const Trace& t, double eps) {
    for (std::size_t i = 0; i < t.records.size(); ++i)
        if (t.records[i].step_norm <= eps) return i + 1;
    return t.records.size();
}

inline Trace run_method(const Problem& p, Method m, const Schedule& sched, std::uint64_t seed,
                        const StoppingRule& stop, const RunOptions& opt) {
    switch (m) {
        case Method::Cyclic: return run_cyclic(p, sched, stop, opt);
        case Method::Permuted: return run_permuted(p, sched, PermutationSource::random(seed), stop, opt);
        case Method::Stochastic: return run_stochastic(p, sched, IndexSampler(seed, p.size()), stop, opt);
    }
    throw std::invalid_argument("run_method: unknown method");
}

inline std::string trace_file_name(Method m, double eps, std::size_t run) {
    return std::string("trace_") + to_string(m) + "_eps" + format_short(eps) + "_run" + std::to_string(run) + ".csv";
}

inline ExperimentResult run_experiment(const Problem& p, const ExperimentConfig& cfg,
                                       const std::optional<Vector>& oracle = std::nullopt) {
    detail::require(cfg.runs >= 1, "run_experiment: runs must be at least 1");
    detail::require(!cfg.methods.empty() && !cfg.epsilons.empty(), "run_experiment: needs methods and epsilons");
    for (const double e : cfg.epsilons) detail::require(e > 0.0, "run_experiment: epsilons must be positive");
    const double tightest = *std::min_element(cfg.epsilons.begin(), cfg.epsilons.end());
    const StoppingRule stop = make_stopping_rule(tightest, cfg.max_outer);
    validate_schedule(p, cfg.schedule, stop, cfg.force);

    struct Outcome {
        bool done = false;
        std::vector<std::size_t> iters;
        std::vector<double> cpu;
    };
    const std::size_t jobs = cfg.methods.size() * cfg.runs;
    std::vector<Outcome> outcomes(jobs);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mu;
    std::string error;

    const auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs || failed.load()) return;
            const Method m = cfg.methods[j / cfg.runs];
            const std::size_t run = j % cfg.runs;
            try {
                RunOptions opt;
                opt.oracle = oracle;
                opt.force = cfg.force;
                const Trace t = run_method(p, m, cfg.schedule, run_seed(cfg.base_seed, run), stop, opt);
                Outcome& o = outcomes[j];
                for (const double eps : cfg.epsilons) {
                    const std::size_t it = iterations_to(t, eps);
                    o.iters.push_back(it);
                    o.cpu.push_back(it ? t.records[it - 1].elapsed_ms : 0.0);
                    if (cfg.out_dir && run < cfg.trace_runs)
                        write_trace(*cfg.out_dir / trace_file_name(m, eps, run), t, it, cfg.timing);
                }
                o.done = true;
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mu);
                if (!failed.exchange(true))
                    error = std::string(to_string(m)) + " run " + std::to_string(run) + ": " + e.what();
            }
        }
    };

    const std::size_t nthreads = std::min(jobs, cfg.threads ? cfg.threads : default_thread_count());
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Aggregate in (method, run) order so the output does not depend on scheduling.
    ExperimentResult res;
    res.complete = !failed.load();
    res.error = error;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
        for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
            SummaryRow row{cfg.methods[mi], p.dim(), cfg.epsilons[ei], 0, 0.0, 0.0};
            for (std::size_t run = 0; run < cfg.runs; ++run) {
                const Outcome& o = outcomes[mi * cfg.runs + run];
                if (!o.done) continue;
                ++row.runs;
                row.avg_iterations += static_cast<double>(o.iters[ei]);
                row.avg_cpu_ms += o.cpu[ei];
            }
            if (row.runs == 0) continue;
            row.avg_iterations /= static_cast<double>(row.runs);
            row.avg_cpu_ms /= static_cast<double>(row.runs);
            res.rows.push_back(row);
        }

    if (cfg.out_dir) {
        write_summary(*cfg.out_dir / "summary.csv", res.rows, cfg.timing);
        std::string meta = "complete " + std::string(res.complete ? "true" : "false") + "\n" +
                           "iterations cycles for cyclic/permuted, prox steps for stochastic\n" +
                           "schedule c=" + format_real(cfg.schedule.c) + " p=" + format_real(cfg.schedule.p) + "\n" +
                           "max_outer " + std::to_string(cfg.max_outer) + "\n" + "base_seed " +
                           std::to_string(cfg.base_seed) + "\n";
        if (!res.complete) meta += "error " + res.error + "\n";
        write_text_file(*cfg.out_dir / "summary.meta.txt", meta);
    }
    return res;
}

}  // namespace proxsplit
