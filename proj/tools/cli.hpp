#pragma once

// proxsplit command line: gen | run | bench | check.
//
// Exit codes: 0 success, 1 check violations, 2 non-convergence,
// 3 configuration/usage error, 4 I/O error.

#include "proxsplit/proxsplit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace proxsplit::cli {

enum ExitCode : int { kOk = 0, kViolations = 1, kNotConverged = 2, kConfig = 3, kIo = 4 };

namespace fs = std::filesystem;

/// Where a command gets its problem: an instance file, or (n, seed) for the
/// generated family.
struct InstanceSource {
    std::string path;
    Index n = 0;
    std::uint64_t seed = 0;
    double eigen_shift = 0.3;

    void add_to(CLI::App& app, const std::string& seed_flag) {
        app.add_option("--instance", path, "Instance file written by `gen`");
        app.add_option("--n", n, "Dimension of a generated instance (>= 2)")->check(CLI::Range(Index{2}, Index{100000}));
        app.add_option(seed_flag, seed, "Seed of a generated instance");
    }

    LoadedInstance load() const {
        if (!path.empty()) return load_instance(path);
        if (n < 2) throw std::invalid_argument("either --instance or --n >= 2 is required");
        return LoadedInstance{gen_instance({n, seed, eigen_shift}), InstanceMeta{seed, eigen_shift}};
    }
};

struct RunFlags {
    double eps = 1e-8;
    double beta0 = 1.0;
    double p = 1.0;
    std::uint64_t max_outer = 100000;
    bool force = false;
    bool inline_timings = false;

    void add_to(CLI::App& app) {
        app.add_option("--eps", eps, "Stopping threshold on ||x_{k+1} - x_k||")->check(CLI::PositiveNumber);
        app.add_option("--beta0", beta0, "Stepsize scale c in beta_k = c/(k+1)^p")->check(CLI::PositiveNumber);
        app.add_option("--p", p, "Stepsize exponent in (1/2, 1]")->check(CLI::Range(0.5, 1.0));
        app.add_option("--max-outer", max_outer, "Cap on cycles (Method 1) or steps (Method 2)")
            ->check(CLI::PositiveNumber);
        app.add_flag("--force", force, "Run even if the stepsize drops below a certified minimum");
        app.add_flag("--inline-timings", inline_timings, "Write timings into the CSV bodies instead of sidecars");
    }

    TimingMode timing() const { return inline_timings ? TimingMode::Inline : TimingMode::Sidecar; }
};

inline std::optional<OracleSolution> try_oracle(const Problem& p) {
    try {
        return oracle_minimize(p);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::string iterates_csv(const Trace& t) {
    std::string s;
    if (!t.iterates) return s;
    for (const auto& x : *t.iterates) {
        for (Index i = 0; i < x.size(); ++i) {
            if (i) s += ',';
            s += format_real(x[i]);
        }
        s += '\n';
    }
    return s;
}

inline nlohmann::ordered_json to_json(const InequalityReport& r) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    j["worstSlack"] = r.samples ? r.worst_slack : 0.0;
    j["tolerance"] = r.tolerance;
    return j;
}

inline const std::vector<std::string>& all_suites() {
    static const std::vector<std::string> s{"lemma",           "cycle",      "stepbound", "stochastic",
                                            "supermartingale", "proxoracle", "firmnonexp"};
    return s;
}

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

inline int cmd_gen(const InstanceSource& src, const std::string& out_dir, Streams io) {
    const Problem p = gen_instance({src.n, src.seed, src.eigen_shift});
    const fs::path path = fs::path(out_dir) / ("instance-n" + std::to_string(src.n) + "-seed" + std::to_string(src.seed) + ".txt");
    save_instance(path, p, InstanceMeta{src.seed, src.eigen_shift});
    io.out << "wrote " << path.string() << "\n";
    io.out << "strong convexity certificate (min Hessian eigenvalue): " << format_real(strong_convexity_certificate(p))
           << "\n";
    io.out << "lipschitz " << format_real(p.lipschitz()) << "\n";
    return kOk;
}

inline int cmd_run(const InstanceSource& src, const RunFlags& rf, Method method, std::uint64_t seed, bool retain,
                   const std::string& out_dir, Streams io) {
    const LoadedInstance inst = src.load();
    const Problem& p = inst.problem;
    const Schedule sched = make_schedule(rf.beta0, rf.p);
    const StoppingRule stop = make_stopping_rule(rf.eps, rf.max_outer);
    const auto oracle = try_oracle(p);

    RunOptions opt;
    opt.retain_iterates = retain;
    opt.force = rf.force;
    if (oracle) opt.oracle = oracle->x_star;
    const Trace t = run_method(p, method, sched, seed, stop, opt);

    const fs::path dir(out_dir);
    write_trace(dir / "trace.csv", t, rf.timing());
    if (retain) write_text_file(dir / "iterates.csv", iterates_csv(t));

    io.out << "method " << to_string(method) << " (iterations count "
           << (method == Method::Stochastic ? "prox steps" : "cycles") << ")\n";
    io.out << "iterations " << t.iterations() << "\n";
    io.out << "final f " << format_real(t.final_value) << "\n";
    if (oracle) io.out << "f - f* " << format_real(t.final_value - oracle->f_star) << "\n";
    io.out << "elapsed_ms " << format_short(t.records.empty() ? 0.0 : t.records.back().elapsed_ms) << "\n";
    io.out << "terminated " << (t.terminated == Termination::EpsilonReached ? "epsilon" : "max-iterations") << "\n";
    if (t.below_certified_beta) io.err << "warning: some steps used beta below a component's certified minimum\n";
    return t.terminated == Termination::EpsilonReached ? kOk : kNotConverged;
}

inline int cmd_bench(const InstanceSource& src, const RunFlags& rf, const std::vector<std::string>& methods,
                     const std::vector<double>& epsilons, std::size_t runs, std::uint64_t seed,
                     std::size_t trace_runs, const std::string& out_dir, Streams io) {
    const LoadedInstance inst = src.load();
    const Problem& p = inst.problem;
    ExperimentConfig cfg;
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
    cfg.schedule = make_schedule(rf.beta0, rf.p);
    cfg.epsilons = epsilons;
    cfg.runs = runs;
    cfg.base_seed = seed;
    cfg.max_outer = rf.max_outer;
    cfg.out_dir = fs::path(out_dir);
    cfg.trace_runs = trace_runs;
    cfg.timing = rf.timing();
    cfg.force = rf.force;
    const auto oracle = try_oracle(p);
    const auto res = run_experiment(p, cfg, oracle ? std::optional<Vector>(oracle->x_star) : std::nullopt);

    io.out << "Average iterations and CPU time over " << runs << " runs, n = " << p.dim()
           << " (iterations: cycles for cyclic/permuted, prox steps for stochastic)\n";
    io.out << std::left << std::setw(12) << "method" << std::setw(10) << "epsilon" << std::setw(8) << "runs"
           << std::setw(18) << "avg_iterations" << "avg_cpu_ms\n";
    for (const auto& r : res.rows)
        io.out << std::left << std::setw(12) << to_string(r.method) << std::setw(10) << format_short(r.epsilon)
               << std::setw(8) << r.runs << std::setw(18) << format_short(r.avg_iterations)
               << format_short(r.avg_cpu_ms) << "\n";
    if (!res.complete) {
        io.err << "experiment incomplete: " << res.error << "\n";
        return kNotConverged;
    }
    return kOk;
}

struct CheckFlags {
    std::vector<std::string> suites{"all"};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t runs = 30;
    double lipschitz_scale = 1.0;
};

inline int cmd_check(const InstanceSource& src, const RunFlags& rf, const CheckFlags& cf, const std::string& out_dir,
                     Streams io) {
    std::vector<std::string> suites;
    for (const auto& s : cf.suites) {
        if (s == "all") {
            suites = all_suites();
            break;
        }
        if (std::find(all_suites().begin(), all_suites().end(), s) == all_suites().end())
            throw std::invalid_argument("unknown suite '" + s + "'");
        suites.push_back(s);
    }
    const auto wants = [&](const char* s) { return std::find(suites.begin(), suites.end(), s) != suites.end(); };

    const LoadedInstance inst = src.load();
    Problem p = inst.problem;
    if (cf.lipschitz_scale != 1.0) p = p.with_lipschitz(p.lipschitz() * cf.lipschitz_scale);
    const Schedule sched = make_schedule(rf.beta0, rf.p);
    const StoppingRule stop = make_stopping_rule(rf.eps, rf.max_outer);

    std::optional<OracleSolution> oracle;
    const auto need_oracle = [&]() -> const OracleSolution& {
        if (!oracle) oracle = oracle_minimize(p);
        return *oracle;
    };

    std::vector<InequalityReport> reports;
    if (wants("lemma")) {
        reports.push_back(check_lemma_descent(p, cf.trials, cf.seed));
        reports.push_back(check_prox_convexity(p, cf.trials, cf.seed));
    }
    if (wants("proxoracle"))
        for (auto& r : check_prox_oracle(cf.trials, cf.seed)) reports.push_back(std::move(r));
    if (wants("firmnonexp")) reports.push_back(check_firm_nonexpansive(p, cf.trials, cf.seed));
    if (wants("cycle") || wants("stepbound")) {
        const auto& o = need_oracle();
        RunOptions opt;
        opt.retain_iterates = true;
        opt.force = rf.force;
        opt.oracle = o.x_star;
        const Trace cyc = run_cyclic(p, sched, stop, opt);
        if (wants("cycle")) {
            reports.push_back(check_cycle_inequality(cyc, p, o.x_star));
            reports.push_back(check_remark_decrease(cyc, p, o.x_star, o.f_star));
        }
        if (wants("stepbound")) {
            auto r = check_step_bound(cyc, p, sched);
            r.name = "step_bound_cyclic";
            reports.push_back(r);
            const Trace sto = run_stochastic(p, sched, IndexSampler(cf.seed, p.size()), stop, opt);
            auto s = check_step_bound(sto, p, sched);
            s.name = "step_bound_stochastic";
            reports.push_back(s);
        }
    }
    if (wants("stochastic")) reports.push_back(check_stochastic_descent(p, need_oracle().x_star, 0.05, cf.trials, cf.seed));
    if (wants("supermartingale")) {
        const auto& o = need_oracle();
        RunOptions opt;
        opt.force = rf.force;
        opt.oracle = o.x_star;
        if (cf.runs < kMinTrendTraces) throw std::invalid_argument("supermartingale suite needs --runs >= 30");
        TrendReport trend;
        for (std::size_t r = 0; r < cf.runs; ++r)
            add_trend(trend, trace_trend(run_stochastic(p, sched, IndexSampler(run_seed(cf.seed, r), p.size()), stop, opt),
                                         o.x_star, o.f_star));
        InequalityReport rep("supermartingale_trend", 0.0);
        for (std::size_t i = 0; i < trend.traces; ++i) {
            // Slack: how far inside both thresholds the trace stays (negative = failed).
            const double slack = std::min(kOscillationFactor * rf.eps - trend.oscillation[i],
                                          kPlateauRatio - trend.plateau_ratio[i]);
            rep.samples++;
            rep.worst_slack = std::min(rep.worst_slack, slack);
            if (!trend.trace_passed[i]) rep.violations++;
        }
        reports.push_back(rep);
    }

    nlohmann::ordered_json doc;
    doc["reports"] = nlohmann::ordered_json::array();
    bool ok = true;
    for (const auto& r : reports) {
        doc["reports"].push_back(to_json(r));
        ok = ok && r.passed();
        io.out << (r.passed() ? "PASS " : "FAIL ") << std::left << std::setw(26) << r.name << " samples "
               << r.samples << " violations " << r.violations << " worst slack "
               << format_short(r.samples ? r.worst_slack : 0.0) << " tol " << format_short(r.tolerance) << "\n";
    }
    doc["passed"] = ok;
    write_text_file(fs::path(out_dir) / "check_report.json", doc.dump(2) + "\n");
    return ok ? kOk : kViolations;
}

/// Parses and dispatches; never throws.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Splitting proximal point methods for box-constrained finite sums"};
    app.require_subcommand(1);
    std::string out_dir = ".";

    InstanceSource gen_src;
    auto* gen = app.add_subcommand("gen", "Generate an instance file");
    gen->add_option("--n", gen_src.n, "Dimension (>= 2)")->required()->check(CLI::Range(Index{2}, Index{100000}));
    gen->add_option("--seed", gen_src.seed, "Instance seed");
    gen->add_option("--out", out_dir, "Output directory");

    InstanceSource run_src;
    RunFlags run_flags;
    std::string method = "cyclic";
    std::uint64_t run_seed_value = 1;
    bool retain = false;
    auto* run = app.add_subcommand("run", "Run one method and write its trace");
    run_src.add_to(*run, "--instance-seed");
    run_flags.add_to(*run);
    run->add_option("--method", method, "cyclic | permuted | stochastic")
        ->check(CLI::IsMember({"cyclic", "permuted", "stochastic"}));
    run->add_option("--seed", run_seed_value, "Permutation / sampler seed");
    run->add_flag("--retain-iterates", retain, "Also write every iterate to iterates.csv");
    run->add_option("--out", out_dir, "Output directory");

    InstanceSource bench_src;
    RunFlags bench_flags;
    bench_flags.eps = 1e-10;
    std::vector<std::string> methods{"cyclic", "stochastic"};
    std::vector<double> epsilons{1e-10};
    std::size_t runs = 30;
    std::uint64_t bench_seed = 1;
    std::size_t trace_runs = static_cast<std::size_t>(-1);
    auto* bench = app.add_subcommand("bench", "Repeated runs and a summary table");
    bench_src.add_to(*bench, "--instance-seed");
    bench_flags.add_to(*bench);
    bench->remove_option(bench->get_option("--eps"));
    bench->add_option("--eps", epsilons, "Comma-separated stopping thresholds")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    bench->add_option("--methods", methods, "Comma-separated methods")
        ->delimiter(',')
        ->check(CLI::IsMember({"cyclic", "permuted", "stochastic"}));
    bench->add_option("--runs", runs, "Repetitions per method")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Base seed for permutations / samplers");
    bench->add_option("--trace-runs", trace_runs, "Persist traces of only the first K runs");
    bench->add_option("--out", out_dir, "Output directory");

    InstanceSource check_src;
    RunFlags check_flags;
    CheckFlags cf;
    auto* check = app.add_subcommand("check", "Certify the descent inequalities numerically");
    check_src.add_to(*check, "--instance-seed");
    check_flags.add_to(*check);
    check->add_option("--suite", cf.suites,
                      "Comma-separated: all, lemma, cycle, stepbound, stochastic, supermartingale, proxoracle, "
                      "firmnonexp")
        ->delimiter(',');
    check->add_option("--trials", cf.trials, "Samples per sampled check")->check(CLI::PositiveNumber);
    check->add_option("--seed", cf.seed, "Sampling seed");
    check->add_option("--runs", cf.runs, "Stochastic traces for the supermartingale trend (>= 30)");
    check->add_option("--out", out_dir, "Output directory");
    check->add_option("--debug-lipschitz-scale", cf.lipschitz_scale)->group("");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kConfig;
    }

    const Streams io{out, err};
    try {
        if (*gen) return cmd_gen(gen_src, out_dir, io);
        if (*run) return cmd_run(run_src, run_flags, parse_method(method), run_seed_value, retain, out_dir, io);
        if (*bench)
            return cmd_bench(bench_src, bench_flags, methods, epsilons, runs, bench_seed, trace_runs, out_dir, io);
        if (*check) return cmd_check(check_src, check_flags, cf, out_dir, io);
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const ConvergenceError& e) {
        err << "solver failure: " << e.what() << "\n";
        return kNotConverged;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfig;
    }
    return kConfig;
}

}  // namespace proxsplit::cli
