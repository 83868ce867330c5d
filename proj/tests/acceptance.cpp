// Acceptance suite: one PASS/FAIL line per primary criterion.
// Instance seed 0 is fixed for every criterion.

#include "proxsplit/proxsplit.hpp"

#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace proxsplit;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kInstanceSeed = 0;

// Pinned tolerances and budgets.
constexpr double kProxOracleTol = 1e-6;
constexpr double kGapTol = 1e-6;
constexpr double kOracleTol = 1e-12;
constexpr std::size_t kTrials = 1000;
constexpr std::size_t kSeeds = 30;
constexpr std::uint64_t kMethod2MaxOuter = 1000000;
constexpr double kMethod2StateBeta = 0.05;
constexpr std::size_t kMethod2States = 100;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %s: %s; runtime %.1f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs,
                budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
}

std::string fmt(double v) { return format_short(v); }

std::string describe(const InequalityReport& r) {
    return r.name + " " + std::to_string(r.violations) + "/" + std::to_string(r.samples) + " violations (worst slack " +
           fmt(r.samples ? r.worst_slack : 0.0) + ")";
}

Outcome prox_correctness() {
    Outcome o{true, ""};
    for (const auto& r : check_prox_oracle(kTrials, 1)) {
        o.pass = o.pass && r.passed();
        o.detail += (o.detail.empty() ? "" : ", ") + describe(r);
    }
    o.detail += "; agreement tol " + fmt(kProxOracleTol);
    return o;
}

Outcome lemma_suite(const Problem& p) {
    Outcome o{true, ""};
    std::size_t bad = 0, samples = 0;
    double worst = 1e300;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (const auto& r : {check_lemma_descent(p, kTrials, 100 + i, i), check_prox_convexity(p, kTrials, 200 + i, i)}) {
            bad += r.violations;
            samples += r.samples;
            worst = std::min(worst, r.worst_slack);
        }
    }
    o.pass = bad == 0;
    o.detail = "n=20, " + std::to_string(p.size()) + " components x " + std::to_string(kTrials) +
               " samples x {descent, prox-convex}: " + std::to_string(bad) + "/" + std::to_string(samples) +
               " violations, worst slack " + fmt(worst) + ", tol " + fmt(kLemmaTolerance);
    return o;
}

struct Method1Run {
    Trace trace;
    OracleSolution oracle;
};

Outcome method1(const Problem& p, const OracleSolution& o, std::optional<Method1Run>& keep) {
    const auto sched = make_schedule(1, 1);
    RunOptions opt;
    opt.retain_iterates = true;
    opt.oracle = o.x_star;
    Trace t = run_cyclic(p, sched, make_stopping_rule(1e-8, 100000), opt);
    const double gap = t.final_value - o.f_star;
    const auto cyc = check_cycle_inequality(t, p, o.x_star);
    const auto step = check_step_bound(t, p, sched);
    Outcome out;
    out.pass = t.terminated == Termination::EpsilonReached && gap <= kGapTol && cyc.passed() && step.passed();
    out.detail = std::string(t.terminated == Termination::EpsilonReached ? "EpsilonReached" : "MaxIterations") +
                 " after " + std::to_string(t.iterations()) + " cycles, f - f* = " + fmt(gap) + " (tol " +
                 fmt(kGapTol) + "), " + describe(cyc) + ", " + describe(step);
    keep = Method1Run{std::move(t), o};
    return out;
}

Outcome method2(const Problem& p, const OracleSolution& o) {
    const auto sched = make_schedule(1, 1);
    const auto stop = make_stopping_rule(1e-8, kMethod2MaxOuter);
    RunOptions opt;
    opt.oracle = o.x_star;
    TrendReport trend;
    std::size_t gap_ok = 0, eps_reached = 0;
    double worst_gap = -1e300;
    for (std::size_t r = 0; r < kSeeds; ++r) {
        const Trace t = run_stochastic(p, sched, IndexSampler(run_seed(1, r), p.size()), stop, opt);
        const double gap = t.final_value - o.f_star;
        worst_gap = std::max(worst_gap, gap);
        if (gap <= kGapTol) ++gap_ok;
        if (t.terminated == Termination::EpsilonReached) ++eps_reached;
        add_trend(trend, trace_trend(t, o.x_star, o.f_star));
    }
    double max_osc = 0.0, max_ratio = 0.0;
    for (std::size_t i = 0; i < trend.traces; ++i) {
        max_osc = std::max(max_osc, trend.oscillation[i]);
        max_ratio = std::max(max_ratio, trend.plateau_ratio[i]);
    }
    const auto desc = check_stochastic_descent(p, o.x_star, kMethod2StateBeta, kMethod2States, 7);
    Outcome out;
    out.pass = gap_ok == kSeeds && trend.passed == kSeeds && desc.passed();
    out.detail = "gap <= " + fmt(kGapTol) + " in " + std::to_string(gap_ok) + "/" + std::to_string(kSeeds) +
                 " runs (worst " + fmt(worst_gap) + ", maxOuter " + std::to_string(kMethod2MaxOuter) + ", " +
                 std::to_string(eps_reached) + " stopped by eps), supermartingale trend " +
                 std::to_string(trend.passed) + "/" + std::to_string(trend.traces) + " (max oscillation " +
                 fmt(max_osc) + " vs " + fmt(kOscillationFactor * stop.epsilon) + ", max plateau ratio " +
                 fmt(max_ratio) + "), " + describe(desc);
    return out;
}

Outcome remark(const Problem& p, const std::optional<Method1Run>& run) {
    if (!run) return {false, "no Method 1 trace"};
    const auto r = check_remark_decrease(run->trace, p, run->oracle.x_star, run->oracle.f_star);
    return {r.passed(), std::to_string(r.samples) + " qualifying cycles of " + std::to_string(run->trace.iterations()) +
                            ", " + std::to_string(r.violations) + " counterexamples"};
}

Outcome table_trend() {
    const Problem p = gen_instance({50, kInstanceSeed, 0.3});
    const auto o = oracle_minimize(p, kOracleTol);
    ExperimentConfig cfg;
    cfg.methods = {Method::Cyclic, Method::Stochastic};
    cfg.epsilons = {1e-10, 1e-12, 1e-13};
    cfg.runs = kSeeds;
    const auto res = run_experiment(p, cfg, o.x_star);
    const auto avg = [&](Method m, double eps) {
        for (const auto& r : res.rows)
            if (r.method == m && r.epsilon == eps) return r.avg_iterations;
        throw std::runtime_error("missing summary row");
    };
    const double c10 = avg(Method::Cyclic, 1e-10), c12 = avg(Method::Cyclic, 1e-12), c13 = avg(Method::Cyclic, 1e-13);
    const double s10 = avg(Method::Stochastic, 1e-10);
    Outcome out;
    out.pass = res.complete && s10 > c10 && c10 <= c12 && c12 <= c13;
    out.detail = "n=50, 30 runs, eps 1e-10: stochastic " + fmt(s10) + " > cyclic " + fmt(c10) +
                 " (steps vs cycles, cap " + std::to_string(cfg.max_outer) + "); cyclic over 1e-10/1e-12/1e-13: " +
                 fmt(c10) + " <= " + fmt(c12) + " <= " + fmt(c13);
    return out;
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir).string();
        if (rel.find(".timing.") != std::string::npos) continue;
        files.emplace_back(rel, read_text_file(e.path()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "proxsplit_acceptance_determinism";
    const std::vector<std::vector<std::string>> commands{
        {"gen", "--n", "20", "--seed", "7"},
        {"run", "--n", "20", "--method", "cyclic", "--eps", "1e-8", "--retain-iterates"},
        {"run", "--n", "20", "--method", "permuted", "--seed", "3", "--eps", "1e-8", "--max-outer", "20000"},
        {"run", "--n", "20", "--method", "stochastic", "--seed", "1", "--max-outer", "20000", "--retain-iterates"},
        {"bench", "--n", "20", "--runs", "4", "--methods", "cyclic,permuted,stochastic", "--eps", "1e-6,1e-8",
         "--max-outer", "20000"},
        {"check", "--n", "20", "--suite", "lemma,cycle,stepbound,stochastic,proxoracle,firmnonexp", "--trials",
         "200"},
    };
    std::size_t compared = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<std::pair<std::string, std::string>> first;
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = root / (std::to_string(c) + "_" + std::to_string(rep));
            fs::remove_all(dir);
            fs::create_directories(dir);
            auto args = commands[c];
            args.insert(args.end(), {"--out", dir.string()});
            std::ostringstream out, err;
            const int code = cli::run_cli(args, out, err);
            if (code == cli::kConfig || code == cli::kIo)
                return {false, "command " + std::to_string(c) + " failed: " + err.str()};
            auto snap = snapshot(dir);
            if (rep == 0) {
                first = std::move(snap);
            } else if (snap != first) {
                return {false, "command '" + commands[c][0] + "' produced different bytes on repeat"};
            }
        }
        compared += first.size();
    }
    fs::remove_all(root);
    return {true, std::to_string(commands.size()) + " seeded commands run twice, " + std::to_string(compared) +
                      " output files byte-identical"};
}

}  // namespace

int main() {
    const Problem p20 = gen_instance({20, kInstanceSeed, 0.3});
    const OracleSolution o20 = oracle_minimize(p20, kOracleTol);
    std::printf("instance n=20 seed %llu: L = %s, certificate = %s, f* = %s\n",
                static_cast<unsigned long long>(kInstanceSeed), fmt(p20.lipschitz()).c_str(),
                fmt(strong_convexity_certificate(p20)).c_str(), format_real(o20.f_star).c_str());

    std::optional<Method1Run> m1;
    report("prox correctness", 10, prox_correctness);
    report("descent lemma suite", 30, [&] { return lemma_suite(p20); });
    report("Method 1 at desk scale", 60, [&] { return method1(p20, o20, m1); });
    report("Method 2 at desk scale", 300, [&] { return method2(p20, o20); });
    report("remark strict decrease", 60, [&] { return remark(p20, m1); });
    report("table trend", 900, table_trend);
    report("determinism", 300, determinism);

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
