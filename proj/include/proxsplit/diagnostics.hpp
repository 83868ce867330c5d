#pragma once

// Numerical certificates for the inequalities the convergence theory rests on.
// Each check evaluates a slack (right-hand side minus left-hand side) and
// counts a violation when the slack drops below -tolerance.

#include "proxsplit/bench.hpp"
#include "proxsplit/core.hpp"
#include "proxsplit/methods.hpp"
#include "proxsplit/prox.hpp"
#include "proxsplit/random.hpp"
#include "proxsplit/testing/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace proxsplit {

struct InequalityReport {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;

    InequalityReport(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

    void add(double slack) {
        ++samples;
        worst_slack = std::min(worst_slack, slack);
        if (!(slack >= -tolerance)) ++violations;
    }

    bool passed() const noexcept { return violations == 0; }
};

inline constexpr double kLemmaTolerance = 1e-9;
inline constexpr double kCycleTolerance = 1e-7;
inline constexpr double kStepTolerance = 1e-9;
inline constexpr double kOracleAgreement = 1e-6;

namespace detail {

inline Vector uniform_in_box(const Box& b, CounterRng& rng) {
    Vector x(b.dim());
    for (Index i = 0; i < b.dim(); ++i) x[i] = rng.uniform(b.lower()[i], b.upper()[i]);
    return x;
}

/// Log-uniform beta on [max(beta_min, 1e-3), 10].
inline double sample_beta(double beta_min, CounterRng& rng) {
    const double lo = std::log(std::max(beta_min, 1e-3));
    const double hi = std::log(10.0);
    double b = std::exp(rng.uniform(lo, hi));
    if (b <= beta_min) b = std::nextafter(beta_min, 1e300);
    return b;
}

template <class SlackFn>
InequalityReport sample_component_inequality(const Problem& p, std::string name, std::size_t trials,
                                             std::uint64_t seed, std::optional<std::size_t> component,
                                             SlackFn slack) {
    detail::require(trials >= 1, name + ": trials must be at least 1");
    if (component) detail::require(*component < p.size(), name + ": component index out of range");
    InequalityReport rep(std::move(name), kLemmaTolerance);
    CounterRng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t i = component ? *component : static_cast<std::size_t>(rng.below(p.size()));
        const Component& c = p.components()[i];
        const Vector z = uniform_in_box(p.box(), rng);
        const Vector x = uniform_in_box(p.box(), rng);
        const double beta = sample_beta(c.beta_min(), rng);
        const Vector xbar = prox_component(c, z, beta, p.box()).x;
        const double dh = evaluate_component(c, xbar, p.dim()) - evaluate_component(c, x, p.dim());
        rep.add(slack(c.modulus(), beta, z, x, xbar, dh));
    }
    return rep;
}

inline void require_iterates(const Trace& t, const char* who) {
    if (!t.iterates || t.iterates->empty())
        throw std::invalid_argument(std::string(who) + ": trace has no retained iterates (rerun with --retain-iterates)");
}

}  // namespace detail

/// h(xbar) - h(x) <= (alpha / 2 beta) (||z - x||^2 - ||xbar - x||^2) on random
/// (component, z, x, beta) with z, x in the box and beta >= betaMin.
inline InequalityReport check_lemma_descent(const Problem& p, std::size_t trials, std::uint64_t seed,
                                            std::optional<std::size_t> component = std::nullopt) {
    return detail::sample_component_inequality(
        p, "lemma_descent", trials, seed, component,
        [](double alpha, double beta, const Vector& z, const Vector& x, const Vector& xbar, double dh) {
            return alpha / (2.0 * beta) * ((z - x).squaredNorm() - (xbar - x).squaredNorm()) - dh;
        });
}

/// h(xbar) - h(x) <= (alpha / beta) <xbar - z, x - xbar>, same sampling.
inline InequalityReport check_prox_convexity(const Problem& p, std::size_t trials, std::uint64_t seed,
                                             std::optional<std::size_t> component = std::nullopt) {
    return detail::sample_component_inequality(
        p, "prox_convexity", trials, seed, component,
        [](double alpha, double beta, const Vector& z, const Vector& x, const Vector& xbar, double dh) {
            return alpha / beta * (xbar - z).dot(x - xbar) - dh;
        });
}

/// ||T z1 - T z2||^2 <= <T z1 - T z2, z1 - z2> for T = prox at beta = 1/alpha,
/// z1, z2 drawn in the box.
inline InequalityReport check_firm_nonexpansive(const Problem& p, std::size_t trials, std::uint64_t seed) {
    detail::require(trials >= 1, "firm_nonexpansive: trials must be at least 1");
    InequalityReport rep("firm_nonexpansive", kLemmaTolerance);
    CounterRng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        for (const auto& c : p.components()) {
            const double beta = 1.0 / c.modulus();
            const Vector z1 = detail::uniform_in_box(p.box(), rng);
            const Vector z2 = detail::uniform_in_box(p.box(), rng);
            const Vector d = prox_component(c, z1, beta, p.box()).x - prox_component(c, z2, beta, p.box()).x;
            rep.add(d.dot(z1 - z2) - d.squaredNorm());
        }
    }
    return rep;
}

/// Agreement of the 1-D prox maps with the grid oracle, and residual plus
/// random-candidate optimality of the box-QP prox.
inline std::vector<InequalityReport> check_prox_oracle(std::size_t trials, std::uint64_t seed,
                                                       double resolution = 1e-4) {
    detail::require(trials >= 1, "prox_oracle: trials must be at least 1");
    InequalityReport negquad("prox_oracle_negquad", kOracleAgreement);
    InequalityReport linlog("prox_oracle_linlog", kOracleAgreement);
    InequalityReport residual("prox_quadform_residual", 0.0);
    InequalityReport optimal("prox_quadform_candidates", 1e-10);
    CounterRng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        {
            const double r = rng.uniform(0.5, 5.0);
            const double z = rng.uniform(-r, 2.0 * r);
            const double beta = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
            const double y = prox_negquad_1d(z, beta, r);
            const double ref = testing::grid_prox_oracle(scalar::negquad, z, beta, Interval{0.0, r}, resolution);
            negquad.add(-std::abs(y - ref));
        }
        {
            const double lo = rng.uniform(0.0, 2.0);
            const Interval iv{lo, lo + rng.uniform(0.5, 2.0)};
            const double z = rng.uniform(iv.lo - 3.0, iv.hi + 3.0);
            const double beta = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
            const double y = prox_linlog_1d(z, beta, iv).y;
            const double ref = testing::grid_prox_oracle(scalar::linlog, z, beta, iv, resolution);
            linlog.add(-std::abs(y - ref));
        }
        {
            const auto d = static_cast<Index>(1 + rng.below(8));
            const Matrix m = gen_psd_matrix(d, 0.0, rng);
            Vector lo(d), hi(d), z(d);
            for (Index i = 0; i < d; ++i) {
                lo[i] = rng.uniform(-2.0, 1.0);
                hi[i] = lo[i] + rng.uniform(0.5, 4.0);
                z[i] = rng.uniform(lo[i] - 3.0, hi[i] + 3.0);
            }
            const Box box(lo, hi);
            const double beta = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
            const auto res = prox_quadform_box(m, z, beta, box);
            residual.add(kDefaultProxTol - res.residual);
            const auto phi = [&](const Vector& y) { return y.dot(m * y) + (y - z).squaredNorm() / (2.0 * beta); };
            const double best = phi(res.y);
            double worst_gap = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 10; ++k) worst_gap = std::min(worst_gap, phi(detail::uniform_in_box(box, rng)) - best);
            optimal.add(worst_gap);
        }
    }
    return {negquad, linlog, residual, optimal};
}

/// Per-cycle distance inequality of Method 1 at a fixed probe point:
/// ||x_{(k+1)N} - x||^2 <= ||x_kN - x||^2 - (2 beta_k/alpha)(f(x_kN) - f(x))
///                         + 2 L^2 N (N+1) beta_k^2 / alpha.
inline InequalityReport check_cycle_inequality(const Trace& t, const Problem& p, const Vector& probe) {
    detail::require_iterates(t, "check_cycle_inequality");
    detail::require(t.method != Method::Stochastic, "check_cycle_inequality: needs a Method 1 trace");
    detail::require(probe.size() == p.dim(), "check_cycle_inequality: probe dimension mismatch");
    InequalityReport rep("cycle_inequality", kCycleTolerance);
    const auto& it = *t.iterates;
    const std::size_t n = t.stride;
    const double nn = static_cast<double>(p.size());
    const double alpha = p.modulus();
    const double l = p.lipschitz();
    const double f_probe = evaluate_objective(p, probe);
    for (std::size_t k = 0; (k + 1) * n < it.size(); ++k) {
        const double beta = t.schedule(k);
        const Vector& a = it[k * n];
        const Vector& b = it[(k + 1) * n];
        const double rhs = (a - probe).squaredNorm() - 2.0 * beta / alpha * (evaluate_objective(p, a) - f_probe) +
                           2.0 * l * l * nn * (nn + 1.0) * beta * beta / alpha;
        rep.add(rhs - (b - probe).squaredNorm());
    }
    return rep;
}

/// Every single prox step satisfies ||x_{l+1} - x_l|| <= 2 beta_k L.
inline InequalityReport check_step_bound(const Trace& t, const Problem& p, const Schedule& sched) {
    detail::require_iterates(t, "check_step_bound");
    InequalityReport rep("step_bound", kStepTolerance);
    const auto& it = *t.iterates;
    for (std::size_t i = 0; i + 1 < it.size(); ++i) {
        const double beta = sched(i / t.stride);
        rep.add(2.0 * beta * p.lipschitz() - (it[i + 1] - it[i]).norm());
    }
    return rep;
}

/// On every cycle with beta_k below the strict-decrease bound, the distance
/// to the minimizer must strictly shrink. Violation means it did not.
inline InequalityReport check_remark_decrease(const Trace& t, const Problem& p, const Vector& x_star,
                                              double f_star) {
    detail::require_iterates(t, "check_remark_decrease");
    detail::require(t.method != Method::Stochastic, "check_remark_decrease: needs a Method 1 trace");
    InequalityReport rep("remark_strict_decrease", 0.0);
    const auto& it = *t.iterates;
    const std::size_t n = t.stride;
    for (std::size_t k = 0; (k + 1) * n < it.size(); ++k) {
        const Vector& a = it[k * n];
        const double bound = remark_step_bound(p, evaluate_objective(p, a), f_star);
        if (!(t.schedule(k) < bound)) continue;
        const double shrink = (a - x_star).norm() - (it[(k + 1) * n] - x_star).norm();
        ++rep.samples;
        rep.worst_slack = std::min(rep.worst_slack, shrink);
        if (!(shrink > 0.0)) ++rep.violations;
    }
    return rep;
}

struct StochasticDescentEstimate {
    double lhs = 0.0;          // E[||x_{k+1} - probe||^2 | x_k], exact average over components
    double rhs = 0.0;          // ||x - probe||^2 - (2 beta/(alpha N))(f(x) - f(probe)) + 4 beta^2 L^2 / alpha
    double sampled_lhs = 0.0;  // Monte Carlo estimate of the same expectation
    double stderr_ = 0.0;      // standard error of sampled_lhs
};

inline StochasticDescentEstimate estimate_stochastic_descent(const Problem& p, const Vector& x, const Vector& probe,
                                                             double beta, std::size_t samples, std::uint64_t seed) {
    detail::require(samples >= 100, "estimate_stochastic_descent: needs at least 100 samples");
    detail::require(beta > 0.0, "estimate_stochastic_descent: beta must be positive");
    const std::size_t n = p.size();
    std::vector<double> dist(n);
    StochasticDescentEstimate e;
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = (prox_component(p.components()[i], x, beta, p.box()).x - probe).squaredNorm();
        e.lhs += dist[i];
    }
    e.lhs /= static_cast<double>(n);
    const double alpha = p.modulus();
    const double l = p.lipschitz();
    e.rhs = (x - probe).squaredNorm() -
            2.0 * beta / (alpha * static_cast<double>(n)) * (evaluate_objective(p, x) - evaluate_objective(p, probe)) +
            4.0 * beta * beta * l * l / alpha;

    CounterRng rng(seed);
    double sum = 0.0, sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double v = dist[rng.below(n)];
        sum += v;
        sq += v * v;
    }
    const double ns = static_cast<double>(samples);
    e.sampled_lhs = sum / ns;
    e.stderr_ = std::sqrt(std::max(0.0, sq / ns - e.sampled_lhs * e.sampled_lhs) / (ns - 1.0));
    return e;
}

/// The conditional-expectation bound at `states` random in-box points.
inline InequalityReport check_stochastic_descent(const Problem& p, const Vector& probe, double beta,
                                                 std::size_t states, std::uint64_t seed) {
    InequalityReport rep("stochastic_descent", kLemmaTolerance);
    CounterRng rng(seed);
    for (std::size_t s = 0; s < states; ++s) {
        const Vector x = detail::uniform_in_box(p.box(), rng);
        const auto e = estimate_stochastic_descent(p, x, probe, beta, 100, rng.next_u64());
        rep.add(e.rhs - e.lhs);
    }
    return rep;
}

struct TrendReport {
    std::size_t traces = 0;
    std::size_t passed = 0;
    std::vector<double> oscillation;     // max - min of ||x_k - x*|| over the last quarter
    std::vector<double> plateau_ratio;   // last increment / total of sum beta_k (f(x_k) - f*)
    std::vector<bool> trace_passed;
    double pass_fraction() const { return traces ? static_cast<double>(passed) / static_cast<double>(traces) : 0.0; }
};

inline constexpr std::size_t kMinTrendTraces = 30;
inline constexpr double kOscillationFactor = 10.0;
inline constexpr double kPlateauRatio = 1e-6;

struct TraceTrend {
    double oscillation = 0.0;
    double plateau_ratio = 0.0;
    bool passed = false;
};

/// Trend statistics of one Method 2 trace; see check_supermartingale_trend.
inline TraceTrend trace_trend(const Trace& t, const Vector& oracle_min, double f_star) {
    const std::size_t k = t.records.size();
    detail::require(k >= 1, "check_supermartingale_trend: empty trace");
    std::vector<double> dist(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (t.iterates && t.iterates->size() > i * t.stride) {
            dist[i] = ((*t.iterates)[i * t.stride] - oracle_min).norm();
        } else if (t.records[i].dist_to_oracle) {
            dist[i] = *t.records[i].dist_to_oracle;
        } else {
            throw std::invalid_argument("check_supermartingale_trend: trace has neither iterates nor oracle distances");
        }
    }
    const std::size_t from = (3 * k) / 4;
    const auto [lo, hi] = std::minmax_element(dist.begin() + static_cast<std::ptrdiff_t>(from), dist.end());

    double total = 0.0, last = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        last = t.schedule(t.records[i].k) * (t.records[i].f_value - f_star);
        total += last;
    }
    TraceTrend tr;
    tr.oscillation = *hi - *lo;
    tr.plateau_ratio = total != 0.0 ? std::abs(last) / std::abs(total) : 0.0;
    tr.passed = tr.oscillation < kOscillationFactor * t.stop.epsilon && tr.plateau_ratio <= kPlateauRatio;
    return tr;
}

inline void add_trend(TrendReport& rep, const TraceTrend& tr) {
    rep.oscillation.push_back(tr.oscillation);
    rep.plateau_ratio.push_back(tr.plateau_ratio);
    rep.trace_passed.push_back(tr.passed);
    ++rep.traces;
    if (tr.passed) ++rep.passed;
}

/// Finite-sample stand-in for almost-sure convergence of Method 2: per trace
/// (a) the distance to x* settles: last-quarter oscillation < 10 eps, and
/// (b) sum_k beta_k (f(x_k) - f*) plateaus: final increment <= 1e-6 of the total.
/// Distances come from retained iterates, else from recorded oracle distances.
inline TrendReport check_supermartingale_trend(const std::vector<Trace>& traces, const Problem& p,
                                               const Vector& oracle_min) {
    if (traces.size() < kMinTrendTraces)
        throw std::invalid_argument("check_supermartingale_trend: needs at least 30 traces");
    const double f_star = evaluate_objective(p, oracle_min);
    TrendReport rep;
    for (const auto& t : traces) add_trend(rep, trace_trend(t, oracle_min, f_star));
    return rep;
}

}  // namespace proxsplit
