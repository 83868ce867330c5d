#pragma once

// Splitting proximal point methods.
//
//   Method 1 (permuted order): each outer cycle k applies the prox of every
//   component once, in the order of a permutation pi_k, with common step beta_k.
//   The fixed identity order is the cyclic special case.
//
//   Method 2 (stochastic): each iteration applies the prox of one component
//   drawn uniformly and independently.
//
// Both take the prox over the box K, and both stop on ||x_{k+1} - x_k|| <= eps,
// measured between cycle endpoints for Method 1.

#include "proxsplit/core.hpp"
#include "proxsplit/prox.hpp"
#include "proxsplit/random.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace proxsplit {

enum class PermutationMode { FixedCyclic, FreshRandom };

/// Per-cycle orders for Method 1. FreshRandom draws a Fisher-Yates shuffle per
/// cycle from a seeded counter stream, so the sequence is replayable.
class PermutationSource {
public:
    static PermutationSource cyclic() { return PermutationSource(PermutationMode::FixedCyclic, 0); }
    static PermutationSource random(std::uint64_t seed) { return PermutationSource(PermutationMode::FreshRandom, seed); }

    PermutationMode mode() const noexcept { return mode_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::vector<std::size_t> next(std::size_t n) {
        if (mode_ == PermutationMode::FixedCyclic) {
            std::vector<std::size_t> id(n);
            for (std::size_t i = 0; i < n; ++i) id[i] = i;
            return id;
        }
        return random_permutation(n, rng_);
    }

private:
    PermutationSource(PermutationMode mode, std::uint64_t seed) : mode_(mode), seed_(seed), rng_(seed) {}

    PermutationMode mode_;
    std::uint64_t seed_;
    CounterRng rng_;
};

/// i.i.d. uniform component indices in [0, n).
class IndexSampler {
public:
    IndexSampler(std::uint64_t seed, std::size_t n) : seed_(seed), n_(n), rng_(seed) {
        detail::require(n >= 1, "IndexSampler: needs at least one component");
    }

    std::size_t next() { return static_cast<std::size_t>(rng_.below(n_)); }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t size() const noexcept { return n_; }

private:
    std::uint64_t seed_;
    std::size_t n_;
    CounterRng rng_;
};

struct RunOptions {
    std::optional<Vector> x0;      // defaults to the box midpoint
    std::optional<Vector> oracle;  // fills TraceRecord::dist_to_oracle
    bool retain_iterates = false;
    bool force = false;            // run even if beta drops below a certified minimum
    double prox_tol = kDefaultProxTol;
};

/// Rejects schedules whose smallest reachable step (index maxOuter) falls
/// below some component's betaMin, unless forced.
inline void validate_schedule(const Problem& p, const Schedule& sched, const StoppingRule& stop, bool force) {
    detail::require(stop.epsilon > 0.0, "StoppingRule: epsilon must be positive");
    detail::require(stop.max_outer >= 1, "StoppingRule: maxOuter must be at least 1");
    detail::require(sched.c > 0.0 && sched.p > 0.5 && sched.p <= 1.0, "Schedule: invalid parameters");
    if (force) return;
    const double smallest = sched(stop.max_outer);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double bmin = p.components()[i].beta_min();
        if (smallest < bmin)
            throw ConfigError("stepsize beta_" + std::to_string(stop.max_outer) + " = " + std::to_string(smallest) +
                              " falls below the certified minimum " + std::to_string(bmin) + " of component " +
                              std::to_string(i + 1) + "; raise --beta0, lower --max-outer, or pass --force");
    }
}

namespace detail {

class RunClock {
public:
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline Trace start_trace(const Problem& p, Method m, std::uint64_t seed, const Schedule& sched,
                         const StoppingRule& stop, const RunOptions& opt, std::size_t stride, Vector& x) {
    validate_schedule(p, sched, stop, opt.force);
    if (opt.x0) detail::require(opt.x0->size() == p.dim(), "x0: dimension mismatch");
    if (opt.oracle) detail::require(opt.oracle->size() == p.dim(), "oracle point: dimension mismatch");
    x = project_box(p.box(), opt.x0 ? *opt.x0 : p.box().midpoint());
    Trace t;
    t.method = m;
    t.seed = seed;
    t.schedule = sched;
    t.stop = stop;
    t.stride = stride;
    if (opt.retain_iterates) t.iterates.emplace().push_back(x);
    return t;
}

inline TraceRecord make_record(const Problem& p, const RunOptions& opt, std::uint64_t k, const Vector& before,
                               const Vector& after, const RunClock& clock) {
    TraceRecord r;
    r.k = k;
    r.step_norm = (after - before).norm();
    r.f_value = evaluate_objective(p, before);
    if (opt.oracle) r.dist_to_oracle = (before - *opt.oracle).norm();
    r.elapsed_ms = clock.elapsed_ms();
    return r;
}

inline ProxResult step(const Problem& p, std::size_t comp, const Vector& x, double beta, double tol,
                       std::uint64_t k) {
    try {
        return prox_component(p.components()[comp], x, beta, p.box(), tol);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError("iteration " + std::to_string(k) + ", component " + std::to_string(comp + 1) + ": " +
                                   e.what(),
                               e.residual());
    }
}

inline void finish(const Problem& p, Trace& t, Vector x) {
    t.final_value = evaluate_objective(p, x);
    t.final_point = std::move(x);
}

}  // namespace detail

/// Method 1. One trace record per cycle.
inline Trace run_permuted(const Problem& p, const Schedule& sched, PermutationSource perm, const StoppingRule& stop,
                          const RunOptions& opt = {}) {
    const detail::RunClock clock;
    Vector x;
    const Method m = perm.mode() == PermutationMode::FixedCyclic ? Method::Cyclic : Method::Permuted;
    Trace t = detail::start_trace(p, m, perm.seed(), sched, stop, opt, p.size(), x);
    for (std::uint64_t k = 0; k < stop.max_outer; ++k) {
        const double beta = sched(k);
        const Vector start = x;
        for (const std::size_t comp : perm.next(p.size())) {
            auto r = detail::step(p, comp, x, beta, opt.prox_tol, k);
            t.below_certified_beta = t.below_certified_beta || r.below_certified_beta;
            x = std::move(r.x);
            if (t.iterates) t.iterates->push_back(x);
        }
        t.records.push_back(detail::make_record(p, opt, k, start, x, clock));
        if (t.records.back().step_norm <= stop.epsilon) {
            t.terminated = Termination::EpsilonReached;
            break;
        }
    }
    detail::finish(p, t, std::move(x));
    return t;
}

/// Method 1 with the identity order in every cycle.
inline Trace run_cyclic(const Problem& p, const Schedule& sched, const StoppingRule& stop,
                        const RunOptions& opt = {}) {
    return run_permuted(p, sched, PermutationSource::cyclic(), stop, opt);
}

/// Method 2. One trace record per prox step.
inline Trace run_stochastic(const Problem& p, const Schedule& sched, IndexSampler sampler, const StoppingRule& stop,
                            const RunOptions& opt = {}) {
    detail::require(sampler.size() == p.size(), "run_stochastic: sampler size differs from component count");
    const detail::RunClock clock;
    Vector x;
    Trace t = detail::start_trace(p, Method::Stochastic, sampler.seed(), sched, stop, opt, 1, x);
    for (std::uint64_t k = 0; k < stop.max_outer; ++k) {
        auto r = detail::step(p, sampler.next(), x, sched(k), opt.prox_tol, k);
        t.below_certified_beta = t.below_certified_beta || r.below_certified_beta;
        t.records.push_back(detail::make_record(p, opt, k, x, r.x, clock));
        x = std::move(r.x);
        if (t.iterates) t.iterates->push_back(x);
        if (t.records.back().step_norm <= stop.epsilon) {
            t.terminated = Termination::EpsilonReached;
            break;
        }
    }
    detail::finish(p, t, std::move(x));
    return t;
}

/// Largest beta_k for which one more cycle is guaranteed to move strictly
/// closer to the minimizer: (f(x_kN) - f*) / (L^2 N (N+1)). Zero if no gap.
inline double remark_step_bound(const Problem& p, double f_current, double f_star) {
    if (!(f_current > f_star)) return 0.0;
    const double n = static_cast<double>(p.size());
    const double l = p.lipschitz();
    return (f_current - f_star) / (l * l * n * (n + 1.0));
}

}  // namespace proxsplit
