#pragma once

// Nonconvex quadratic test family, an independent reference minimizer, and
// the repeated-run experiment driver.
//
//   K   = { 0 <= x_1 <= 2,  0 <= x_i <= 5 + i/(3i-2), i = 2..n }
//   f_1 = -x_1^2 - x_1 + u'Au,  u = (x_2, ..., x_n)
//   f_2..f_5 = x'Bx, x'Cx, x'Px, x'Qx
//
// A = H D H' with H orthonormal from a Gaussian matrix and D = |randn|; the
// other four matrices use D = |randn| + shift (0.3 by default).

#include "proxsplit/core.hpp"
#include "proxsplit/random.hpp"
#include "proxsplit/testing/grid_oracle.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace proxsplit {

struct InstanceSpec {
    Index n = 20;
    std::uint64_t seed = 0;
    double eigen_shift = 0.3;
    static constexpr std::size_t kNumComponents = 5;
};

inline Box gen_box(Index n) {
    detail::require(n >= 2, "gen_box: n must be at least 2");
    Vector lo = Vector::Zero(n);
    Vector hi(n);
    hi[0] = 2.0;
    for (Index i = 2; i <= n; ++i) {
        const auto d = static_cast<double>(i);
        hi[i - 1] = 5.0 + d / (3.0 * d - 2.0);
    }
    return Box(std::move(lo), std::move(hi));
}

/// H diag(|randn| + shift) H', H = orth(randn(dim)) with R's diagonal made
/// positive so the factor is unique. The Gaussian matrix is filled column by
/// column, then the dim eigenvalue draws follow.
inline Matrix gen_psd_matrix(Index dim, double eigen_shift, CounterRng& rng) {
    detail::require(dim >= 1, "gen_psd_matrix: dim must be positive");
    detail::require(eigen_shift >= 0.0, "gen_psd_matrix: eigen shift must be nonnegative");
    Matrix g(dim, dim);
    for (Index j = 0; j < dim; ++j)
        for (Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix h = qr.householderQ() * Matrix::Identity(dim, dim);
    const Matrix& r = qr.matrixQR();
    for (Index j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) h.col(j) = -h.col(j);
    Vector d(dim);
    for (Index i = 0; i < dim; ++i) d[i] = std::abs(rng.normal()) + eigen_shift;
    Matrix m = h * d.asDiagonal() * h.transpose();
    return 0.5 * (m + m.transpose());
}

inline Problem gen_instance(const InstanceSpec& spec) {
    const Box box = gen_box(spec.n);
    CounterRng rng(spec.seed);
    const Index n = spec.n;

    std::vector<Index> tail(static_cast<std::size_t>(n - 1));
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    for (Index i = 1; i < n; ++i) tail[static_cast<std::size_t>(i - 1)] = i;

    std::vector<Component> comps;
    Matrix a = gen_psd_matrix(n - 1, 0.0, rng);
    comps.push_back(Component::from_pieces({BlockPiece::negquad(0), BlockPiece::quadform(tail, std::move(a))}));
    for (std::size_t c = 1; c < InstanceSpec::kNumComponents; ++c)
        comps.push_back(Component::from_pieces({BlockPiece::quadform(all, gen_psd_matrix(n, spec.eigen_shift, rng))}));
    return Problem(box, std::move(comps));
}

/// Smallest eigenvalue of a lower bound on the Hessian of f over the box.
/// Positive means f is strongly convex on K.
inline double strong_convexity_certificate(const Problem& p) {
    Matrix h = Matrix::Zero(p.dim(), p.dim());
    for (const auto& c : p.components())
        for (const auto& piece : c.pieces()) {
            const Matrix hb = piece.hessian_lower_bound(p.box().restrict_to(piece.coords()));
            const auto& cs = piece.coords();
            for (std::size_t i = 0; i < cs.size(); ++i)
                for (std::size_t j = 0; j < cs.size(); ++j)
                    h(cs[i], cs[j]) += hb(static_cast<Index>(i), static_cast<Index>(j));
        }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct OracleSolution {
    Vector x_star;
    double f_star = 0.0;
    double residual = 0.0;
    std::uint64_t iterations = 0;
};

/// Minimizes the aggregate objective over the box by projected gradient with
/// backtracking. Never touches the proximal maps.
inline OracleSolution oracle_minimize(const Problem& p, double tol = 1e-12, std::uint64_t max_iter = 10000000) {
    const Box& box = p.box();
    if (strong_convexity_certificate(p) <= 0.0) {
        if (p.dim() != 1)
            throw std::runtime_error(
                "oracle_minimize: objective is not certified strongly convex on the box; a multistart search is "
                "required and not provided");
        const auto f1 = [&](double t) { return evaluate_objective(p, Vector::Constant(1, t)); };
        const double t = testing::grid_prox_oracle(f1, 0.0, 1e300, Interval{box.lower()[0], box.upper()[0]},
                                                   (box.upper()[0] - box.lower()[0]) * 1e-6 + 1e-300);
        OracleSolution s{Vector::Constant(1, t), f1(t), 0.0, 0};
        return s;
    }

    // Curvature bound: the sufficient-decrease test is guaranteed once step <= 1/lgrad,
    // so backtracking stops there even when roundoff hides the decrease.
    double lgrad = 0.0;
    for (const auto& c : p.components())
        for (const auto& piece : c.pieces())
            lgrad += detail::spectral_norm_sym(piece.hessian_lower_bound(box.restrict_to(piece.coords())));
    const double min_step = 1.0 / std::max(lgrad, 1e-12);

    OracleSolution s;
    Vector x = box.midpoint();
    double fx = evaluate_objective(p, x);
    double step = 1.0;
    for (s.iterations = 0; s.iterations < max_iter; ++s.iterations) {
        const Vector g = objective_gradient(p, x);
        s.residual = (x - project_box(box, x - g)).norm();
        if (s.residual <= tol) break;
        step = std::min(1.0, 2.0 * step);
        for (;;) {
            const Vector trial = project_box(box, x - step * g);
            const Vector d = trial - x;
            const double ft = evaluate_objective(p, trial);
            if (ft <= fx + g.dot(d) + d.squaredNorm() / (2.0 * step) || step <= min_step) {
                x = trial;
                fx = ft;
                break;
            }
            step = std::max(0.5 * step, min_step);
        }
    }
    if (s.residual > tol)
        throw ConvergenceError("oracle_minimize: iteration cap reached", s.residual);
    s.x_star = std::move(x);
    s.f_star = fx;
    return s;
}

}  // namespace proxsplit
