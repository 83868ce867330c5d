#pragma once

// Constrained proximal maps  argmin_{y in K} h(y) + ||y - z||^2 / (2 beta)
// for each piece kind, and their blockwise composition for a component.

#include "proxsplit/core.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace proxsplit {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr double kDefaultProxTol = 1e-10;
inline constexpr std::uint64_t kQuadProxMaxIter = 1000000;
/// Smallest beta for which LinLog1D is certified prox-convex (strict).
inline constexpr double kLinLogBetaMin = 0.2;

/// Global minimizer of -y^2 - y + (y - z)^2 / (2 beta) over [lo, hi].
/// For beta >= 1/2 the inner objective is concave and the better endpoint
/// wins; exact ties go to hi.
inline double prox_negquad_1d(double z, double beta, Interval iv) {
    detail::require(beta > 0.0, "prox_negquad_1d: beta must be positive");
    detail::require(iv.lo <= iv.hi, "prox_negquad_1d: empty interval");
    if (beta < 0.5) return std::clamp((z + beta) / (1.0 - 2.0 * beta), iv.lo, iv.hi);
    const auto phi = [&](double y) { return scalar::negquad(y) + (y - z) * (y - z) / (2.0 * beta); };
    return phi(iv.hi) <= phi(iv.lo) ? iv.hi : iv.lo;
}

inline double prox_negquad_1d(double z, double beta, double r) {
    detail::require(r > 0.0, "prox_negquad_1d: r must be positive");
    return prox_negquad_1d(z, beta, Interval{0.0, r});
}

struct ScalarProx {
    double y = 0.0;
    bool below_certified_beta = false;
};

/// Global minimizer of 5y + ln(10y+1) + (y - z)^2 / (2 beta) over [lo, hi].
///
/// The inner objective has increasing second derivative, so it is concave
/// left of y_c = (sqrt(100 beta) - 1)/10 and convex right of it. On the convex
/// part the derivative is monotone and a safeguarded bisection finds the root
/// (or an endpoint when it keeps one sign); that candidate is compared with lo.
inline ScalarProx prox_linlog_1d(double z, double beta, Interval iv, double tol = 1e-12) {
    detail::require(beta > 0.0, "prox_linlog_1d: beta must be positive");
    detail::require(iv.lo >= 0.0 && iv.lo < iv.hi, "prox_linlog_1d: interval must satisfy 0 <= lo < hi");
    detail::require(tol > 0.0, "prox_linlog_1d: tolerance must be positive");
    const auto phi = [&](double y) { return scalar::linlog(y) + (y - z) * (y - z) / (2.0 * beta); };
    const auto dphi = [&](double y) { return scalar::linlog_slope(y) + (y - z) / beta; };

    const double yc = (std::sqrt(100.0 * beta) - 1.0) / 10.0;
    double a = std::max(iv.lo, yc);
    double b = iv.hi;
    double cand;
    if (a >= b) {
        cand = b;
    } else if (dphi(a) >= 0.0) {
        cand = a;
    } else if (dphi(b) <= 0.0) {
        cand = b;
    } else {
        while (b - a > tol) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            (dphi(m) < 0.0 ? a : b) = m;
        }
        cand = 0.5 * (a + b);
    }
    const double y = phi(iv.lo) <= phi(cand) ? iv.lo : cand;
    return ScalarProx{y, beta <= kLinLogBetaMin};
}

struct QuadProxResult {
    Vector y;
    double residual = 0.0;
    std::uint64_t iterations = 0;
};

namespace detail {

/// Projected gradient with fixed step t = 1/(2||M|| + 1/beta). The residual is
/// the displacement ||y - P(y - t grad)||, i.e. the gradient mapping scaled by t.
inline QuadProxResult quadform_prox(const Matrix& m, double m_norm, const Vector& z, double beta,
                                    const Vector& lo, const Vector& hi, double tol,
                                    std::uint64_t max_iter = kQuadProxMaxIter) {
    const double t = 1.0 / (2.0 * m_norm + 1.0 / beta);
    QuadProxResult r;
    r.y = z.cwiseMax(lo).cwiseMin(hi);
    Vector next(z.size());
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        next.noalias() = r.y - t * (2.0 * (m * r.y) + (r.y - z) / beta);
        next = next.cwiseMax(lo).cwiseMin(hi);
        r.residual = (next - r.y).norm();
        r.y.swap(next);
        if (r.residual <= tol) return r;
    }
    throw ConvergenceError("prox_quadform_box: iteration cap reached, residual " + std::to_string(r.residual),
                           r.residual);
}

}  // namespace detail

/// Minimizer over the box of y'My + ||y - z||^2 / (2 beta).
inline QuadProxResult prox_quadform_box(const Matrix& m, const Vector& z, double beta, const Box& box,
                                        double tol = kDefaultProxTol) {
    detail::require(beta > 0.0, "prox_quadform_box: beta must be positive");
    detail::require(tol > 0.0, "prox_quadform_box: tolerance must be positive");
    detail::require(z.size() == box.dim(), "prox_quadform_box: dimension mismatch");
    std::vector<Index> coords(static_cast<std::size_t>(box.dim()));
    for (Index i = 0; i < box.dim(); ++i) coords[static_cast<std::size_t>(i)] = i;
    const auto piece = BlockPiece::quadform(std::move(coords), m);  // validates symmetry and PSD
    return detail::quadform_prox(m, piece.matrix_norm(), z, beta, box.lower(), box.upper(), tol);
}

struct ProxResult {
    Vector x;
    bool below_certified_beta = false;
};

/// Exact constrained prox of a separable component: each piece's block is
/// solved on its own, untouched coordinates are projected onto the box.
inline ProxResult prox_component(const Component& c, const Vector& z, double beta, const Box& box,
                                 double tol = kDefaultProxTol) {
    detail::require(z.size() == box.dim(), "prox_component: dimension mismatch");
    detail::require(beta > 0.0, "prox_component: beta must be positive");
    ProxResult out{project_box(box, z), beta < c.beta_min()};
    for (const auto& piece : c.pieces()) {
        const auto& coords = piece.coords();
        switch (piece.kind()) {
            case PieceKind::NegQuad1D: {
                const Index i = coords.front();
                out.x[i] = prox_negquad_1d(z[i], beta, Interval{box.lower()[i], box.upper()[i]});
                break;
            }
            case PieceKind::LinLog1D: {
                const Index i = coords.front();
                const auto s = prox_linlog_1d(z[i], beta, Interval{box.lower()[i], box.upper()[i]});
                out.x[i] = s.y;
                out.below_certified_beta = out.below_certified_beta || s.below_certified_beta;
                break;
            }
            case PieceKind::QuadForm: {
                const Box sub = box.restrict_to(coords);
                const auto r = detail::quadform_prox(piece.matrix(), piece.matrix_norm(), piece.gather(z), beta,
                                                     sub.lower(), sub.upper(), tol);
                piece.scatter(r.y, out.x);
                break;
            }
        }
    }
    return out;
}

/// Value of the proximal subproblem at beta = 1/alpha:
/// h(xbar) + (alpha/2) ||z - xbar||^2.
inline double moreau_envelope(const Component& c, const Vector& z, const Box& box, double tol = kDefaultProxTol) {
    const double alpha = c.modulus();
    const Vector xbar = prox_component(c, z, 1.0 / alpha, box, tol).x;
    return evaluate_component(c, xbar, box.dim()) + 0.5 * alpha * (z - xbar).squaredNorm();
}

}  // namespace proxsplit
