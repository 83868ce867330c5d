#pragma once

// Domain types for box-constrained finite-sum problems whose components are
// separable sums of structured pieces, plus the evaluators that act on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace proxsplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when an iterative inner solver hits its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Raised for run configurations the theory does not cover (e.g. a stepsize
/// below a component's certified minimum).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline double spectral_norm_sym(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
}
}  // namespace detail

class Box {
public:
    Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        detail::require(lower_.size() == upper_.size(), "Box: bound vectors differ in length");
        detail::require(lower_.size() > 0, "Box: dimension must be positive");
        for (Index i = 0; i < lower_.size(); ++i) {
            detail::require(std::isfinite(lower_[i]) && std::isfinite(upper_[i]), "Box: bounds must be finite");
            detail::require(lower_[i] <= upper_[i], "Box: lower bound exceeds upper bound at coordinate " + std::to_string(i));
        }
    }

    Index dim() const noexcept { return lower_.size(); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }

    Vector midpoint() const { return 0.5 * (lower_ + upper_); }

    bool contains(const Vector& x) const {
        if (x.size() != dim()) return false;
        for (Index i = 0; i < dim(); ++i)
            if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
        return true;
    }

    /// Box restricted to the given coordinates, in order.
    Box restrict_to(const std::vector<Index>& coords) const {
        Vector lo(static_cast<Index>(coords.size())), hi(static_cast<Index>(coords.size()));
        for (std::size_t j = 0; j < coords.size(); ++j) {
            lo[static_cast<Index>(j)] = lower_[coords[j]];
            hi[static_cast<Index>(j)] = upper_[coords[j]];
        }
        return Box(std::move(lo), std::move(hi));
    }

    bool operator==(const Box&) const = default;

private:
    Vector lower_;
    Vector upper_;
};

/// Coordinatewise clamp onto the box.
inline Vector project_box(const Box& b, const Vector& x) {
    detail::require(x.size() == b.dim(), "project_box: dimension mismatch");
    return x.cwiseMax(b.lower()).cwiseMin(b.upper());
}

enum class PieceKind {
    NegQuad1D,  // h(t) = -t^2 - t
    LinLog1D,   // h(t) = 5t + ln(10t + 1)
    QuadForm,   // h(u) = u' M u, M symmetric PSD
};

inline const char* to_string(PieceKind k) {
    switch (k) {
        case PieceKind::NegQuad1D: return "negquad";
        case PieceKind::LinLog1D: return "linlog";
        case PieceKind::QuadForm: return "quadform";
    }
    return "?";
}

namespace scalar {
inline double negquad(double t) { return -t * t - t; }
inline double negquad_slope(double t) { return -2.0 * t - 1.0; }
inline double linlog(double t) { return 5.0 * t + std::log(10.0 * t + 1.0); }
inline double linlog_slope(double t) { return 5.0 + 10.0 / (10.0 * t + 1.0); }
}  // namespace scalar

/// One term of a component, reading a fixed ordered set of coordinates.
class BlockPiece {
public:
    static constexpr double kPsdTolerance = 1e-8;

    static BlockPiece negquad(Index coord) { return BlockPiece(PieceKind::NegQuad1D, {coord}, Matrix()); }
    static BlockPiece linlog(Index coord) { return BlockPiece(PieceKind::LinLog1D, {coord}, Matrix()); }
    static BlockPiece quadform(std::vector<Index> coords, Matrix m) {
        return BlockPiece(PieceKind::QuadForm, std::move(coords), std::move(m));
    }

    PieceKind kind() const noexcept { return kind_; }
    const std::vector<Index>& coords() const noexcept { return coords_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    /// ||M||_2 for QuadForm, 0 otherwise.
    double matrix_norm() const noexcept { return matrix_norm_; }

    Vector gather(const Vector& x) const {
        Vector u(static_cast<Index>(coords_.size()));
        for (std::size_t j = 0; j < coords_.size(); ++j) u[static_cast<Index>(j)] = x[coords_[j]];
        return u;
    }

    void scatter(const Vector& u, Vector& x) const {
        for (std::size_t j = 0; j < coords_.size(); ++j) x[coords_[j]] = u[static_cast<Index>(j)];
    }

    /// Value on the restricted coordinates u.
    double value_local(const Vector& u) const {
        switch (kind_) {
            case PieceKind::NegQuad1D: return scalar::negquad(u[0]);
            case PieceKind::LinLog1D: return scalar::linlog(u[0]);
            case PieceKind::QuadForm: return u.dot(matrix_ * u);
        }
        return 0.0;
    }

    double value(const Vector& x) const { return value_local(gather(x)); }

    Vector gradient_local(const Vector& u) const {
        switch (kind_) {
            case PieceKind::NegQuad1D: return Vector::Constant(1, scalar::negquad_slope(u[0]));
            case PieceKind::LinLog1D: return Vector::Constant(1, scalar::linlog_slope(u[0]));
            case PieceKind::QuadForm: return 2.0 * (matrix_ * u);
        }
        return Vector();
    }

    /// Analytic Lipschitz bound of the piece on the sub-box.
    double lipschitz_on(const Box& sub) const {
        switch (kind_) {
            case PieceKind::NegQuad1D:
                return std::max(std::abs(2.0 * sub.lower()[0] + 1.0), std::abs(2.0 * sub.upper()[0] + 1.0));
            case PieceKind::LinLog1D: return scalar::linlog_slope(sub.lower()[0]);
            case PieceKind::QuadForm: {
                double sq = 0.0;
                for (Index i = 0; i < sub.dim(); ++i) {
                    const double m = std::max(std::abs(sub.lower()[i]), std::abs(sub.upper()[i]));
                    sq += m * m;
                }
                return 2.0 * matrix_norm_ * std::sqrt(sq);
            }
        }
        return 0.0;
    }

    /// Lower bound on the smallest Hessian eigenvalue over the sub-box.
    Matrix hessian_lower_bound(const Box& sub) const {
        switch (kind_) {
            case PieceKind::NegQuad1D: return Matrix::Constant(1, 1, -2.0);
            case PieceKind::LinLog1D: {
                const double s = 10.0 * sub.lower()[0] + 1.0;
                return Matrix::Constant(1, 1, -100.0 / (s * s));
            }
            case PieceKind::QuadForm: return 2.0 * matrix_;
        }
        return Matrix();
    }

    bool operator==(const BlockPiece& o) const {
        return kind_ == o.kind_ && coords_ == o.coords_ && matrix_.rows() == o.matrix_.rows() &&
               matrix_.cols() == o.matrix_.cols() && matrix_ == o.matrix_;
    }

private:
    BlockPiece(PieceKind kind, std::vector<Index> coords, Matrix m)
        : kind_(kind), coords_(std::move(coords)), matrix_(std::move(m)) {
        detail::require(!coords_.empty(), "BlockPiece: empty coordinate set");
        for (std::size_t j = 0; j < coords_.size(); ++j) {
            detail::require(coords_[j] >= 0, "BlockPiece: negative coordinate");
            if (j > 0) detail::require(coords_[j - 1] < coords_[j], "BlockPiece: coordinates must be strictly increasing");
        }
        if (kind_ != PieceKind::QuadForm) {
            detail::require(coords_.size() == 1, "BlockPiece: scalar pieces read exactly one coordinate");
            return;
        }
        const auto d = static_cast<Index>(coords_.size());
        detail::require(matrix_.rows() == d && matrix_.cols() == d, "BlockPiece: matrix size does not match coordinates");
        detail::require(matrix_.allFinite(), "BlockPiece: matrix has non-finite entries");
        const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        matrix_norm_ = std::max(std::abs(lmin), std::abs(es.eigenvalues().maxCoeff()));
        detail::require(asym <= kPsdTolerance * std::max(1.0, matrix_norm_), "BlockPiece: matrix is not symmetric");
        detail::require(lmin >= -kPsdTolerance * matrix_norm_, "BlockPiece: matrix is not positive semidefinite");
    }

    PieceKind kind_;
    std::vector<Index> coords_;
    Matrix matrix_;
    double matrix_norm_ = 0.0;
};

/// Separable sum of pieces over pairwise-disjoint coordinate blocks.
class Component {
public:
    explicit Component(std::vector<BlockPiece> pieces, double modulus = 1.0, double beta_min = 0.0)
        : pieces_(std::move(pieces)), modulus_(modulus), beta_min_(beta_min) {
        detail::require(modulus_ > 0.0, "Component: modulus must be positive");
        detail::require(beta_min_ >= 0.0, "Component: betaMin must be nonnegative");
        std::vector<Index> all;
        for (const auto& p : pieces_) all.insert(all.end(), p.coords().begin(), p.coords().end());
        std::sort(all.begin(), all.end());
        detail::require(std::adjacent_find(all.begin(), all.end()) == all.end(),
                        "Component: piece coordinate sets overlap");
        max_coord_ = all.empty() ? -1 : all.back();
    }

    /// Modulus and betaMin derived from the piece kinds (1 and the largest
    /// per-kind minimum: 1/5 for LinLog1D, 0 otherwise).
    static Component from_pieces(std::vector<BlockPiece> pieces) {
        double bmin = 0.0;
        for (const auto& p : pieces)
            if (p.kind() == PieceKind::LinLog1D) bmin = std::max(bmin, 0.2);
        return Component(std::move(pieces), 1.0, bmin);
    }

    const std::vector<BlockPiece>& pieces() const noexcept { return pieces_; }
    double modulus() const noexcept { return modulus_; }
    double beta_min() const noexcept { return beta_min_; }
    Index max_coord() const noexcept { return max_coord_; }

    double lipschitz_on(const Box& box) const {
        double sq = 0.0;
        for (const auto& p : pieces_) {
            const double l = p.lipschitz_on(box.restrict_to(p.coords()));
            sq += l * l;
        }
        return std::sqrt(sq);
    }

    Vector gradient(const Vector& x) const {
        Vector g = Vector::Zero(x.size());
        for (const auto& p : pieces_) p.scatter(p.gradient_local(p.gather(x)), g);
        return g;
    }

    bool operator==(const Component&) const = default;

private:
    std::vector<BlockPiece> pieces_;
    double modulus_;
    double beta_min_;
    Index max_coord_ = -1;
};

inline double evaluate_component(const Component& c, const Vector& x, Index dim) {
    detail::require(x.size() == dim, "evaluate_component: dimension mismatch");
    double v = 0.0;
    for (const auto& p : c.pieces()) v += p.value(x);
    return v;
}

class Problem {
public:
    Problem(Box box, std::vector<Component> components)
        : box_(std::move(box)), components_(std::move(components)) {
        detail::require(!components_.empty(), "Problem: needs at least one component");
        modulus_ = components_.front().modulus();
        for (const auto& c : components_) {
            detail::require(c.max_coord() < box_.dim(), "Problem: component reads a coordinate outside the box");
            lipschitz_ = std::max(lipschitz_, c.lipschitz_on(box_));
            modulus_ = std::min(modulus_, c.modulus());
        }
        // All-zero problems still need a positive constant.
        if (lipschitz_ <= 0.0) lipschitz_ = 1.0;
    }

    const Box& box() const noexcept { return box_; }
    Index dim() const noexcept { return box_.dim(); }
    const std::vector<Component>& components() const noexcept { return components_; }
    std::size_t size() const noexcept { return components_.size(); }
    double lipschitz() const noexcept { return lipschitz_; }
    double modulus() const noexcept { return modulus_; }

    /// Copy with the Lipschitz constant overridden; used only by checker mutation tests.
    Problem with_lipschitz(double l) const {
        Problem p = *this;
        p.lipschitz_ = l;
        return p;
    }

    bool operator==(const Problem&) const = default;

private:
    Box box_;
    std::vector<Component> components_;
    double lipschitz_ = 0.0;
    double modulus_ = 1.0;
};

inline double evaluate_component(const Problem& p, std::size_t i, const Vector& x) {
    return evaluate_component(p.components().at(i), x, p.dim());
}

inline double evaluate_objective(const Problem& p, const Vector& x) {
    detail::require(x.size() == p.dim(), "evaluate_objective: dimension mismatch");
    double v = 0.0;
    for (const auto& c : p.components()) v += evaluate_component(c, x, p.dim());
    return v;
}

inline Vector objective_gradient(const Problem& p, const Vector& x) {
    detail::require(x.size() == p.dim(), "objective_gradient: dimension mismatch");
    Vector g = Vector::Zero(p.dim());
    for (const auto& c : p.components()) g += c.gradient(x);
    return g;
}

/// beta_k = c / (k+1)^p with p in (1/2, 1].
struct Schedule {
    double c = 1.0;
    double p = 1.0;

    double operator()(std::uint64_t k) const { return c / std::pow(static_cast<double>(k) + 1.0, p); }
};

inline Schedule make_schedule(double c, double p) {
    detail::require(c > 0.0 && std::isfinite(c), "make_schedule: scale must be positive");
    detail::require(p > 0.5 && p <= 1.0, "make_schedule: exponent must lie in (1/2, 1]");
    return Schedule{c, p};
}

struct StoppingRule {
    double epsilon = 1e-8;
    std::uint64_t max_outer = 100000;
};

inline StoppingRule make_stopping_rule(double epsilon, std::uint64_t max_outer) {
    detail::require(epsilon > 0.0, "StoppingRule: epsilon must be positive");
    detail::require(max_outer >= 1, "StoppingRule: maxOuter must be at least 1");
    return StoppingRule{epsilon, max_outer};
}

enum class Method { Permuted, Cyclic, Stochastic };
enum class Termination { EpsilonReached, MaxIterations };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Permuted: return "permuted";
        case Method::Cyclic: return "cyclic";
        case Method::Stochastic: return "stochastic";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "permuted") return Method::Permuted;
    if (s == "cyclic") return Method::Cyclic;
    if (s == "stochastic") return Method::Stochastic;
    throw std::invalid_argument("unknown method '" + s + "'");
}

struct TraceRecord {
    std::uint64_t k = 0;
    double step_norm = 0.0;   // ||x_{k+1} - x_k|| (cycle endpoints for Method 1)
    double f_value = 0.0;     // f(x_k)
    std::optional<double> dist_to_oracle;  // ||x_k - x*||, when an oracle point was supplied
    double elapsed_ms = 0.0;
};

/// One run. For Method 1 the retained iterates are the inner sequence
/// x_0, x_1, ..., x_{KN}; `stride` is N for Method 1 and 1 for Method 2.
struct Trace {
    Method method = Method::Cyclic;
    std::uint64_t seed = 0;
    Schedule schedule;
    StoppingRule stop;
    Termination terminated = Termination::MaxIterations;
    std::vector<TraceRecord> records;
    std::optional<std::vector<Vector>> iterates;
    std::size_t stride = 1;
    Vector final_point;
    double final_value = 0.0;
    bool below_certified_beta = false;

    std::size_t iterations() const noexcept { return records.size(); }
};

}  // namespace proxsplit
