#pragma once

#include "proxsplit/proxsplit.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <string>

namespace proxsplit::test {

inline Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Index>(v.size()));
    Index i = 0;
    for (const double d : v) x[i++] = d;
    return x;
}

inline Box uniform_box(Index n, double lo, double hi) {
    return Box(Vector::Constant(n, lo), Vector::Constant(n, hi));
}

/// One QuadForm component over all coordinates of `box`.
inline Component quad_component(const Matrix& m) {
    std::vector<Index> all(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
    return Component::from_pieces({BlockPiece::quadform(all, m)});
}

inline Problem scalar_quad_problem(double m, double hi) {
    return Problem(uniform_box(1, 0.0, hi), {quad_component(Matrix::Constant(1, 1, m))});
}

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("proxsplit_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace proxsplit::test
