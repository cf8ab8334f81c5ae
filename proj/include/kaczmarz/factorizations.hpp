#pragma once

#include "kaczmarz/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kaczmarz {

/// Thin SVD truncated at numerical rank: A ~= U diag(sigma) V^T.
///
/// `u` is m x r and `v` is n x r, both stored column-major. `sigma` is
/// strictly positive and nonincreasing. Singular values at or below
/// `rank_tol = max(m, n) * eps * sigma_1` are discarded.
struct Svd {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> u;
    std::vector<double> sigma;
    std::vector<double> v;
    double rank_tol = 0.0;

    std::size_t rank() const { return sigma.size(); }
    std::span<const double> u_col(std::size_t k) const { return {u.data() + k * rows, rows}; }
    std::span<const double> v_col(std::size_t k) const { return {v.data() + k * cols, cols}; }
};

/// One-sided Jacobi SVD. Sparse inputs are densified. Throws DataError on
/// non-finite entries and std::invalid_argument on the zero matrix.
Svd svd(const Matrix& m);

/// x = V diag(1/sigma) U^T b, the minimum-norm least-squares solution.
Vector pinv_apply(const Svd& f, std::span<const double> b);

struct ResidualSplit {
    Vector range; ///< A A^+ b
    Vector perp;  ///< b - A A^+ b, lies in null(A^T)
};

ResidualSplit residual_split(const Svd& f, std::span<const double> b);

/// A A^+ y, the orthogonal projection onto range(A).
Vector project_range(const Svd& f, std::span<const double> y);
/// A^+ A x, the orthogonal projection onto range(A^T).
Vector project_row_space(const Svd& f, std::span<const double> x);

/// Count of singular values above rank_tol.
std::size_t numerical_rank(const Svd& f);

} // namespace kaczmarz
