#pragma once

#include "kaczmarz/matrix.hpp"

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

// Independent reference arithmetic for tests. Nothing here calls the library's
// factorization or solver code.
namespace testutil {

using kaczmarz::Matrix;
using kaczmarz::Vector;

inline Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = rows.begin()->size();
    std::vector<double> rm;
    for (const auto& r : rows) rm.insert(rm.end(), r.begin(), r.end());
    return Matrix::dense_row_major(m, n, rm);
}

// Dense row-major copy via element access.
inline std::vector<std::vector<double>> to_rows(const Matrix& a) {
    std::vector<std::vector<double>> out(a.rows(), std::vector<double>(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i][j] = a.at(i, j);
    return out;
}

inline Vector matvec(const std::vector<std::vector<double>>& a, const Vector& x) {
    Vector y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

inline Vector matvec_t(const std::vector<std::vector<double>>& a, const Vector& y) {
    Vector x(a.empty() ? 0 : a[0].size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += a[i][j] * y[i];
    return x;
}

inline double nrm(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline Vector minus(const Vector& a, const Vector& b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

// Gaussian elimination with partial pivoting on a square system.
inline Vector solve_square(std::vector<std::vector<double>> a, Vector b) {
    const std::size_t n = a.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        if (a[c][c] == 0.0) throw std::runtime_error("singular");
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    Vector x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// Least-squares solution of a full-column-rank system via the normal equations.
inline Vector lstsq_full_column_rank(const std::vector<std::vector<double>>& a, const Vector& b) {
    const std::size_t n = a[0].size();
    std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
    for (const auto& row : a)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g[i][j] += row[i] * row[j];
    return solve_square(g, matvec_t(a, b));
}

// Minimum-norm solution of a full-row-rank system: x = A^T (A A^T)^{-1} b.
inline Vector minnorm_full_row_rank(const std::vector<std::vector<double>>& a, const Vector& b) {
    const std::size_t m = a.size();
    std::vector<std::vector<double>> g(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < a[0].size(); ++k) g[i][j] += a[i][k] * a[j][k];
    return matvec_t(a, solve_square(g, b));
}

} // namespace testutil
