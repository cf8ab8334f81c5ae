#include "kaczmarz/factorizations.hpp"

#include "kaczmarz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kaczmarz {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 80;

// Column-major p x q scratch matrix.
struct Work {
    std::size_t p = 0;
    std::size_t q = 0;
    std::vector<double> a;

    double* col(std::size_t j) { return a.data() + j * p; }
    const double* col(std::size_t j) const { return a.data() + j * p; }
};

double dot_n(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void rotate(double* x, double* y, std::size_t n, double c, double s) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi - s * yi;
        y[i] = s * xi + c * yi;
    }
}

// Hestenes one-sided Jacobi: orthogonalizes the columns of g in place and
// accumulates the rotations into v (q x q, column-major, starts at I).
void one_sided_jacobi(Work& g, std::vector<double>& v) {
    const std::size_t p = g.p;
    const std::size_t q = g.q;
    v.assign(q * q, 0.0);
    for (std::size_t k = 0; k < q; ++k) v[k * q + k] = 1.0;

    std::vector<double> norms(q);
    for (std::size_t k = 0; k < q; ++k) norms[k] = dot_n(g.col(k), g.col(k), p);
    const double max_norm = *std::max_element(norms.begin(), norms.end());
    const double negligible = max_norm * kEps * kEps;
    const double threshold = kEps * std::sqrt(static_cast<double>(p));

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < q; ++i) {
            for (std::size_t j = i + 1; j < q; ++j) {
                const double alpha = norms[i];
                const double beta = norms[j];
                if (alpha <= negligible || beta <= negligible) continue;
                const double gamma = dot_n(g.col(i), g.col(j), p);
                if (std::abs(gamma) <= threshold * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(g.col(i), g.col(j), p, c, s);
                rotate(v.data() + i * q, v.data() + j * q, q, c, s);
                norms[i] = dot_n(g.col(i), g.col(i), p);
                norms[j] = dot_n(g.col(j), g.col(j), p);
            }
        }
        if (!rotated) return;
    }
}

// Householder QR of a tall p x q matrix (p >= q). Returns R (q x q) in `r`
// and overwrites `g` with the explicit thin Q (p x q).
void householder_qr(Work& g, Work& r) {
    const std::size_t p = g.p;
    const std::size_t q = g.q;
    std::vector<std::vector<double>> reflectors(q);
    std::vector<double> taus(q, 0.0);

    for (std::size_t k = 0; k < q; ++k) {
        double* ck = g.col(k);
        double norm_sq = 0.0;
        for (std::size_t i = k; i < p; ++i) norm_sq += ck[i] * ck[i];
        const double norm = std::sqrt(norm_sq);
        std::vector<double>& w = reflectors[k];
        w.assign(p - k, 0.0);
        if (norm == 0.0) continue;
        const double alpha = ck[k] >= 0.0 ? -norm : norm;
        for (std::size_t i = k; i < p; ++i) w[i - k] = ck[i];
        w[0] -= alpha;
        const double w_sq = dot_n(w.data(), w.data(), w.size());
        if (w_sq == 0.0) continue;
        taus[k] = 2.0 / w_sq;
        for (std::size_t j = k; j < q; ++j) {
            double* cj = g.col(j);
            const double proj = taus[k] * dot_n(w.data(), cj + k, w.size());
            for (std::size_t i = k; i < p; ++i) cj[i] -= proj * w[i - k];
        }
    }

    r.p = q;
    r.q = q;
    r.a.assign(q * q, 0.0);
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t i = 0; i <= j; ++i) r.a[j * q + i] = g.col(j)[i];

    // Q = H_0 H_1 ... H_{q-1} applied to the first q columns of I.
    std::fill(g.a.begin(), g.a.end(), 0.0);
    for (std::size_t j = 0; j < q; ++j) g.col(j)[j] = 1.0;
    for (std::size_t kk = q; kk-- > 0;) {
        if (taus[kk] == 0.0) continue;
        const std::vector<double>& w = reflectors[kk];
        for (std::size_t j = 0; j < q; ++j) {
            double* cj = g.col(j);
            const double proj = taus[kk] * dot_n(w.data(), cj + kk, w.size());
            for (std::size_t i = kk; i < p; ++i) cj[i] -= proj * w[i - kk];
        }
    }
}

} // namespace

Svd svd(const Matrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    std::vector<double> a = m.to_dense_col_major();
    for (double x : a)
        if (!std::isfinite(x)) throw DataError("svd: matrix has non-finite entries");
    if (std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; }))
        throw std::invalid_argument("svd: zero matrix");

    // Work on the tall orientation: g is p x q with p >= q.
    const bool transposed = rows < cols;
    Work g;
    g.p = transposed ? cols : rows;
    g.q = transposed ? rows : cols;
    if (!transposed) {
        g.a = std::move(a);
    } else {
        g.a.resize(rows * cols);
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t i = 0; i < rows; ++i) g.a[i * cols + j] = a[j * rows + i];
    }

    const bool use_qr = g.p >= 2 * g.q;
    Work jac;
    if (use_qr) {
        householder_qr(g, jac);
    } else {
        jac = g;
    }

    std::vector<double> v;
    one_sided_jacobi(jac, v);

    const std::size_t q = jac.q;
    std::vector<double> sig(q);
    for (std::size_t k = 0; k < q; ++k) sig[k] = std::sqrt(dot_n(jac.col(k), jac.col(k), jac.p));
    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

    const double sigma1 = sig[order.front()];
    const double tol = static_cast<double>(std::max(rows, cols)) * kEps * sigma1;
    std::size_t rank = 0;
    while (rank < q && sig[order[rank]] > tol) ++rank;

    // Left vectors in the working orientation (length p), right vectors (length q).
    std::vector<double> left(g.p * rank, 0.0);
    std::vector<double> right(q * rank);
    std::vector<double> sigma(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        const std::size_t src = order[k];
        sigma[k] = sig[src];
        const double* uc = jac.col(src);
        double* dst = left.data() + k * g.p;
        if (use_qr) {
            // left = Q * (R-side left vector)
            for (std::size_t t = 0; t < q; ++t) {
                const double coef = uc[t] / sigma[k];
                if (coef == 0.0) continue;
                const double* qc = g.col(t);
                for (std::size_t i = 0; i < g.p; ++i) dst[i] += coef * qc[i];
            }
        } else {
            for (std::size_t i = 0; i < g.p; ++i) dst[i] = uc[i] / sigma[k];
        }
        std::copy_n(v.data() + src * q, q, right.data() + k * q);
    }

    Svd f;
    f.rows = rows;
    f.cols = cols;
    f.sigma = std::move(sigma);
    f.rank_tol = tol;
    if (!transposed) {
        f.u = std::move(left);
        f.v = std::move(right);
    } else {
        f.u = std::move(right);
        f.v = std::move(left);
    }
    return f;
}

Vector pinv_apply(const Svd& f, std::span<const double> b) {
    if (b.size() != f.rows) throw std::invalid_argument("pinv_apply: rhs length mismatch");
    Vector x(f.cols, 0.0);
    for (std::size_t k = 0; k < f.rank(); ++k) {
        const double c = dot(f.u_col(k), b) / f.sigma[k];
        const auto vk = f.v_col(k);
        for (std::size_t i = 0; i < f.cols; ++i) x[i] += c * vk[i];
    }
    return x;
}

Vector project_range(const Svd& f, std::span<const double> y) {
    if (y.size() != f.rows) throw std::invalid_argument("project_range: length mismatch");
    Vector out(f.rows, 0.0);
    for (std::size_t k = 0; k < f.rank(); ++k) {
        const auto uk = f.u_col(k);
        const double c = dot(uk, y);
        for (std::size_t i = 0; i < f.rows; ++i) out[i] += c * uk[i];
    }
    return out;
}

Vector project_row_space(const Svd& f, std::span<const double> x) {
    if (x.size() != f.cols) throw std::invalid_argument("project_row_space: length mismatch");
    Vector out(f.cols, 0.0);
    for (std::size_t k = 0; k < f.rank(); ++k) {
        const auto vk = f.v_col(k);
        const double c = dot(vk, x);
        for (std::size_t i = 0; i < f.cols; ++i) out[i] += c * vk[i];
    }
    return out;
}

ResidualSplit residual_split(const Svd& f, std::span<const double> b) {
    ResidualSplit split;
    split.range = project_range(f, b);
    split.perp = subtract(b, split.range);
    return split;
}

std::size_t numerical_rank(const Svd& f) {
    return static_cast<std::size_t>(
        std::count_if(f.sigma.begin(), f.sigma.end(), [&](double s) { return s > f.rank_tol; }));
}

} // namespace kaczmarz
