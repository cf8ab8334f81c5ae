#include "kaczmarz/problem_gen.hpp"

#include "kaczmarz/errors.hpp"
#include "kaczmarz/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kaczmarz {

namespace {

std::vector<double> gaussian_matrix(std::size_t p, std::size_t q, Rng& rng) {
    std::vector<double> out(p * q);
    for (double& v : out) v = rng.normal();
    return out;
}

constexpr double kConsistencyTol = 1e-8;

} // namespace

void orthonormalize_columns(std::vector<double>& a, std::size_t p, std::size_t q) {
    if (q > p) throw std::invalid_argument("orthonormalize_columns: more columns than rows");
    for (std::size_t j = 0; j < q; ++j) {
        std::span<double> cj(a.data() + j * p, p);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                std::span<const double> ck(a.data() + k * p, p);
                const double c = dot(ck, cj);
                for (std::size_t i = 0; i < p; ++i) cj[i] -= c * ck[i];
            }
        }
        const double nrm = norm2(cj);
        if (nrm == 0.0) throw DataError("orthonormalize_columns: rank-deficient input");
        for (double& v : cj) v /= nrm;
    }
}

Matrix gen_type1(std::size_t m, std::size_t n, std::size_t r, double kappa, std::uint64_t seed) {
    if (m == 0 || n == 0) throw std::invalid_argument("gen_type1: dimensions must be positive");
    if (r < 1 || r > std::min(m, n))
        throw std::invalid_argument("gen_type1: rank " + std::to_string(r) + " outside [1, min(m, n)]");
    if (!(kappa > 1.0)) throw std::invalid_argument("gen_type1: kappa must exceed 1");

    Rng rng(seed);
    std::vector<double> u = gaussian_matrix(m, r, rng);
    std::vector<double> v = gaussian_matrix(n, r, rng);
    orthonormalize_columns(u, m, r);
    orthonormalize_columns(v, n, r);
    std::vector<double> d(r);
    for (double& x : d) x = 1.0 + (kappa - 1.0) * rng.uniform_open();

    // A = U D V^T, column-major.
    std::vector<double> a(m * n, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
        const double* uk = u.data() + k * m;
        const double* vk = v.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = d[k] * vk[j];
            double* aj = a.data() + j * m;
            for (std::size_t i = 0; i < m; ++i) aj[i] += c * uk[i];
        }
    }
    return Matrix::dense(m, n, std::move(a));
}

Matrix gen_type2(std::size_t m, std::size_t n, std::uint64_t seed) {
    if (m == 0 || n == 0) throw std::invalid_argument("gen_type2: dimensions must be positive");
    Rng rng(seed);
    return Matrix::dense(m, n, gaussian_matrix(m, n, rng));
}

ProblemInstance make_rhs(Matrix a, std::uint64_t seed, bool inconsistent, double perp_scale) {
    auto f = std::make_shared<const Svd>(svd(a));
    return make_rhs(std::move(a), std::move(f), seed, inconsistent, perp_scale);
}

ProblemInstance make_rhs(Matrix a, std::shared_ptr<const Svd> factorization, std::uint64_t seed, bool inconsistent,
                         double perp_scale) {
    if (!factorization) throw std::invalid_argument("make_rhs: missing factorization");
    if (inconsistent && factorization->rank() >= a.rows()) throw NoResidualPossible();
    Rng rng(seed);
    Vector x_gen(a.cols());
    for (double& v : x_gen) v = rng.normal();
    std::optional<Vector> w;
    if (inconsistent) {
        w.emplace(a.rows());
        for (double& v : *w) v = rng.normal();
    }
    ProblemInstance p = make_rhs_from(std::move(a), std::move(factorization), x_gen, std::move(w), perp_scale);
    p.meta.seed = seed;
    return p;
}

ProblemInstance make_rhs_from(Matrix a, std::shared_ptr<const Svd> factorization, std::span<const double> x_gen,
                              std::optional<Vector> w, double perp_scale) {
    if (!factorization) throw std::invalid_argument("make_rhs: missing factorization");
    const Svd& f = *factorization;
    const bool inconsistent = w.has_value();
    if (inconsistent && f.rank() >= a.rows()) throw NoResidualPossible();

    Vector b = a.multiply(x_gen);
    if (inconsistent) {
        const ResidualSplit split = residual_split(f, *w);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += perp_scale * split.perp[i];
    }

    ProblemInstance p;
    p.x_star = pinv_apply(f, b);
    p.b_perp = residual_split(f, b).perp;
    p.meta.declared_rank = f.rank();
    p.meta.perp_scale = perp_scale;
    p.meta.residual_norm = norm2(p.b_perp);
    p.meta.consistent = p.meta.residual_norm <= kConsistencyTol * norm2(b);
    if (inconsistent && p.meta.consistent) throw NoResidualPossible();
    p.a = std::move(a);
    p.b = std::move(b);
    p.factorization = std::move(factorization);
    return p;
}

ProblemInstance make_instance(Matrix a, Vector b) {
    if (b.size() != a.rows()) throw std::invalid_argument("make_instance: rhs length does not match rows");
    auto f = std::make_shared<const Svd>(svd(a));
    ProblemInstance p;
    p.x_star = pinv_apply(*f, b);
    p.b_perp = residual_split(*f, b).perp;
    p.meta.declared_rank = f->rank();
    p.meta.residual_norm = norm2(p.b_perp);
    p.meta.consistent = p.meta.residual_norm <= kConsistencyTol * norm2(b);
    p.a = std::move(a);
    p.b = std::move(b);
    p.factorization = std::move(f);
    return p;
}

} // namespace kaczmarz
