#pragma once

#include "kaczmarz/factorizations.hpp"
#include "kaczmarz/matrix.hpp"

#include <cstdint>
#include <memory>
#include <optional>

namespace kaczmarz {

struct ProblemMeta {
    std::size_t declared_rank = 0;
    std::optional<double> kappa_bound;
    bool consistent = true;
    std::uint64_t seed = 0;
    double residual_norm = 0.0; ///< ||b_perp||_2
    double perp_scale = 1.0;
};

/// A linear system with its oracle data: x_star = A^+ b and
/// b_perp = (I - A A^+) b.
struct ProblemInstance {
    Matrix a;
    Vector b;
    Vector x_star;
    Vector b_perp;
    ProblemMeta meta;
    /// Oracle factorization of A; absent for instances loaded without one.
    std::shared_ptr<const Svd> factorization;
};

/// A = U D V^T with orthonormal U (m x r), V (n x r) and D uniform on (1, kappa).
Matrix gen_type1(std::size_t m, std::size_t n, std::size_t r, double kappa, std::uint64_t seed);

/// i.i.d. standard normal entries.
Matrix gen_type2(std::size_t m, std::size_t n, std::uint64_t seed);

/// b = A x_gen (+ perp_scale * (I - A A^+) w when inconsistent), with x_gen and
/// w standard normal. Throws NoResidualPossible when an inconsistent system is
/// requested but null(A^T) = {0}.
ProblemInstance make_rhs(Matrix a, std::uint64_t seed, bool inconsistent, double perp_scale = 1.0);

/// Same as make_rhs but reuses an existing factorization of `a`.
ProblemInstance make_rhs(Matrix a, std::shared_ptr<const Svd> factorization, std::uint64_t seed, bool inconsistent,
                         double perp_scale = 1.0);

/// Deterministic core of make_rhs with explicit draws: b = A x_gen, plus
/// perp_scale * (I - A A^+) w when `w` is given.
ProblemInstance make_rhs_from(Matrix a, std::shared_ptr<const Svd> factorization, std::span<const double> x_gen,
                              std::optional<Vector> w, double perp_scale = 1.0);

/// Wraps a user-supplied system; computes the oracle by SVD.
ProblemInstance make_instance(Matrix a, Vector b);

/// Modified Gram-Schmidt with one reorthogonalization pass on a column-major
/// p x q matrix (q <= p). Exposed for testing.
void orthonormalize_columns(std::vector<double>& a, std::size_t p, std::size_t q);

} // namespace kaczmarz
