#pragma once

#include "kaczmarz/factorizations.hpp"
#include "kaczmarz/matrix.hpp"
#include "kaczmarz/partition.hpp"

#include <cstddef>

namespace kaczmarz {

/// max over all nonzero singular values of |1 - alpha sigma_i^2 / ||A||_F^2|.
/// The maximum is attained at sigma_1 or sigma_r.
double compute_delta(const Svd& f, double fro_sq, double alpha);

struct OptimalStep {
    double alpha; ///< 2 ||A||_F^2 / (sigma_1^2 + sigma_r^2)
    double delta; ///< (sigma_1^2 - sigma_r^2) / (sigma_1^2 + sigma_r^2)
};

OptimalStep optimal_alpha(const Svd& f, double fro_sq);

/// max over blocks of ||A_block||_2^2 / ||A_block||_F^2.
double block_beta_max(const Matrix& a, const Partition& p);

struct BetaMax {
    double rows;
    double cols;
    double max;
};

BetaMax compute_beta_max(const Matrix& a, const Partition& row_p, const Partition& col_p);

struct EtaRho {
    double eta;
    double rho;
    double rho_hat;
    bool guaranteed; ///< alpha < 2 / max(beta_rows, beta_cols)
};

EtaRho compute_eta_rho(double beta_rows, double beta_cols, double sigma_r_sq, double fro_sq, double alpha);

struct RateConstants {
    double sigma1_sq = 0.0;
    double sigma_r_sq = 0.0;
    double fro_sq = 0.0;
    double beta_max_rows = 0.0;
    double beta_max_cols = 0.0;
    double beta_max = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    double eta = 0.0;
    double rho = 0.0;
    double rho_hat = 0.0;
    bool guaranteed = false;
    double alpha_opt = 0.0;
    double delta_opt = 0.0;
};

RateConstants compute_rate_constants(const Matrix& a, const Svd& f, const Partition& row_p, const Partition& col_p,
                                     double alpha);
/// Re-evaluates the alpha-dependent constants, keeping the spectral data.
RateConstants with_alpha(RateConstants c, double alpha);

/// Default bound slack epsilon = (1 - rho_hat) / (2 rho_hat); keeps (1+eps) rho_hat < 1.
double default_epsilon(double rho_hat);

struct BoundInputs {
    double x0_err = 0.0;      ///< ||x^0 - A^+ b||_2
    double z0_perp_err = 0.0; ///< ||z^0 - b_perp||_2
    double at_z0_norm = 0.0;  ///< ||A^T z^0||_2
};

struct TheoremBounds {
    /// delta^k (||x0 - A^+b|| + alpha k ||A^T z0|| / ||A||_F^2), bounds ||E[x^k] - A^+b||.
    double expected_error_norm;
    /// Exact-sum bound on E||x^k - A^+b||^2:
    /// (1+eps)^k eta^k x0^2 + (1+1/eps) alpha^2 beta_I z0^2 / ||A||_F^2 sum_{l<k} rho^{k-l} ((1+eps) eta)^l.
    double mean_square;
    /// Looser closed form (1+eps)^k rho_hat^k (x0^2 + (1+eps) alpha^2 beta_I z0^2 / (eps^2 ||A||_F^2)).
    double mean_square_closed;
    /// rho^k ||z0 - b_perp||^2, bounds E||z^k - b_perp||^2.
    double z_mean_square;
};

TheoremBounds theorem_bounds(const RateConstants& c, const BoundInputs& in, std::size_t k, double epsilon);

} // namespace kaczmarz
