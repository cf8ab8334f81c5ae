#include "kaczmarz/rates.hpp"

#include "kaczmarz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kaczmarz {

double compute_delta(const Svd& f, double fro_sq, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("compute_delta: alpha must be positive");
    const double s1 = f.sigma.front() * f.sigma.front();
    const double sr = f.sigma.back() * f.sigma.back();
    return std::max(std::abs(1.0 - alpha * s1 / fro_sq), std::abs(1.0 - alpha * sr / fro_sq));
}

OptimalStep optimal_alpha(const Svd& f, double fro_sq) {
    const double s1 = f.sigma.front() * f.sigma.front();
    const double sr = f.sigma.back() * f.sigma.back();
    return {2.0 * fro_sq / (s1 + sr), (s1 - sr) / (s1 + sr)};
}

double block_beta_max(const Matrix& a, const Partition& p) {
    double beta = 0.0;
    for (const auto& block : p.blocks) {
        const BlockView view(a, p.axis, block);
        const double fro = block_frobenius_sq(a, view);
        if (!(fro > 0.0)) throw DataError("block_beta_max: zero block");
        // A single row or column is rank one: ||.||_2 = ||.||_F.
        const double spectral = block.size() == 1 ? fro : spectral_norm_sq(extract_block(view));
        beta = std::max(beta, spectral / fro);
    }
    return beta;
}

BetaMax compute_beta_max(const Matrix& a, const Partition& row_p, const Partition& col_p) {
    if (row_p.axis != Axis::Row || col_p.axis != Axis::Column)
        throw std::invalid_argument("compute_beta_max: partitions given on the wrong axes");
    const double r = block_beta_max(a, row_p);
    const double c = block_beta_max(a, col_p);
    return {r, c, std::max(r, c)};
}

EtaRho compute_eta_rho(double beta_rows, double beta_cols, double sigma_r_sq, double fro_sq, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("compute_eta_rho: alpha must be positive");
    const double beta = std::max(beta_rows, beta_cols);
    const double ratio = sigma_r_sq / fro_sq;
    EtaRho out{};
    out.eta = 1.0 - (2.0 * alpha - alpha * alpha * beta_rows) * ratio;
    out.rho = 1.0 - (2.0 * alpha - alpha * alpha * beta_cols) * ratio;
    out.rho_hat = 1.0 - (2.0 * alpha - alpha * alpha * beta) * ratio;
    out.guaranteed = alpha < 2.0 / beta;
    return out;
}

RateConstants with_alpha(RateConstants c, double alpha) {
    c.alpha = alpha;
    const double s1 = c.sigma1_sq;
    const double sr = c.sigma_r_sq;
    c.delta = std::max(std::abs(1.0 - alpha * s1 / c.fro_sq), std::abs(1.0 - alpha * sr / c.fro_sq));
    const EtaRho er = compute_eta_rho(c.beta_max_rows, c.beta_max_cols, sr, c.fro_sq, alpha);
    c.eta = er.eta;
    c.rho = er.rho;
    c.rho_hat = er.rho_hat;
    c.guaranteed = er.guaranteed;
    return c;
}

RateConstants compute_rate_constants(const Matrix& a, const Svd& f, const Partition& row_p, const Partition& col_p,
                                     double alpha) {
    RateConstants c;
    c.sigma1_sq = f.sigma.front() * f.sigma.front();
    c.sigma_r_sq = f.sigma.back() * f.sigma.back();
    c.fro_sq = frobenius_norm_sq(a);
    const BetaMax beta = compute_beta_max(a, row_p, col_p);
    c.beta_max_rows = beta.rows;
    c.beta_max_cols = beta.cols;
    c.beta_max = beta.max;
    const OptimalStep opt = optimal_alpha(f, c.fro_sq);
    c.alpha_opt = opt.alpha;
    c.delta_opt = opt.delta;
    return with_alpha(c, alpha);
}

double default_epsilon(double rho_hat) { return (1.0 - rho_hat) / (2.0 * rho_hat); }

TheoremBounds theorem_bounds(const RateConstants& c, const BoundInputs& in, std::size_t k, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("theorem_bounds: epsilon must be positive");
    const double kd = static_cast<double>(k);
    TheoremBounds out{};
    out.expected_error_norm = std::pow(c.delta, kd) * (in.x0_err + c.alpha * kd * in.at_z0_norm / c.fro_sq);

    const double x0_sq = in.x0_err * in.x0_err;
    const double z0_sq = in.z0_perp_err * in.z0_perp_err;
    const double grown_eta = (1.0 + epsilon) * c.eta;
    double sum = 0.0;
    for (std::size_t l = 0; l < k; ++l)
        sum += std::pow(c.rho, static_cast<double>(k - l)) * std::pow(grown_eta, static_cast<double>(l));
    const double coupling = c.alpha * c.alpha * c.beta_max_rows * z0_sq / c.fro_sq;
    out.mean_square = std::pow(grown_eta, kd) * x0_sq + (1.0 + 1.0 / epsilon) * coupling * sum;
    out.mean_square_closed = std::pow((1.0 + epsilon) * c.rho_hat, kd) *
                             (x0_sq + (1.0 + epsilon) * coupling / (epsilon * epsilon));
    out.z_mean_square = std::pow(c.rho, kd) * z0_sq;
    return out;
}

} // namespace kaczmarz
