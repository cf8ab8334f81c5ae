#include "kaczmarz/solvers.hpp"

#include "kaczmarz/errors.hpp"
#include "kaczmarz/rates.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kaczmarz {

namespace {

constexpr Algorithm kAll[] = {Algorithm::RK,   Algorithm::REK,   Algorithm::RBK, Algorithm::RDBK,
                              Algorithm::RABK, Algorithm::DSBGS, Algorithm::REBK};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

const Partition& require_partition(const std::optional<Partition>& p, Axis axis, std::size_t len, Algorithm algo,
                                   const char* which) {
    if (!p)
        throw std::invalid_argument(std::string(to_string(algo)) + " requires a " + which + " partition");
    if (p->axis != axis || p->axis_len != len)
        throw std::invalid_argument(std::string(to_string(algo)) + ": " + which + " partition does not match matrix");
    return *p;
}

Partition singletons_or_check(const std::optional<Partition>& p, Axis axis, std::size_t len, Algorithm algo) {
    if (p && (!p->is_singletons() || p->axis != axis || p->axis_len != len))
        throw std::invalid_argument(std::string(to_string(algo)) + " works on single rows/columns only");
    return singleton_partition(axis, len);
}

std::vector<BlockFactor> factor_blocks(const Matrix& a, const Partition& p) {
    std::vector<BlockFactor> out;
    out.reserve(p.size());
    for (const auto& block : p.blocks) out.push_back({svd(extract_block(BlockView(a, p.axis, block)))});
    return out;
}

// x -= alpha/||A_I||_F^2 * A_I^T (A_I x - b_I + z_I); z may be empty.
void block_average_row_update(SolverState& s, const LinearSystem& sys, std::span<const std::size_t> rows,
                              double fro, double alpha, const Vector* z) {
    Vector& r = s.scratch;
    r.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t l = rows[k];
        double v = sys.a.row_dot(l, s.x) - sys.b[l];
        if (z) v += (*z)[l];
        r[k] = (alpha * v) / fro;
    }
    for (std::size_t k = 0; k < rows.size(); ++k) sys.a.row_axpy(rows[k], -r[k], s.x);
}

// z -= alpha/||A_J||_F^2 * A_J A_J^T z
void block_average_col_update(SolverState& s, const LinearSystem& sys, std::span<const std::size_t> cols,
                              double fro, double alpha) {
    Vector& z = *s.z;
    Vector& w = s.scratch;
    w.resize(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) w[k] = (alpha * sys.a.col_dot(cols[k], z)) / fro;
    for (std::size_t k = 0; k < cols.size(); ++k) sys.a.col_axpy(cols[k], -w[k], z);
}

// x -= (A_I)^+ (A_I x - b_I + z_I)
void block_projection_row_update(SolverState& s, const LinearSystem& sys, std::span<const std::size_t> rows,
                                 const Svd& f, const Vector* z) {
    Vector& r = s.scratch;
    r.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t l = rows[k];
        double v = sys.a.row_dot(l, s.x) - sys.b[l];
        if (z) v += (*z)[l];
        r[k] = v;
    }
    for (std::size_t t = 0; t < f.rank(); ++t) {
        const double c = dot(f.u_col(t), r) / f.sigma[t];
        const auto vt = f.v_col(t);
        for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] -= c * vt[i];
    }
}

// z -= A_J (A_J)^+ z = U_J U_J^T z
void block_projection_col_update(SolverState& s, const Svd& f) {
    Vector& z = *s.z;
    for (std::size_t t = 0; t < f.rank(); ++t) {
        const auto ut = f.u_col(t);
        const double c = dot(ut, z);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] -= c * ut[i];
    }
}

double oracle_error(const Vector& x, const Vector& x_star) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_star[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::RK: return "RK";
    case Algorithm::REK: return "REK";
    case Algorithm::RBK: return "RBK";
    case Algorithm::RDBK: return "RDBK";
    case Algorithm::RABK: return "RABK";
    case Algorithm::DSBGS: return "DSBGS";
    case Algorithm::REBK: return "REBK";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    const std::string want = lower(name);
    for (Algorithm a : kAll)
        if (lower(to_string(a)) == want) return a;
    throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

bool is_extended(Algorithm a) { return a == Algorithm::REK || a == Algorithm::RDBK || a == Algorithm::REBK; }

bool uses_row_blocks(Algorithm) { return true; }

bool uses_col_blocks(Algorithm a) { return is_extended(a) || a == Algorithm::DSBGS; }

StepSize parse_step_size(std::string_view text) {
    StepSize s;
    if (!text.empty() && (text.back() == 'x' || text.back() == 'X')) {
        s.per_beta = true;
        text.remove_suffix(1);
    }
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, s.value);
    if (ec != std::errc() || ptr != last || text.empty())
        throw std::invalid_argument("bad stepsize '" + std::string(text) + "' (expected e.g. 10.87 or 1.75x)");
    if (!(s.value > 0.0) || !std::isfinite(s.value)) throw std::invalid_argument("stepsize must be positive");
    return s;
}

std::string format_step_size(const StepSize& s) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), s.value);
    std::string out(buf, res.ptr);
    if (s.per_beta) out += 'x';
    return out;
}

SolverConfig make_config(Algorithm algo, std::size_t rows, std::size_t cols, std::size_t tau, StepSize alpha,
                         std::uint64_t seed) {
    SolverConfig c;
    c.algorithm = algo;
    c.alpha = alpha;
    c.seed = seed;
    if (algo == Algorithm::RK || algo == Algorithm::REK) return c;
    c.row_partition = contiguous_partition(Axis::Row, rows, std::min(tau, rows));
    if (uses_col_blocks(algo)) c.col_partition = contiguous_partition(Axis::Column, cols, std::min(tau, cols));
    return c;
}

SolverSetup::SolverSetup(const Matrix& a, const SolverConfig& config) : a_(&a), algorithm_(config.algorithm) {
    const Algorithm algo = config.algorithm;
    if (!(config.alpha.value > 0.0)) throw std::invalid_argument("stepsize must be positive");

    Partition rows;
    std::optional<Partition> cols;
    if (algo == Algorithm::RK || algo == Algorithm::REK) {
        rows = singletons_or_check(config.row_partition, Axis::Row, a.rows(), algo);
        if (algo == Algorithm::REK) cols = singletons_or_check(config.col_partition, Axis::Column, a.cols(), algo);
    } else {
        rows = require_partition(config.row_partition, Axis::Row, a.rows(), algo, "row");
        if (uses_col_blocks(algo)) cols = require_partition(config.col_partition, Axis::Column, a.cols(), algo, "column");
    }

    row_sampler_.emplace(a, rows);
    if (cols) col_sampler_.emplace(a, *cols);

    if (algo == Algorithm::RBK || algo == Algorithm::RDBK) row_factors_ = factor_blocks(a, rows);
    if (algo == Algorithm::RDBK) col_factors_ = factor_blocks(a, *cols);
    if (algo == Algorithm::DSBGS) {
        col_block_of_.assign(a.cols(), 0);
        for (std::size_t b = 0; b < cols->size(); ++b)
            for (std::size_t j : cols->blocks[b]) col_block_of_[j] = b;
    }

    // beta_max over the axes whose averaged updates use alpha.
    switch (algo) {
    case Algorithm::RK:
    case Algorithm::REK: beta_max_ = 1.0; break;
    case Algorithm::RABK: beta_max_ = block_beta_max(a, rows); break;
    case Algorithm::REBK: beta_max_ = compute_beta_max(a, rows, *cols).max; break;
    case Algorithm::DSBGS:
        if (config.alpha.per_beta) beta_max_ = compute_beta_max(a, rows, *cols).max;
        break;
    default: break;
    }

    const bool alpha_unused = algo == Algorithm::RBK || algo == Algorithm::RDBK || algo == Algorithm::REK;
    if (config.alpha.per_beta && !beta_max_ && !alpha_unused)
        throw std::invalid_argument(std::string(to_string(algo)) + " has no stepsize to express in units of 1/beta_max");
    if (alpha_unused) alpha_ = 1.0;
    else alpha_ = config.alpha.per_beta ? config.alpha.value / *beta_max_ : config.alpha.value;
    if (beta_max_ && algo != Algorithm::DSBGS) guaranteed_ = alpha_ < 2.0 / *beta_max_;
}

SolverState init_state(const LinearSystem& sys, const SolverConfig& config) {
    SolverState s;
    s.rng = Rng(config.seed);
    if (config.x0) {
        if (config.x0->size() != sys.a.cols()) throw std::invalid_argument("x0 length does not match columns");
        s.x = *config.x0;
    } else {
        s.x.assign(sys.a.cols(), 0.0);
    }
    if (is_extended(config.algorithm)) {
        if (config.z0) {
            if (config.z0->size() != sys.a.rows()) throw std::invalid_argument("z0 length does not match rows");
            s.z = *config.z0;
        } else {
            s.z = Vector(sys.b.begin(), sys.b.end());
        }
    }
    if (sys.b.size() != sys.a.rows()) throw std::invalid_argument("rhs length does not match rows");
    return s;
}

void step_rk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    s.rng.next_u64();
    const BlockSampler& rows = setup.row_sampler();
    const std::size_t b = rows.sample(s.rng);
    const std::size_t i = rows.partition().blocks[b].front();
    const double coef = (setup.alpha() * (sys.a.row_dot(i, s.x) - sys.b[i])) / rows.weights()[b];
    sys.a.row_axpy(i, -coef, s.x);
    ++s.k;
}

void step_rek(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    Vector& z = *s.z;
    const BlockSampler& cols = setup.col_sampler();
    const std::size_t jb = cols.sample(s.rng);
    const std::size_t j = cols.partition().blocks[jb].front();
    const double zc = sys.a.col_dot(j, z) / cols.weights()[jb];
    sys.a.col_axpy(j, -zc, z);

    const BlockSampler& rows = setup.row_sampler();
    const std::size_t ib = rows.sample(s.rng);
    const std::size_t i = rows.partition().blocks[ib].front();
    const double xc = (sys.a.row_dot(i, s.x) - sys.b[i] + z[i]) / rows.weights()[ib];
    sys.a.row_axpy(i, -xc, s.x);
    ++s.k;
}

void step_rbk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    s.rng.next_u64();
    const std::size_t ib = setup.row_sampler().sample(s.rng);
    block_projection_row_update(s, sys, setup.row_sampler().partition().blocks[ib], setup.row_factors()[ib].svd,
                                nullptr);
    ++s.k;
}

void step_rdbk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    const std::size_t jb = setup.col_sampler().sample(s.rng);
    block_projection_col_update(s, setup.col_factors()[jb].svd);
    const std::size_t ib = setup.row_sampler().sample(s.rng);
    block_projection_row_update(s, sys, setup.row_sampler().partition().blocks[ib], setup.row_factors()[ib].svd,
                                &*s.z);
    ++s.k;
}

void step_rabk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    s.rng.next_u64();
    const BlockSampler& rows = setup.row_sampler();
    const std::size_t ib = rows.sample(s.rng);
    block_average_row_update(s, sys, rows.partition().blocks[ib], rows.weights()[ib], setup.alpha(), nullptr);
    ++s.k;
}

void step_dsbgs(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    const std::size_t jb = setup.col_sampler().sample(s.rng);
    const BlockSampler& rows = setup.row_sampler();
    const std::size_t ib = rows.sample(s.rng);
    const auto& row_block = rows.partition().blocks[ib];

    // ||A_{I,J}||_F^2 accumulated row by row, like block_frobenius_sq.
    double fro = 0.0;
    for (std::size_t l : row_block) {
        double row_sum = 0.0;
        sys.a.for_each_in_row(l, [&](std::size_t c, double v) {
            if (setup.col_block_of(c) == jb) row_sum += v * v;
        });
        fro += row_sum;
    }
    if (fro > 0.0) {
        Vector& r = s.scratch;
        r.resize(row_block.size());
        for (std::size_t k = 0; k < row_block.size(); ++k) {
            const std::size_t l = row_block[k];
            r[k] = (setup.alpha() * (sys.a.row_dot(l, s.x) - sys.b[l])) / fro;
        }
        for (std::size_t k = 0; k < row_block.size(); ++k) {
            const double coef = -r[k];
            sys.a.for_each_in_row(row_block[k], [&](std::size_t c, double v) {
                if (setup.col_block_of(c) == jb) s.x[c] += coef * v;
            });
        }
    }
    ++s.k;
}

void step_rebk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    const BlockSampler& cols = setup.col_sampler();
    const std::size_t jb = cols.sample(s.rng);
    block_average_col_update(s, sys, cols.partition().blocks[jb], cols.weights()[jb], setup.alpha());

    const BlockSampler& rows = setup.row_sampler();
    const std::size_t ib = rows.sample(s.rng);
    block_average_row_update(s, sys, rows.partition().blocks[ib], rows.weights()[ib], setup.alpha(), &*s.z);
    ++s.k;
}

void step(SolverState& s, const LinearSystem& sys, const SolverSetup& setup) {
    switch (setup.algorithm()) {
    case Algorithm::RK: step_rk(s, sys, setup); return;
    case Algorithm::REK: step_rek(s, sys, setup); return;
    case Algorithm::RBK: step_rbk(s, sys, setup); return;
    case Algorithm::RDBK: step_rdbk(s, sys, setup); return;
    case Algorithm::RABK: step_rabk(s, sys, setup); return;
    case Algorithm::DSBGS: step_dsbgs(s, sys, setup); return;
    case Algorithm::REBK: step_rebk(s, sys, setup); return;
    }
}

Solver::Solver(const Matrix& a, std::span<const double> b, const SolverConfig& config)
    : sys_{a, b}, setup_(a, config), state_(init_state(sys_, config)) {}

RunTrace run(const ProblemInstance& problem, const SolverConfig& config) {
    const StoppingRule& stop = config.stop;
    if (!(stop.tol > 0.0)) throw std::invalid_argument("stopping tolerance must be positive");
    if (stop.check_stride == 0) throw std::invalid_argument("check stride must be positive");
    const bool have_oracle = problem.x_star.size() == problem.a.cols();
    if (stop.mode == StopMode::OracleError && !have_oracle)
        throw DataError("oracle-error stopping requested but the problem has no A^+ b");

    const auto t0 = std::chrono::steady_clock::now();
    const LinearSystem sys{problem.a, problem.b};
    const SolverSetup setup(problem.a, config);
    SolverState state = init_state(sys, config);

    RunTrace trace;
    trace.algorithm = config.algorithm;
    trace.alpha = setup.alpha();
    trace.beta_max = setup.beta_max();
    trace.outside_guaranteed_regime = !setup.guaranteed_regime();
    if (trace.outside_guaranteed_regime) trace.warnings.emplace_back("outside guaranteed regime (alpha >= 2/beta_max)");

    if (problem.factorization) {
        const Svd& f = *problem.factorization;
        if (config.x0) {
            const Vector off = subtract(*config.x0, project_row_space(f, *config.x0));
            if (norm2(off) > 1e-8 * std::max(1.0, norm2(*config.x0)))
                trace.warnings.emplace_back("x0 not in range(A^T); convergence to A^+b not guaranteed");
        }
        if (config.z0 && is_extended(config.algorithm)) {
            const Vector d = subtract(*config.z0, problem.b);
            const Vector off = subtract(d, project_range(f, d));
            if (norm2(off) > 1e-8 * std::max(1.0, norm2(d)))
                trace.warnings.emplace_back("z0 not in b + range(A); z will not converge to b_perp");
        }
    }

    const double fro = std::sqrt(frobenius_norm_sq(problem.a));
    const double b_norm = norm2(problem.b);
    auto measure = [&]() -> double {
        switch (stop.mode) {
        case StopMode::OracleError:
        case StopMode::MaxItersOnly:
            return have_oracle ? oracle_error(state.x, problem.x_star) : std::numeric_limits<double>::quiet_NaN();
        case StopMode::ResidualProxy: {
            // Normal-equations residual. Adding z would make the check vacuous at z0 = b, x0 = 0.
            Vector r = problem.a.multiply(state.x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= problem.b[i];
            return norm2(problem.a.multiply_transposed(r));
        }
        }
        return 0.0;
    };
    const double threshold = stop.mode == StopMode::ResidualProxy ? stop.tol * fro * b_norm : stop.tol;
    auto done = [&](double value) { return stop.mode != StopMode::MaxItersOnly && value <= threshold; };

    double value = measure();
    if (config.record_errors && have_oracle) trace.errors.emplace_back(0, oracle_error(state.x, problem.x_star));
    bool converged = done(value);
    while (!converged && state.k < config.max_iters) {
        step(state, sys, setup);
        if (state.k % stop.check_stride == 0 || state.k == config.max_iters) {
            value = measure();
            if (config.record_errors && have_oracle)
                trace.errors.emplace_back(state.k, oracle_error(state.x, problem.x_star));
            converged = done(value);
        }
    }

    trace.iters = state.k;
    trace.converged = converged;
    trace.final_error = have_oracle ? oracle_error(state.x, problem.x_star) : std::numeric_limits<double>::quiet_NaN();
    trace.x = std::move(state.x);
    trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return trace;
}

} // namespace kaczmarz
