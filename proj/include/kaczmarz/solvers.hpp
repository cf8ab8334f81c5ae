#pragma once

#include "kaczmarz/factorizations.hpp"
#include "kaczmarz/matrix.hpp"
#include "kaczmarz/partition.hpp"
#include "kaczmarz/problem_gen.hpp"
#include "kaczmarz/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kaczmarz {

enum class Algorithm { RK, REK, RBK, RDBK, RABK, DSBGS, REBK };

std::string_view to_string(Algorithm a);
/// Case-insensitive; throws std::invalid_argument on unknown names.
Algorithm parse_algorithm(std::string_view name);
/// Algorithms that carry the auxiliary z sequence.
bool is_extended(Algorithm a);
bool uses_row_blocks(Algorithm a);
bool uses_col_blocks(Algorithm a);

/// Fixed stepsize, either absolute or in units of 1/beta_max.
struct StepSize {
    double value = 1.0;
    bool per_beta = false;

    static StepSize absolute(double v) { return {v, false}; }
    static StepSize over_beta(double multiple) { return {multiple, true}; }
};

/// Parses "10.87" (absolute) or "1.75x" (multiple of 1/beta_max).
StepSize parse_step_size(std::string_view text);
std::string format_step_size(const StepSize& s);

/// OracleError: ||x - A^+ b|| <= tol. ResidualProxy: ||A^T (A x - b)|| <= tol ||A||_F ||b||.
enum class StopMode { OracleError, ResidualProxy, MaxItersOnly };

struct StoppingRule {
    StopMode mode = StopMode::OracleError;
    double tol = 1e-5;
    std::size_t check_stride = 1;
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::REBK;
    /// RK and REK always use singleton partitions; these may be left empty.
    std::optional<Partition> row_partition;
    std::optional<Partition> col_partition;
    /// Ignored by RBK and RDBK (exact projections) and by REK (unit step).
    StepSize alpha;
    std::uint64_t seed = 0;
    std::size_t max_iters = 1'000'000;
    StoppingRule stop;
    /// Initial points; defaults are x0 = 0 and z0 = b.
    std::optional<Vector> x0;
    std::optional<Vector> z0;
    bool record_errors = false;
};

/// Config with contiguous partitions of width tau on the axes the algorithm uses.
SolverConfig make_config(Algorithm algo, std::size_t rows, std::size_t cols, std::size_t tau, StepSize alpha,
                         std::uint64_t seed);

/// Pseudoinverse factors of one block, cached for RBK/RDBK.
struct BlockFactor {
    Svd svd;
};

/// Per-run precomputation. Immutable once built and shareable across runs on
/// the same matrix with the same config.
class SolverSetup {
public:
    SolverSetup(const Matrix& a, const SolverConfig& config);

    const Matrix& matrix() const { return *a_; }
    Algorithm algorithm() const { return algorithm_; }
    double alpha() const { return alpha_; }
    /// beta_max for the axes the algorithm samples, when it was computed.
    const std::optional<double>& beta_max() const { return beta_max_; }
    /// False when alpha >= 2/beta_max (block-averaging methods) or alpha >= 2 (RK).
    bool guaranteed_regime() const { return guaranteed_; }

    const BlockSampler& row_sampler() const { return *row_sampler_; }
    const BlockSampler& col_sampler() const { return *col_sampler_; }
    const std::vector<BlockFactor>& row_factors() const { return row_factors_; }
    const std::vector<BlockFactor>& col_factors() const { return col_factors_; }
    std::size_t col_block_of(std::size_t col) const { return col_block_of_[col]; }

private:
    const Matrix* a_;
    Algorithm algorithm_;
    double alpha_ = 1.0;
    std::optional<double> beta_max_;
    bool guaranteed_ = true;
    std::optional<BlockSampler> row_sampler_;
    std::optional<BlockSampler> col_sampler_;
    std::vector<BlockFactor> row_factors_;
    std::vector<BlockFactor> col_factors_;
    std::vector<std::size_t> col_block_of_;
};

struct SolverState {
    Vector x;
    std::optional<Vector> z;
    std::size_t k = 0;
    Rng rng;
    Vector scratch;
};

struct LinearSystem {
    const Matrix& a;
    std::span<const double> b;
};

SolverState init_state(const LinearSystem& sys, const SolverConfig& config);

// Single iterations. Every step consumes exactly two draws from state.rng:
// the column-block slot, then the row-block slot. Methods without a column
// draw discard the first one so all variants replay on a shared stream.
void step_rk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step_rek(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step_rbk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step_rdbk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step_rabk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step_dsbgs(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step_rebk(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);
void step(SolverState& s, const LinearSystem& sys, const SolverSetup& setup);

/// Stepping interface bundling setup and state for one system.
class Solver {
public:
    Solver(const Matrix& a, std::span<const double> b, const SolverConfig& config);

    void step() { kaczmarz::step(state_, sys_, setup_); }
    void advance(std::size_t iterations) {
        for (std::size_t i = 0; i < iterations; ++i) step();
    }

    const Vector& x() const { return state_.x; }
    const std::optional<Vector>& z() const { return state_.z; }
    std::size_t k() const { return state_.k; }
    const SolverSetup& setup() const { return setup_; }
    SolverState& state() { return state_; }

private:
    LinearSystem sys_;
    SolverSetup setup_;
    SolverState state_;
};

struct RunTrace {
    Algorithm algorithm = Algorithm::REBK;
    std::size_t iters = 0; ///< ITER
    bool converged = false;
    double final_error = 0.0; ///< ||x - A^+ b||_2 at exit; NaN without oracle
    /// (k, ||x^k - A^+ b||) at checkpoints when record_errors is set.
    std::vector<std::pair<std::size_t, double>> errors;
    double wall_time = 0.0;
    double alpha = 0.0;
    std::optional<double> beta_max;
    bool outside_guaranteed_regime = false;
    std::vector<std::string> warnings;
    Vector x;
};

/// Iterates until the stopping rule fires or max_iters is reached. With stride
/// > 1 the reported ITER is the first checkpoint below tol.
RunTrace run(const ProblemInstance& problem, const SolverConfig& config);

} // namespace kaczmarz
