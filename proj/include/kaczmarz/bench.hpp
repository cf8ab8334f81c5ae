#pragma once

#include "kaczmarz/problem_gen.hpp"
#include "kaczmarz/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kaczmarz {

enum class SourceKind { TypeI, TypeII, File };

struct ProblemSource {
    SourceKind kind = SourceKind::TypeI;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t rank = 0; ///< Type I only
    double kappa = 2.0;   ///< Type I only
    bool inconsistent = true;
    std::filesystem::path matrix_path; ///< File only
    /// File only; when absent the RHS is generated per trial.
    std::optional<std::filesystem::path> rhs_path;

    std::string label() const;
};

struct BenchSpec {
    std::vector<ProblemSource> problems;
    std::vector<Algorithm> algorithms;
    std::vector<std::size_t> taus{10};
    std::vector<StepSize> alphas{StepSize::over_beta(1.0)};
    std::size_t trials = 10;
    std::uint64_t master_seed = 1;
    double tol = 1e-5;
    std::size_t max_iters = 1'000'000;
    std::size_t stride = 1;
    Algorithm baseline = Algorithm::REK;

    void validate() const;
};

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t iters = 0;
    bool converged = false;
    double final_error = 0.0;
    double wall_time = 0.0;
    double alpha = 0.0;
    std::optional<double> beta_max;
    bool outside_guaranteed_regime = false;
};

/// One (problem, algorithm, tau, alpha) cell with its trials and aggregates.
struct BenchRecord {
    std::string problem;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t rank = 0;
    Algorithm algorithm = Algorithm::REK;
    std::optional<std::size_t> tau;
    std::optional<StepSize> alpha_spec;
    std::vector<TrialResult> trials;

    std::size_t converged_count() const;
    /// Mean ITER over converged trials; NaN when none converged.
    double mean_iters() const;
    double median_iters() const;
    double mean_wall_time() const;
    std::optional<double> speedup; ///< baseline mean time / this mean time
};

/// Instance for one trial. Matrix and RHS seeds derive from the trial seed, so
/// every algorithm in a sweep sees the same systems.
ProblemInstance build_instance(const ProblemSource& src, std::uint64_t trial_seed);
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);
std::uint64_t solver_seed(std::uint64_t trial_seed);

/// Runs every cell in sweep order. Trials share one instance per (problem, trial).
std::vector<BenchRecord> run_bench(const BenchSpec& spec);

/// Per-trial rows followed by a mean row per cell.
void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out);
std::string bench_csv_header();

/// Named experiment presets. `full_scale` restores the original shapes for
/// the large sweeps, which are shrunk by default.
BenchSpec preset(const std::string& name, bool full_scale = false);
std::vector<std::string> preset_names();
bool preset_is_shrunk(const std::string& name);

} // namespace kaczmarz
