#include "kaczmarz/bench.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/matrix_io.hpp"
#include "kaczmarz/rates.hpp"
#include "kaczmarz/solvers.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kaczmarz;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNoConvergence = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenOptions {
    std::string type = "I";
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t rank = 0;
    double kappa = 2.0;
    bool consistent = false;
    double perp_scale = 1.0;
};

void add_gen_options(CLI::App* cmd, GenOptions& g) {
    cmd->add_option("--type", g.type, "Generator: I (U D V^T) or II (Gaussian)")->check(CLI::IsMember({"I", "II"}));
    cmd->add_option("--m", g.m, "Rows");
    cmd->add_option("--n", g.n, "Columns");
    cmd->add_option("--rank", g.rank, "Rank (type I)");
    cmd->add_option("--kappa", g.kappa, "Condition bound (type I)");
    cmd->add_flag("--consistent", g.consistent, "Generate b in range(A)");
}

ProblemSource to_source(const GenOptions& g) {
    if (g.m == 0 || g.n == 0) throw UsageError("--m and --n are required");
    ProblemSource s;
    s.kind = g.type == "I" ? SourceKind::TypeI : SourceKind::TypeII;
    s.m = g.m;
    s.n = g.n;
    s.rank = g.rank;
    s.kappa = g.kappa;
    s.inconsistent = !g.consistent;
    if (s.kind == SourceKind::TypeI && s.rank == 0) throw UsageError("--rank is required for type I");
    return s;
}

std::vector<StepSize> parse_alphas(const std::vector<std::string>& items) {
    std::vector<StepSize> out;
    for (const auto& a : items) out.push_back(parse_step_size(a));
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
}

Matrix generate_matrix(const ProblemSource& s, std::uint64_t seed) {
    return s.kind == SourceKind::TypeI ? gen_type1(s.m, s.n, s.rank, s.kappa, seed) : gen_type2(s.m, s.n, seed);
}

int cmd_generate(const GenOptions& g, std::uint64_t seed, const fs::path& out) {
    const ProblemSource src = to_source(g);
    ProblemInstance p = make_rhs(generate_matrix(src, child_seed(seed, 0)), child_seed(seed, 1), src.inconsistent);
    fs::create_directories(out);
    write_matrix_market(p.a, out / "A.mtx");
    write_vector(p.b, out / "b.mtx");
    write_vector(p.x_star, out / "x_star.mtx");
    write_vector(p.b_perp, out / "b_perp.mtx");
    Metadata meta{{"generator", src.kind == SourceKind::TypeI ? "typeI" : "typeII"},
                  {"m", std::to_string(p.a.rows())},
                  {"n", std::to_string(p.a.cols())},
                  {"rank", std::to_string(p.meta.declared_rank)},
                  {"consistent", p.meta.consistent ? "true" : "false"},
                  {"residual_norm", format_double(p.meta.residual_norm)},
                  {"seed", std::to_string(seed)}};
    if (src.kind == SourceKind::TypeI) meta["kappa_bound"] = format_double(src.kappa);
    write_metadata(meta, out / "meta.txt");
    std::cout << "wrote " << out.string() << " (" << p.a.rows() << "x" << p.a.cols() << ", rank "
              << p.meta.declared_rank << ", " << (p.meta.consistent ? "consistent" : "inconsistent") << ")\n";
    return kOk;
}

struct SolveOptions {
    std::string problem_dir;
    std::string matrix;
    std::string rhs;
    std::string oracle;
    std::string algo = "REBK";
    std::size_t tau = 10;
    std::string alpha = "1x";
    std::string stop = "oracle";
    std::string curve;
};

void print_rates(const ProblemInstance& p, std::size_t tau, double alpha) {
    const std::size_t tr = std::min(tau, p.a.rows());
    const std::size_t tc = std::min(tau, p.a.cols());
    const RateConstants c = compute_rate_constants(p.a, *p.factorization, contiguous_partition(Axis::Row, p.a.rows(), tr),
                                                   contiguous_partition(Axis::Column, p.a.cols(), tc), alpha);
    std::cout << "sigma1^2=" << fmt(c.sigma1_sq) << " sigma_r^2=" << fmt(c.sigma_r_sq) << " ||A||_F^2=" << fmt(c.fro_sq)
              << "\n"
              << "beta_rows=" << fmt(c.beta_max_rows) << " beta_cols=" << fmt(c.beta_max_cols)
              << " beta_max=" << fmt(c.beta_max) << "\n"
              << "delta=" << fmt(c.delta) << " eta=" << fmt(c.eta) << " rho=" << fmt(c.rho)
              << " rho_hat=" << fmt(c.rho_hat) << "\n"
              << "alpha_opt=" << fmt(c.alpha_opt) << " delta_opt=" << fmt(c.delta_opt) << "\n";
}

int cmd_solve(const SolveOptions& o, std::uint64_t seed, double tol, std::size_t max_iters, std::size_t stride) {
    fs::path mpath = o.matrix, bpath = o.rhs, xpath = o.oracle;
    if (!o.problem_dir.empty()) {
        const fs::path dir = o.problem_dir;
        if (mpath.empty()) mpath = dir / "A.mtx";
        if (bpath.empty()) bpath = dir / "b.mtx";
        if (xpath.empty() && fs::exists(dir / "x_star.mtx")) xpath = dir / "x_star.mtx";
    }
    if (mpath.empty() || bpath.empty()) throw UsageError("solve needs --problem or --matrix and --rhs");

    ProblemInstance p;
    p.a = read_matrix_market(mpath);
    p.b = read_vector(bpath);
    if (p.b.size() != p.a.rows()) throw DataError("rhs length does not match matrix rows");
    p.factorization = std::make_shared<const Svd>(svd(p.a));
    p.meta.declared_rank = p.factorization->rank();
    if (!xpath.empty()) {
        p.x_star = read_vector(xpath);
        if (p.x_star.size() != p.a.cols()) throw DataError("oracle length does not match matrix columns");
    } else {
        p.x_star = pinv_apply(*p.factorization, p.b);
    }

    const Algorithm algo = parse_algorithm(o.algo);
    SolverConfig cfg = make_config(algo, p.a.rows(), p.a.cols(), o.tau, parse_step_size(o.alpha), seed);
    cfg.max_iters = max_iters;
    cfg.stop.tol = tol;
    cfg.stop.check_stride = stride;
    if (o.stop == "oracle") cfg.stop.mode = StopMode::OracleError;
    else if (o.stop == "residual") cfg.stop.mode = StopMode::ResidualProxy;
    else cfg.stop.mode = StopMode::MaxItersOnly;
    cfg.record_errors = !o.curve.empty();

    const RunTrace t = run(p, cfg);
    std::cout << "algorithm=" << to_string(algo) << "\n"
              << "ITER=" << t.iters << "\n"
              << "converged=" << (t.converged ? "true" : "false") << "\n"
              << "final_error=" << (std::isnan(t.final_error) ? std::string("n/a") : fmt(t.final_error)) << "\n"
              << "alpha=" << fmt(t.alpha) << "\n";
    if (t.beta_max) std::cout << "beta_max=" << fmt(*t.beta_max) << "\n";
    std::cout << "guaranteed_regime=" << (t.outside_guaranteed_regime ? "false" : "true") << "\n"
              << "wall_time=" << fmt(t.wall_time) << "\n";
    print_rates(p, o.tau, t.alpha);
    for (const auto& w : t.warnings) std::cerr << "warning: " << w << "\n";

    if (!o.curve.empty()) {
        std::ofstream curve(o.curve);
        if (!curve) throw DataError("cannot write " + o.curve);
        curve << "k,error\n";
        for (const auto& [k, e] : t.errors) curve << k << ',' << format_double(e) << '\n';
    }
    return t.converged || cfg.stop.mode == StopMode::MaxItersOnly ? kOk : kNoConvergence;
}

struct BenchOptions {
    std::string preset;
    bool full_scale = false;
    std::string matrix;
    std::vector<std::string> algos;
    std::vector<std::size_t> taus;
    std::vector<std::string> alphas;
    std::size_t trials = 10;
};

int cmd_bench(const BenchOptions& o, const GenOptions& g, bool have_gen, std::uint64_t seed, double tol,
              std::size_t max_iters, std::size_t stride, const std::string& out) {
    BenchSpec spec;
    if (!o.preset.empty()) {
        spec = preset(o.preset, o.full_scale);
        if (o.full_scale && preset_is_shrunk(o.preset))
            std::cerr << "warning: full-scale " << o.preset << " runs for hours on a desk machine\n";
    }
    if (have_gen) spec.problems = {to_source(g)};
    if (!o.matrix.empty()) {
        ProblemSource s;
        s.kind = SourceKind::File;
        s.matrix_path = o.matrix;
        s.inconsistent = !g.consistent;
        spec.problems = {s};
    }
    if (!o.algos.empty()) {
        spec.algorithms.clear();
        for (const auto& a : o.algos) spec.algorithms.push_back(parse_algorithm(a));
    }
    if (!o.taus.empty()) spec.taus = o.taus;
    if (!o.alphas.empty()) spec.alphas = parse_alphas(o.alphas);
    spec.trials = o.trials;
    spec.master_seed = seed;
    spec.tol = tol;
    spec.max_iters = max_iters;
    spec.stride = stride;
    if (spec.problems.empty()) throw UsageError("bench needs --preset, generator options or --matrix");
    if (spec.algorithms.empty()) throw UsageError("bench needs --algo");

    const std::vector<BenchRecord> records = run_bench(spec);
    if (out.empty()) {
        write_bench_csv(records, std::cout);
    } else {
        std::ofstream f(out);
        if (!f) throw DataError("cannot write " + out);
        write_bench_csv(records, f);
    }
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.trials.size() - r.converged_count();
    if (failed) std::cerr << "warning: " << failed << " trial(s) did not converge within max_iters\n";
    return kOk;
}

int cmd_rates(const std::string& matrix, const GenOptions& g, bool have_gen, std::uint64_t seed,
              std::size_t tau_row, std::size_t tau_col, const std::vector<std::string>& alpha_items) {
    Matrix a;
    if (!matrix.empty()) a = read_matrix_market(matrix);
    else if (have_gen) a = generate_matrix(to_source(g), child_seed(seed, 0));
    else throw UsageError("rates needs --matrix or generator options");
    const Svd f = svd(a);
    const Partition rows = contiguous_partition(Axis::Row, a.rows(), std::min(tau_row, a.rows()));
    const Partition cols = contiguous_partition(Axis::Column, a.cols(), std::min(tau_col, a.cols()));
    const RateConstants base = compute_rate_constants(a, f, rows, cols, 1.0);
    std::cout << "m=" << a.rows() << " n=" << a.cols() << " rank=" << f.rank() << "\n"
              << "sigma1^2=" << fmt(base.sigma1_sq) << " sigma_r^2=" << fmt(base.sigma_r_sq)
              << " ||A||_F^2=" << fmt(base.fro_sq) << "\n"
              << "beta_rows=" << fmt(base.beta_max_rows) << " beta_cols=" << fmt(base.beta_max_cols)
              << " beta_max=" << fmt(base.beta_max) << "\n"
              << "alpha_opt=" << fmt(base.alpha_opt) << " delta_opt=" << fmt(base.delta_opt) << "\n"
              << "alpha_spec,alpha,delta,eta,rho,rho_hat,guaranteed\n";
    for (const StepSize& s : parse_alphas(alpha_items)) {
        const double alpha = s.per_beta ? s.value / base.beta_max : s.value;
        const RateConstants c = with_alpha(base, alpha);
        std::cout << format_step_size(s) << ',' << fmt(alpha) << ',' << fmt(c.delta) << ',' << fmt(c.eta) << ','
                  << fmt(c.rho) << ',' << fmt(c.rho_hat) << ',' << (c.guaranteed ? "true" : "false") << "\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized (extended, block) Kaczmarz solvers and experiment driver"};
    app.set_config("--config", "", "Read options from a key=value file; command-line flags take precedence");
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    double tol = 1e-5;
    std::size_t max_iters = 1'000'000;
    std::size_t stride = 1;
    std::string out;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Master seed")->envname("KACZMARZ_SEED");
        cmd->add_option("--tol", tol, "Stopping tolerance on ||x - A^+ b||");
        cmd->add_option("--max-iters", max_iters, "Iteration cap");
        cmd->add_option("--stride", stride, "Check the stopping rule every this many iterations");
        cmd->add_option("--out", out, "Output path");
    };

    GenOptions gen;
    auto* generate = app.add_subcommand("generate", "Generate a test problem");
    add_gen_options(generate, gen);
    add_common(generate);

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "Run one solver on one problem");
    solve_cmd->add_option("--problem", solve.problem_dir, "Directory written by generate");
    solve_cmd->add_option("--matrix", solve.matrix, "MatrixMarket matrix");
    solve_cmd->add_option("--rhs", solve.rhs, "Right-hand side vector");
    solve_cmd->add_option("--oracle", solve.oracle, "A^+ b for the error-based stopping rule");
    solve_cmd->add_option("--algo", solve.algo, "RK, REK, RBK, RDBK, RABK, DSBGS or REBK");
    solve_cmd->add_option("--tau", solve.tau, "Block size");
    solve_cmd->add_option("--alpha", solve.alpha, "Stepsize; suffix x means multiples of 1/beta_max");
    solve_cmd->add_option("--stop", solve.stop, "oracle, residual or max-iters")
        ->check(CLI::IsMember({"oracle", "residual", "max-iters"}));
    solve_cmd->add_option("--curve", solve.curve, "Write the error curve as CSV");
    add_common(solve_cmd);

    BenchOptions bench;
    GenOptions bench_gen;
    auto* bench_cmd = app.add_subcommand("bench", "Multi-trial benchmark sweep, CSV output");
    bench_cmd->add_option("--preset", bench.preset, "Experiment preset")->check(CLI::IsMember(preset_names()));
    bench_cmd->add_flag("--full-scale", bench.full_scale, "Use the original large shapes");
    bench_cmd->add_option("--matrix", bench.matrix, "MatrixMarket matrix instead of a generator");
    bench_cmd->add_option("--algo", bench.algos, "Algorithms")->delimiter(',');
    bench_cmd->add_option("--tau", bench.taus, "Block sizes")->delimiter(',');
    bench_cmd->add_option("--alpha", bench.alphas, "Stepsizes")->delimiter(',');
    bench_cmd->add_option("--trials", bench.trials, "Trials per cell")->check(CLI::PositiveNumber);
    add_gen_options(bench_cmd, bench_gen);
    add_common(bench_cmd);

    std::string rates_matrix;
    GenOptions rates_gen;
    std::size_t tau = 10, tau_row = 0, tau_col = 0;
    std::vector<std::string> rate_alphas{"1x"};
    auto* rates_cmd = app.add_subcommand("rates", "Print convergence constants");
    rates_cmd->add_option("--matrix", rates_matrix, "MatrixMarket matrix");
    rates_cmd->add_option("--tau", tau, "Block size on both axes");
    rates_cmd->add_option("--tau-row", tau_row, "Row block size");
    rates_cmd->add_option("--tau-col", tau_col, "Column block size");
    rates_cmd->add_option("--alpha", rate_alphas, "Stepsizes")->delimiter(',');
    add_gen_options(rates_cmd, rates_gen);
    add_common(rates_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*generate) {
            if (out.empty()) throw UsageError("generate needs --out DIR");
            return cmd_generate(gen, seed, out);
        }
        if (*solve_cmd) return cmd_solve(solve, seed, tol, max_iters, stride);
        if (*bench_cmd) {
            const bool have_gen = bench_cmd->count("--m") > 0;
            return cmd_bench(bench, bench_gen, have_gen, seed, tol, max_iters, stride, out);
        }
        if (*rates_cmd) {
            const bool have_gen = rates_cmd->count("--m") > 0;
            return cmd_rates(rates_matrix, rates_gen, have_gen, seed, tau_row ? tau_row : tau, tau_col ? tau_col : tau,
                             rate_alphas);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
