#include "kaczmarz/bench.hpp"

#include "kaczmarz/errors.hpp"
#include "kaczmarz/matrix_io.hpp"
#include "kaczmarz/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace kaczmarz {

namespace {

bool uses_tau(Algorithm a) { return a != Algorithm::RK && a != Algorithm::REK; }
bool uses_alpha(Algorithm a) { return a == Algorithm::RABK || a == Algorithm::REBK || a == Algorithm::DSBGS; }

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Matrix and factorization shared by every trial of a file-backed problem.
struct LoadedFile {
    Matrix a;
    std::shared_ptr<const Svd> f;
    std::optional<Vector> b;
};

LoadedFile load_file(const ProblemSource& src) {
    LoadedFile out;
    out.a = read_matrix_market(src.matrix_path);
    out.f = std::make_shared<const Svd>(svd(out.a));
    if (src.rhs_path) out.b = read_vector(*src.rhs_path);
    return out;
}

ProblemInstance instance_from(const ProblemSource& src, const LoadedFile* file, std::uint64_t ts) {
    if (src.kind == SourceKind::File) {
        if (file->b) return make_instance(file->a, *file->b);
        return make_rhs(file->a, file->f, child_seed(ts, 1), src.inconsistent);
    }
    Matrix a = src.kind == SourceKind::TypeI ? gen_type1(src.m, src.n, src.rank, src.kappa, child_seed(ts, 0))
                                             : gen_type2(src.m, src.n, child_seed(ts, 0));
    return make_rhs(std::move(a), child_seed(ts, 1), src.inconsistent);
}

} // namespace

std::string ProblemSource::label() const {
    switch (kind) {
    case SourceKind::TypeI:
        return "typeI_" + std::to_string(m) + "x" + std::to_string(n) + "_r" + std::to_string(rank) + "_k" + num(kappa);
    case SourceKind::TypeII: return "typeII_" + std::to_string(m) + "x" + std::to_string(n);
    case SourceKind::File: return matrix_path.stem().string();
    }
    return "?";
}

void BenchSpec::validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (algorithms.empty()) throw std::invalid_argument("at least one algorithm is required");
    if (problems.empty()) throw std::invalid_argument("at least one problem is required");
    if (taus.empty() || std::find(taus.begin(), taus.end(), 0u) != taus.end())
        throw std::invalid_argument("block sizes must be positive");
    if (alphas.empty()) throw std::invalid_argument("at least one stepsize is required");
    for (const StepSize& s : alphas)
        if (!(s.value > 0.0)) throw std::invalid_argument("stepsizes must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (stride < 1) throw std::invalid_argument("stride must be positive");
}

std::size_t BenchRecord::converged_count() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return t.converged; }));
}

double BenchRecord::mean_iters() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : trials)
        if (t.converged) {
            sum += static_cast<double>(t.iters);
            ++count;
        }
    return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

double BenchRecord::median_iters() const {
    std::vector<double> v;
    for (const auto& t : trials)
        if (t.converged) v.push_back(static_cast<double>(t.iters));
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double BenchRecord::mean_wall_time() const {
    double sum = 0.0;
    for (const auto& t : trials) sum += t.wall_time;
    return trials.empty() ? 0.0 : sum / static_cast<double>(trials.size());
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return child_seed(master, trial); }

std::uint64_t solver_seed(std::uint64_t ts) { return child_seed(ts, 2); }

ProblemInstance build_instance(const ProblemSource& src, std::uint64_t ts) {
    if (src.kind == SourceKind::File) {
        const LoadedFile file = load_file(src);
        return instance_from(src, &file, ts);
    }
    return instance_from(src, nullptr, ts);
}

std::vector<BenchRecord> run_bench(const BenchSpec& spec) {
    spec.validate();
    std::vector<BenchRecord> out;
    for (const ProblemSource& src : spec.problems) {
        std::optional<LoadedFile> file;
        if (src.kind == SourceKind::File) file = load_file(src);

        // Cells in sweep order: algorithm, then tau, then alpha.
        const std::size_t first = out.size();
        for (Algorithm algo : spec.algorithms) {
            const std::vector<std::size_t> taus = uses_tau(algo) ? spec.taus : std::vector<std::size_t>{1};
            for (std::size_t tau : taus) {
                const std::size_t n_alpha = uses_alpha(algo) ? spec.alphas.size() : 1;
                for (std::size_t ai = 0; ai < n_alpha; ++ai) {
                    BenchRecord r;
                    r.problem = src.label();
                    r.algorithm = algo;
                    if (uses_tau(algo)) r.tau = tau;
                    if (uses_alpha(algo)) r.alpha_spec = spec.alphas[ai];
                    out.push_back(std::move(r));
                }
            }
        }

        for (std::size_t t = 0; t < spec.trials; ++t) {
            const std::uint64_t ts = trial_seed(spec.master_seed, t);
            const ProblemInstance inst = instance_from(src, file ? &*file : nullptr, ts);
            for (std::size_t c = first; c < out.size(); ++c) {
                BenchRecord& rec = out[c];
                rec.m = inst.a.rows();
                rec.n = inst.a.cols();
                rec.rank = inst.meta.declared_rank;
                SolverConfig cfg = make_config(rec.algorithm, rec.m, rec.n, rec.tau.value_or(1),
                                               rec.alpha_spec.value_or(StepSize::absolute(1.0)), solver_seed(ts));
                cfg.max_iters = spec.max_iters;
                cfg.stop.tol = spec.tol;
                cfg.stop.check_stride = spec.stride;
                const RunTrace trace = run(inst, cfg);
                TrialResult tr;
                tr.trial = t;
                tr.seed = cfg.seed;
                tr.iters = trace.iters;
                tr.converged = trace.converged;
                tr.final_error = trace.final_error;
                tr.wall_time = trace.wall_time;
                tr.alpha = trace.alpha;
                tr.beta_max = trace.beta_max;
                tr.outside_guaranteed_regime = trace.outside_guaranteed_regime;
                rec.trials.push_back(tr);
            }
        }

        const auto base = std::find_if(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                                       [&](const BenchRecord& r) { return r.algorithm == spec.baseline; });
        if (base != out.end()) {
            const double base_time = base->mean_wall_time();
            for (std::size_t c = first; c < out.size(); ++c) {
                const double mine = out[c].mean_wall_time();
                if (mine > 0.0) out[c].speedup = base_time / mine;
            }
        }
    }
    return out;
}

std::string bench_csv_header() {
    return "row_kind,problem,m,n,rank,algorithm,tau,alpha_spec,trial,seed,alpha,beta_max,outside_regime,"
           "iters,converged,final_error,wall_time,n_trials,n_converged,n_failed,mean_iters,median_iters,"
           "mean_wall_time,speedup";
}

void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
    out << bench_csv_header() << '\n';
    for (const BenchRecord& r : records) {
        const std::string prefix = r.problem + "," + std::to_string(r.m) + "," + std::to_string(r.n) + "," +
                                   std::to_string(r.rank) + "," + std::string(to_string(r.algorithm)) + "," +
                                   (r.tau ? std::to_string(*r.tau) : "") + "," +
                                   (r.alpha_spec ? format_step_size(*r.alpha_spec) : "");
        for (const TrialResult& t : r.trials) {
            out << "trial," << prefix << ',' << t.trial << ',' << t.seed << ',' << num(t.alpha) << ','
                << (t.beta_max ? num(*t.beta_max) : "") << ',' << (t.outside_guaranteed_regime ? 1 : 0) << ','
                << t.iters << ',' << (t.converged ? 1 : 0) << ',' << num(t.final_error) << ',' << num(t.wall_time)
                << ",,,,,,,\n";
        }
        const std::size_t conv = r.converged_count();
        out << "mean," << prefix << ",,,,,,,,,," << r.trials.size() << ','
            << conv << ',' << r.trials.size() - conv << ',' << num(r.mean_iters()) << ',' << num(r.median_iters())
            << ',' << num(r.mean_wall_time()) << ',' << (r.speedup ? num(*r.speedup) : "") << '\n';
    }
}

std::vector<std::string> preset_names() { return {"table1", "table2", "table3", "figure1", "figure2", "figure3"}; }

bool preset_is_shrunk(const std::string& name) { return name == "figure2" || name == "figure3"; }

BenchSpec preset(const std::string& name, bool full_scale) {
    BenchSpec s;
    auto type1 = [](std::size_t m, std::size_t n, std::size_t r, double kappa) {
        ProblemSource p;
        p.kind = SourceKind::TypeI;
        p.m = m;
        p.n = n;
        p.rank = r;
        p.kappa = kappa;
        return p;
    };
    auto type2 = [](std::size_t m, std::size_t n) {
        ProblemSource p;
        p.kind = SourceKind::TypeII;
        p.m = m;
        p.n = n;
        return p;
    };
    if (name == "table1") {
        for (auto [m, n, r] : {std::tuple{250, 500, 150}, {500, 1000, 250}, {500, 250, 150}, {500, 250, 250},
                               {1000, 500, 250}, {1000, 500, 500}})
            for (double kappa : {2.0, 10.0}) s.problems.push_back(type1(m, n, r, kappa));
        s.algorithms = {Algorithm::REK, Algorithm::RDBK, Algorithm::REBK};
        s.alphas = {StepSize::over_beta(1.75)};
    } else if (name == "table2") {
        for (auto [m, n] : {std::pair{250, 120}, {500, 250}, {750, 370}, {1000, 500}}) s.problems.push_back(type2(m, n));
        s.algorithms = {Algorithm::REK, Algorithm::RDBK, Algorithm::REBK};
        s.alphas = {StepSize::over_beta(2.25)};
    } else if (name == "table3") {
        const char* dir = std::getenv("KACZMARZ_SUITESPARSE_DIR");
        ProblemSource p;
        p.kind = SourceKind::File;
        p.matrix_path = std::filesystem::path(dir ? dir : ".") / "abtaha1.mtx";
        s.problems = {p};
        s.algorithms = {Algorithm::REK, Algorithm::REBK};
        s.alphas = {StepSize::over_beta(1.0), StepSize::absolute(5.0)};
    } else if (name == "figure1") {
        s.problems = {type1(500, 250, 150, 2.0), type2(500, 250)};
        s.algorithms = {Algorithm::REBK};
        s.alphas = {StepSize::over_beta(0.75), StepSize::over_beta(1.25), StepSize::over_beta(1.75),
                    StepSize::over_beta(2.25), StepSize::over_beta(2.62)};
    } else if (name == "figure2") {
        const std::size_t scale = full_scale ? 10 : 1;
        s.problems = {type1(2000 * scale, 500 * scale, 450 * scale, 2.0), type2(2000 * scale, 500 * scale)};
        s.algorithms = {Algorithm::REBK};
        s.taus = {5, 10, 20, 50, 100, 200};
        s.alphas = {StepSize::over_beta(1.75)};
    } else if (name == "figure3") {
        const std::size_t scale = full_scale ? 10 : 1;
        for (std::size_t k = 1; k <= 10; ++k) s.problems.push_back(type1(200 * k * scale, 50 * scale, 25 * scale, 2.0));
        for (std::size_t k = 1; k <= 10; ++k) s.problems.push_back(type2(200 * k * scale, 50 * scale));
        s.algorithms = {Algorithm::REK, Algorithm::RDBK, Algorithm::REBK};
        s.alphas = {StepSize::over_beta(1.75)};
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return s;
}

} // namespace kaczmarz
