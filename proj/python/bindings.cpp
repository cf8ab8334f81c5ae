#include "kaczmarz/bench.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/factorizations.hpp"
#include "kaczmarz/matrix.hpp"
#include "kaczmarz/matrix_io.hpp"
#include "kaczmarz/partition.hpp"
#include "kaczmarz/problem_gen.hpp"
#include "kaczmarz/rates.hpp"
#include "kaczmarz/solvers.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace kaczmarz;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const Vector& v) { return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data()); }

Vector to_vector(const Array& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
    return Vector(a.data(), a.data() + a.size());
}

Matrix from_numpy(const Array& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto m = static_cast<std::size_t>(a.shape(0));
    const auto n = static_cast<std::size_t>(a.shape(1));
    return Matrix::dense_row_major(m, n, std::span<const double>(a.data(), m * n));
}

py::array_t<double> dense_numpy(const Matrix& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m.at(i, j);
    return out;
}

// Column-major m x k factor as an (m, k) array.
py::array_t<double> factor_numpy(const std::vector<double>& cm, std::size_t rows, std::size_t k) {
    py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(k)});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < rows; ++i) r(i, c) = cm[c * rows + i];
    return out;
}

StepSize step_size(const py::object& alpha) {
    if (py::isinstance<py::str>(alpha)) return parse_step_size(alpha.cast<std::string>());
    return StepSize::absolute(alpha.cast<double>());
}

StopMode stop_mode(const std::string& s) {
    if (s == "oracle") return StopMode::OracleError;
    if (s == "residual") return StopMode::ResidualProxy;
    if (s == "max-iters") return StopMode::MaxItersOnly;
    throw std::invalid_argument("stop must be 'oracle', 'residual' or 'max-iters'");
}

SolverConfig config_from(const Matrix& a, const std::string& algo, std::size_t tau, const py::object& alpha,
                         std::uint64_t seed, std::size_t max_iters, double tol, const std::string& stop,
                         std::size_t stride, const std::optional<Array>& x0, const std::optional<Array>& z0,
                         bool record_errors) {
    SolverConfig c = make_config(parse_algorithm(algo), a.rows(), a.cols(), tau, step_size(alpha), seed);
    c.max_iters = max_iters;
    c.stop.tol = tol;
    c.stop.mode = stop_mode(stop);
    c.stop.check_stride = stride;
    if (x0) c.x0 = to_vector(*x0);
    if (z0) c.z0 = to_vector(*z0);
    c.record_errors = record_errors;
    return c;
}

py::dict constants_dict(const RateConstants& c) {
    py::dict d;
    d["sigma1_sq"] = c.sigma1_sq;
    d["sigma_r_sq"] = c.sigma_r_sq;
    d["fro_sq"] = c.fro_sq;
    d["beta_max_rows"] = c.beta_max_rows;
    d["beta_max_cols"] = c.beta_max_cols;
    d["beta_max"] = c.beta_max;
    d["alpha"] = c.alpha;
    d["delta"] = c.delta;
    d["eta"] = c.eta;
    d["rho"] = c.rho;
    d["rho_hat"] = c.rho_hat;
    d["guaranteed"] = c.guaranteed;
    d["alpha_opt"] = c.alpha_opt;
    d["delta_opt"] = c.delta_opt;
    return d;
}

// Keeps the matrix and right-hand side alive for the solver's lifetime.
class PySolver {
public:
    PySolver(Matrix a, Vector b, const SolverConfig& c)
        : a_(std::make_shared<const Matrix>(std::move(a))), b_(std::make_shared<const Vector>(std::move(b))),
          solver_(std::make_unique<Solver>(*a_, *b_, c)) {}

    void step() { solver_->step(); }
    void advance(std::size_t n) { solver_->advance(n); }
    py::array_t<double> x() const { return to_numpy(solver_->x()); }
    py::object z() const { return solver_->z() ? py::object(to_numpy(*solver_->z())) : py::none(); }
    std::size_t k() const { return solver_->k(); }
    double alpha() const { return solver_->setup().alpha(); }
    std::optional<double> beta_max() const { return solver_->setup().beta_max(); }
    bool guaranteed() const { return solver_->setup().guaranteed_regime(); }

private:
    std::shared_ptr<const Matrix> a_;
    std::shared_ptr<const Vector> b_;
    std::unique_ptr<Solver> solver_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Randomized extended block Kaczmarz solvers";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NoResidualPossible>(m, "NoResidualPossible", m.attr("DataError").ptr());

    py::class_<Matrix>(m, "Matrix")
        .def(py::init(&from_numpy), py::arg("array"))
        .def_static(
            "csr",
            [](std::size_t rows, std::size_t cols, std::vector<std::size_t> indptr, std::vector<std::size_t> indices,
               std::vector<double> data) { return Matrix::csr(rows, cols, indptr, indices, data); },
            py::arg("rows"), py::arg("cols"), py::arg("indptr"), py::arg("indices"), py::arg("data"))
        .def_property_readonly("shape", [](const Matrix& a) { return py::make_tuple(a.rows(), a.cols()); })
        .def_property_readonly("is_sparse", &Matrix::is_sparse)
        .def_property_readonly("nnz", &Matrix::nnz)
        .def("to_numpy", &dense_numpy)
        .def("__matmul__", [](const Matrix& a, const Array& x) { return to_numpy(a.multiply(to_vector(x))); })
        .def("rmatvec", [](const Matrix& a, const Array& y) { return to_numpy(a.multiply_transposed(to_vector(y))); })
        .def("frobenius_norm_sq", [](const Matrix& a) { return frobenius_norm_sq(a); })
        .def("spectral_norm_sq", [](const Matrix& a) { return spectral_norm_sq(a); })
        .def("__repr__", [](const Matrix& a) {
            std::ostringstream s;
            s << "<Matrix " << a.rows() << "x" << a.cols() << (a.is_sparse() ? " sparse" : " dense") << ">";
            return s.str();
        });

    m.def(
        "svd",
        [](const Matrix& a) {
            const Svd f = svd(a);
            return py::make_tuple(factor_numpy(f.u, f.rows, f.rank()), to_numpy(f.sigma),
                                  factor_numpy(f.v, f.cols, f.rank()));
        },
        py::arg("a"), "Thin SVD truncated at numerical rank: (U, sigma, V) with A ~= U diag(sigma) V^T.");
    m.def(
        "lstsq_min_norm", [](const Matrix& a, const Array& b) { return to_numpy(pinv_apply(svd(a), to_vector(b))); },
        py::arg("a"), py::arg("b"), "A^+ b.");

    py::class_<ProblemInstance>(m, "Problem")
        .def_property_readonly("a", [](const ProblemInstance& p) { return p.a; })
        .def_property_readonly("b", [](const ProblemInstance& p) { return to_numpy(p.b); })
        .def_property_readonly("x_star", [](const ProblemInstance& p) { return to_numpy(p.x_star); })
        .def_property_readonly("b_perp", [](const ProblemInstance& p) { return to_numpy(p.b_perp); })
        .def_property_readonly("rank", [](const ProblemInstance& p) { return p.meta.declared_rank; })
        .def_property_readonly("consistent", [](const ProblemInstance& p) { return p.meta.consistent; })
        .def_property_readonly("residual_norm", [](const ProblemInstance& p) { return p.meta.residual_norm; });

    m.def("gen_type1", &gen_type1, py::arg("m"), py::arg("n"), py::arg("rank"), py::arg("kappa"), py::arg("seed"));
    m.def("gen_type2", &gen_type2, py::arg("m"), py::arg("n"), py::arg("seed"));
    m.def(
        "make_rhs",
        [](const Matrix& a, std::uint64_t seed, bool inconsistent, double perp_scale) {
            return make_rhs(a, seed, inconsistent, perp_scale);
        },
        py::arg("a"), py::arg("seed"), py::arg("inconsistent") = true, py::arg("perp_scale") = 1.0);
    m.def(
        "make_problem", [](const Matrix& a, const Array& b) { return make_instance(a, to_vector(b)); }, py::arg("a"),
        py::arg("b"), "Wraps a user system and computes its least-squares oracle.");

    py::class_<RunTrace>(m, "RunTrace")
        .def_property_readonly("algorithm", [](const RunTrace& t) { return std::string(to_string(t.algorithm)); })
        .def_readonly("iters", &RunTrace::iters)
        .def_readonly("converged", &RunTrace::converged)
        .def_readonly("final_error", &RunTrace::final_error)
        .def_readonly("errors", &RunTrace::errors)
        .def_readonly("wall_time", &RunTrace::wall_time)
        .def_readonly("alpha", &RunTrace::alpha)
        .def_readonly("beta_max", &RunTrace::beta_max)
        .def_readonly("outside_guaranteed_regime", &RunTrace::outside_guaranteed_regime)
        .def_readonly("warnings", &RunTrace::warnings)
        .def_property_readonly("x", [](const RunTrace& t) { return to_numpy(t.x); });

    m.def(
        "solve",
        [](const ProblemInstance& p, const std::string& algo, std::size_t tau, const py::object& alpha,
           std::uint64_t seed, std::size_t max_iters, double tol, const std::string& stop, std::size_t stride,
           std::optional<Array> x0, std::optional<Array> z0, bool record_errors) {
            const SolverConfig c = config_from(p.a, algo, tau, alpha, seed, max_iters, tol, stop, stride, x0, z0,
                                               record_errors);
            py::gil_scoped_release release;
            return run(p, c);
        },
        py::arg("problem"), py::arg("algorithm") = "REBK", py::arg("tau") = 10, py::arg("alpha") = "1x",
        py::arg("seed") = 0, py::arg("max_iters") = 1'000'000, py::arg("tol") = 1e-5, py::arg("stop") = "oracle",
        py::arg("stride") = 1, py::arg("x0") = py::none(), py::arg("z0") = py::none(),
        py::arg("record_errors") = false,
        "Runs one solver to the stopping rule. alpha is a float or a string like '1.75x' (units of 1/beta_max).");

    py::class_<PySolver>(m, "Solver")
        .def(py::init([](const Matrix& a, const Array& b, const std::string& algo, std::size_t tau,
                         const py::object& alpha, std::uint64_t seed, std::optional<Array> x0,
                         std::optional<Array> z0) {
                 const SolverConfig c =
                     config_from(a, algo, tau, alpha, seed, 0, 1e-5, "max-iters", 1, x0, z0, false);
                 return PySolver(a, to_vector(b), c);
             }),
             py::arg("a"), py::arg("b"), py::arg("algorithm") = "REBK", py::arg("tau") = 10, py::arg("alpha") = "1x",
             py::arg("seed") = 0, py::arg("x0") = py::none(), py::arg("z0") = py::none())
        .def("step", &PySolver::step)
        .def("advance", &PySolver::advance, py::arg("iterations"))
        .def_property_readonly("x", &PySolver::x)
        .def_property_readonly("z", &PySolver::z)
        .def_property_readonly("k", &PySolver::k)
        .def_property_readonly("alpha", &PySolver::alpha)
        .def_property_readonly("beta_max", &PySolver::beta_max)
        .def_property_readonly("guaranteed_regime", &PySolver::guaranteed);

    m.def(
        "rate_constants",
        [](const Matrix& a, std::size_t tau_row, std::size_t tau_col, double alpha) {
            const Svd f = svd(a);
            return constants_dict(compute_rate_constants(a, f, contiguous_partition(Axis::Row, a.rows(), tau_row),
                                                         contiguous_partition(Axis::Column, a.cols(), tau_col),
                                                         alpha));
        },
        py::arg("a"), py::arg("tau_row"), py::arg("tau_col"), py::arg("alpha"));
    m.def(
        "compute_delta", [](const Matrix& a, double alpha) { return compute_delta(svd(a), frobenius_norm_sq(a), alpha); },
        py::arg("a"), py::arg("alpha"));
    m.def(
        "optimal_alpha",
        [](const Matrix& a) {
            const OptimalStep o = optimal_alpha(svd(a), frobenius_norm_sq(a));
            return py::make_tuple(o.alpha, o.delta);
        },
        py::arg("a"), "(alpha_opt, delta_opt)");
    m.def("compute_eta_rho",
          [](double beta_rows, double beta_cols, double sigma_r_sq, double fro_sq, double alpha) {
              const EtaRho e = compute_eta_rho(beta_rows, beta_cols, sigma_r_sq, fro_sq, alpha);
              py::dict d;
              d["eta"] = e.eta;
              d["rho"] = e.rho;
              d["rho_hat"] = e.rho_hat;
              d["guaranteed"] = e.guaranteed;
              return d;
          },
          py::arg("beta_rows"), py::arg("beta_cols"), py::arg("sigma_r_sq"), py::arg("fro_sq"), py::arg("alpha"));

    m.def("read_matrix_market", [](const std::filesystem::path& p) { return read_matrix_market(p); }, py::arg("path"));
    m.def("write_matrix_market", [](const Matrix& a, const std::filesystem::path& p) { write_matrix_market(a, p); },
          py::arg("a"), py::arg("path"));
    m.def("read_vector", [](const std::filesystem::path& p) { return to_numpy(read_vector(p)); }, py::arg("path"));

    m.def("preset_names", &preset_names);
    m.def(
        "bench_preset_csv",
        [](const std::string& name, std::size_t trials, std::uint64_t seed) {
            BenchSpec s = preset(name);
            s.trials = trials;
            s.master_seed = seed;
            std::vector<BenchRecord> recs;
            {
                py::gil_scoped_release release;
                recs = run_bench(s);
            }
            std::ostringstream out;
            write_bench_csv(recs, out);
            return out.str();
        },
        py::arg("name"), py::arg("trials") = 10, py::arg("seed") = 1, "Runs a named preset and returns its CSV.");
}
