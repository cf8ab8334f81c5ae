"""Randomized extended block Kaczmarz solvers for least-squares problems."""

from ._core import (
    DataError,
    Matrix,
    NoResidualPossible,
    Problem,
    RunTrace,
    Solver,
    bench_preset_csv,
    compute_delta,
    compute_eta_rho,
    gen_type1,
    gen_type2,
    lstsq_min_norm,
    make_problem,
    make_rhs,
    optimal_alpha,
    preset_names,
    rate_constants,
    read_matrix_market,
    read_vector,
    solve,
    svd,
    write_matrix_market,
)

ALGORITHMS = ("RK", "REK", "RBK", "RDBK", "RABK", "DSBGS", "REBK")

__all__ = [
    "ALGORITHMS",
    "DataError",
    "Matrix",
    "NoResidualPossible",
    "Problem",
    "RunTrace",
    "Solver",
    "bench_preset_csv",
    "compute_delta",
    "compute_eta_rho",
    "gen_type1",
    "gen_type2",
    "lstsq_min_norm",
    "make_problem",
    "make_rhs",
    "optimal_alpha",
    "preset_names",
    "rate_constants",
    "read_matrix_market",
    "read_vector",
    "solve",
    "svd",
    "write_matrix_market",
]
