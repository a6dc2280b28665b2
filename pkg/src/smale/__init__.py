"""Homotopy continuation with the adaptive linear homotopy, and its average-case experiments."""

from __future__ import annotations

__version__ = "0.1.0"

from .algebra import (
    DegreePattern,
    PolySystem,
    apply_unitary,
    evaluate,
    evaluate_with_jacobian,
    inner_product,
    jacobian,
    norm,
    proj_distance,
    sphere_distance,
    system_from_dict,
    system_to_dict,
)
from .errors import (
    DegeneratePencilError,
    NonConvergenceError,
    PreconditionError,
    SingularJacobianError,
    SmaleError,
    UnreliableCountError,
    UnsupportedDegreeError,
)
from .experiments import ExperimentResult, run_experiment
from .homotopy import PathTrace, alh, t_of_tau
from .newton import AlhParams, certify, mu2_and_max, mu_norm, newton_step
from .sampling import GaussianSpec, build_g, decompose, sample_gaussian, sample_rho_st
from .solvers import SolveResult, build_U, count_real_zeros, lv_solve, md_solve, solve_all

__all__ = [
    "AlhParams", "DegeneratePencilError", "DegreePattern", "ExperimentResult", "GaussianSpec",
    "NonConvergenceError", "PathTrace", "PolySystem", "PreconditionError", "SingularJacobianError",
    "SmaleError", "SolveResult", "UnreliableCountError", "UnsupportedDegreeError", "alh",
    "apply_unitary", "build_U", "build_g", "certify", "count_real_zeros", "decompose", "evaluate",
    "evaluate_with_jacobian", "inner_product", "jacobian", "lv_solve", "md_solve", "mu2_and_max",
    "mu_norm", "newton_step", "norm", "proj_distance", "run_experiment", "sample_gaussian",
    "sample_rho_st", "solve_all", "sphere_distance", "system_from_dict", "system_to_dict", "t_of_tau",
]
