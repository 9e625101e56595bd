"""Hybrid perturbed iterations for variational inequalities over fixed-point sets."""
from .core import ConvergenceError, DimensionError, DomainError, VIPError, inner, norm
from .estimators import HybridPerturbedSolver, ImplicitSolver, ProjectedGradientOracle, TikhonovPath
from .operators import ProblemInstance, certify_constants, fix_residual
from .schedules import check_conditions
from .sets import contains, dykstra_project, project
from .solver import (
    SolverConfig,
    delta0_star,
    hpa_step,
    implicit_solve,
    oracle_solve,
    regularization_path,
    regularized_run,
    run_hpa,
    sigma0,
    st_apply,
    vip_residual,
)

__version__ = "0.1.0"
