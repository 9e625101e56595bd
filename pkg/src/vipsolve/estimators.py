"""Estimator-style wrappers around the solvers.

The "data" passed to ``fit`` is a :class:`~vipsolve.operators.ProblemInstance`;
hyperparameters live in ``__init__`` so ``get_params``/``set_params``/``clone``
work as usual. Results are stored in trailing-underscore attributes.
"""
import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import DomainError
from .operators import ProblemInstance
from .schedules import ConstantStep, PowerLaw, ZeroError
from .solver import (
    SolverConfig,
    implicit_solve,
    oracle_solve,
    regularization_path,
    run_hpa,
    vip_residual,
)


def check_problem(problem, limit_case=None):
    """Validate that ``problem`` is a :class:`ProblemInstance` of the expected kind."""
    if not isinstance(problem, ProblemInstance):
        raise TypeError(f"expected a ProblemInstance, got {type(problem).__name__}")
    if limit_case is not None and problem.limit_case != limit_case:
        kind = "a limit-case" if limit_case else "a strictly monotone"
        raise DomainError(f"this estimator needs {kind} instance")
    return problem


class HybridPerturbedSolver(BaseEstimator):
    """Explicit hybrid perturbed iteration.

    Parameters
    ----------
    alpha, beta, error : schedules, optional
        Default to ``1/(n+1)``, constant ``0.5`` and no perturbation.
    delta0 : float, optional
        Step cap; half of the admissible bound by default.
    max_iter : int
    stop_tol : float
    x0 : array_like, optional
        Starting point in Q; ``P_Q(0)`` by default.
    strict : bool
        Refuse schedules whose convergence conditions are not all satisfied.

    Attributes
    ----------
    solution_ : ndarray
    trace_ : IterationTrace
    status_ : str
    n_iter_ : int
    conditions_ : ConditionReport
    """

    def __init__(self, alpha=None, beta=None, error=None, delta0=None, max_iter=100_000, stop_tol=1e-6, x0=None, strict=False):
        self.alpha = alpha
        self.beta = beta
        self.error = error
        self.delta0 = delta0
        self.max_iter = max_iter
        self.stop_tol = stop_tol
        self.x0 = x0
        self.strict = strict

    def _config(self, problem, q_ref=None):
        return SolverConfig(
            problem=problem,
            alpha=self.alpha if self.alpha is not None else PowerLaw(1.0, 1.0),
            beta=self.beta if self.beta is not None else ConstantStep(0.5),
            error=self.error if self.error is not None else ZeroError(),
            x0=self.x0,
            max_iter=self.max_iter,
            stop_tol=self.stop_tol,
            delta0=self.delta0,
            q_ref=q_ref,
        )

    def fit(self, problem, q_ref=None):
        problem = check_problem(problem, limit_case=False)
        cfg = self._config(problem, q_ref)
        with warnings.catch_warnings():
            if not self.strict:
                warnings.simplefilter("ignore", RuntimeWarning)
            else:
                warnings.simplefilter("error", RuntimeWarning)
            trace = run_hpa(cfg)
        self.trace_ = trace
        self.solution_ = trace.x.copy()
        self.status_ = trace.status
        self.n_iter_ = trace.n_iter
        self.conditions_ = trace.conditions
        return self

    def score(self, problem):
        """Negative natural-map residual of the fitted solution on ``problem``."""
        check_is_fitted(self, "solution_")
        return -vip_residual(check_problem(problem), self.solution_)


class ImplicitSolver(BaseEstimator):
    """Fixed point ``x_t`` of the implicit scheme for one value of ``t``."""

    def __init__(self, t=0.01, error=None, tol=1e-10, delta0=None, x_init=None):
        self.t = t
        self.error = error
        self.tol = tol
        self.delta0 = delta0
        self.x_init = x_init

    def fit(self, problem):
        problem = check_problem(problem, limit_case=False)
        self.solution_ = implicit_solve(problem, self.t, self.error, self.tol, self.x_init, self.delta0)
        return self


class TikhonovPath(BaseEstimator):
    """Regularization path ``q_eps`` for a limit-case instance.

    ``solution_`` is the last (smallest ``eps``) point, which approaches the
    least-norm solution as ``eps`` decreases.
    """

    def __init__(self, epsilons=(1e-1, 1e-2, 1e-3), alpha=None, beta=None, error=None, max_iter=200_000, stop_tol=1e-5, x0=None):
        self.epsilons = epsilons
        self.alpha = alpha
        self.beta = beta
        self.error = error
        self.max_iter = max_iter
        self.stop_tol = stop_tol
        self.x0 = x0

    def fit(self, problem):
        problem = check_problem(problem, limit_case=True)
        cfg = SolverConfig(
            problem=problem,
            alpha=self.alpha if self.alpha is not None else PowerLaw(1.0, 1.0),
            beta=self.beta if self.beta is not None else ConstantStep(0.5),
            error=self.error if self.error is not None else ZeroError(),
            x0=self.x0,
            max_iter=self.max_iter,
            stop_tol=self.stop_tol,
        )
        self.records_ = regularization_path(problem, self.epsilons, cfg)
        self.solution_ = self.records_[-1].q_eps.copy()
        self.norms_ = np.array([r.norm_q_eps for r in self.records_])
        return self


class ProjectedGradientOracle(BaseEstimator):
    """Reference solver: projected gradient on ``Fix(T)``."""

    def __init__(self, step=None, tol=1e-12):
        self.step = step
        self.tol = tol

    def fit(self, problem):
        problem = check_problem(problem, limit_case=False)
        self.solution_ = oracle_solve(problem, self.step, self.tol)
        self.vip_residual_ = vip_residual(problem, self.solution_, self.step)
        return self

    def score(self, problem):
        check_is_fitted(self, "solution_")
        return -vip_residual(check_problem(problem), self.solution_)
