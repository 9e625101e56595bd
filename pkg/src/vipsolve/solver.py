"""Hybrid perturbed iteration, its implicit counterpart and the Tikhonov path.

For a problem ``(Q, T, f, F)`` with ``alpha < eta`` the explicit scheme is::

    x_{n+1} = beta_n x_n + (1 - beta_n) P_Q(S_{alpha_n}(x_n) + e_n)
    S_t(x)  = t f(x) + (I - t F) T x

``S_t`` is a ``(1 - t sigma0)``-contraction for ``t <= delta0 < delta0_star``
with ``delta0_star = 2 (eta - alpha) / kappa**2`` and
``sigma0 = eta - alpha - kappa**2 delta0 / 2``.

The projected-gradient oracle in :func:`oracle_solve` solves the same
variational inequality by a different route (projections onto ``Fix(T)``),
so the two can check each other.
"""
import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import ConvergenceError, DomainError, as_vector, check_scalar
from .operators import ProblemInstance, residual_constants
from .schedules import ZeroError, check_conditions
from .sets import Intersection, contains

TRACE_COLUMNS = ("n", "alpha", "beta", "err_norm", "step_norm", "fix_residual", "dist_ref")


def _nrm(v):
    return math.sqrt(float(v @ v))


def delta0_star(p):
    """Largest admissible step bound ``2 (eta - alpha) / kappa**2``."""
    if p.limit_case or not p.alpha < p.eta:
        raise DomainError("delta0_star is undefined when alpha == eta; use the regularization path")
    return 2.0 * (p.eta - p.alpha) / p.kappa**2


def default_delta0(p):
    return 0.5 * delta0_star(p)


def sigma0(p, delta0):
    """Contraction margin ``eta - alpha - kappa**2 delta0 / 2`` for ``0 < delta0 < delta0_star``."""
    star = delta0_star(p)
    if not 0.0 < delta0 < star:
        raise DomainError(f"delta0 out of range: need 0 < delta0 < {star:.17g}, got {delta0!r}")
    return p.eta - p.alpha - 0.5 * p.kappa**2 * delta0


def st_apply(p, t, x, delta0=None):
    """``S_t(x) = t f(x) + T x - t F(T x)``.

    ``t`` must satisfy ``0 < t <= delta0`` (or ``t < delta0_star`` when no
    ``delta0`` is given). Accepts a stack of points.
    """
    bound = delta0_star(p)
    if delta0 is not None:
        sigma0(p, delta0)
        if not 0.0 < t <= delta0:
            raise DomainError(f"t={t!r} out of range (0, {delta0}]")
    elif not 0.0 < t < bound:
        raise DomainError(f"t={t!r} out of range (0, {bound})")
    x = np.asarray(x, dtype=float)
    Tx = p.T(x)
    return t * p.f._apply(x) + Tx - t * p.F._apply(Tx)


def hpa_step(p, alpha_n, beta_n, e_n, x_n):
    """One step ``beta x + (1 - beta) P_Q(S_alpha(x) + e)``.

    ``alpha_n = 0`` is accepted (a plain averaged ``T`` step), which happens
    when a geometric schedule underflows.
    """
    bound = delta0_star(p)
    if not 0.0 <= alpha_n < bound:
        raise DomainError(f"alpha_n={alpha_n!r} out of range [0, {bound})")
    check_scalar(beta_n, "beta_n", 0.0, 1.0)
    x_n = as_vector(x_n, p.dim, name="x_n")
    e_n = np.zeros(p.dim) if e_n is None else as_vector(e_n, p.dim, name="e_n")
    if beta_n == 1.0:
        return x_n.copy()
    Tx = p.T._apply(x_n)
    y = alpha_n * p.f._apply(x_n) + Tx - alpha_n * p.F._apply(Tx) + e_n
    return beta_n * x_n + (1.0 - beta_n) * p.Q._project(y)


@dataclass
class SolverConfig:
    """Settings for one explicit run.

    ``delta0`` defaults to half of ``delta0_star``. ``q_ref``, when given,
    fills the ``dist_ref`` column of the trace. For limit-case problems the
    ``delta0`` check is deferred to the regularized instance.
    """

    problem: ProblemInstance
    alpha: object
    beta: object
    error: object = field(default_factory=ZeroError)
    x0: np.ndarray = None
    max_iter: int = 100_000
    stop_tol: float = 1e-6
    delta0: float = None
    q_ref: np.ndarray = None

    def __post_init__(self):
        p = self.problem
        self.x0 = p.Q.project(np.zeros(p.dim)) if self.x0 is None else as_vector(self.x0, p.dim, name="x0")
        if not contains(p.Q, self.x0, 1e-10):
            raise DomainError("x0 must lie in Q")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")
        self.max_iter = int(self.max_iter)
        check_scalar(self.stop_tol, "stop_tol", 0.0, low_open=True)
        if self.q_ref is not None:
            self.q_ref = as_vector(self.q_ref, p.dim, name="q_ref")
        if not p.limit_case:
            if self.delta0 is None:
                self.delta0 = default_delta0(p)
            sigma0(p, self.delta0)

    @property
    def sigma0(self):
        return sigma0(self.problem, self.delta0)


class IterationTrace:
    """Per-step diagnostics of an explicit run.

    Row ``k`` holds ``x_k`` together with the step quantities used to leave it;
    the terminal row has NaN in the step columns. ``status`` is one of
    ``"converged"``, ``"max_iter"`` or ``"diverged"``.
    """

    def __init__(self, iterates, columns, status, n_clamped=0, conditions=None):
        self.iterates = iterates
        self.columns = columns
        self.status = status
        self.n_clamped = n_clamped
        self.conditions = conditions

    def __len__(self):
        return self.iterates.shape[0]

    def __getattr__(self, name):
        try:
            return self.__dict__["columns"][name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def x(self):
        return self.iterates[-1]

    @property
    def n_iter(self):
        return len(self) - 1

    def rows(self):
        cols = [self.columns[c] for c in TRACE_COLUMNS]
        return zip(*cols)

    def to_csv(self, path):
        """Write the trace with 17 significant digits; NaN is written as an empty field."""
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for row in self.rows():
                fields = [str(int(row[0]))]
                fields += ["" if math.isnan(v) else f"{v:.17g}" for v in row[1:]]
                fh.write(",".join(fields) + "\n")


def run_hpa(cfg):
    """Run the explicit hybrid perturbed iteration.

    Step sizes are clamped to ``min(alpha_n, delta0, 1)``; the number of
    clamped steps is kept on the trace. The run stops once both
    ``||x_{n+1} - x_n|| <= stop_tol * alpha_n`` and
    ``||x_{n+1} - T x_{n+1}|| <= stop_tol``, or after ``max_iter`` steps.
    A non-finite iterate ends the run with status ``"diverged"`` and the last
    finite row kept.

    Parameters
    ----------
    cfg : SolverConfig

    Returns
    -------
    IterationTrace
    """
    p = cfg.problem
    if p.limit_case:
        raise DomainError("limit-case instance: use regularized_run / regularization_path")
    conditions = check_conditions(cfg.alpha, cfg.beta, cfg.error)
    if not conditions.overall_theorem2_applicable:
        warnings.warn("schedules do not satisfy the convergence hypotheses", RuntimeWarning, stacklevel=2)

    f, F, T, Q = p.f._apply, p.F._apply, p.T._apply, p.Q._project
    alpha_s, beta_s, err_s = cfg.alpha, cfg.beta, cfg.error
    zero_err = isinstance(err_s, ZeroError)
    cap = min(cfg.delta0, 1.0)
    tol = cfg.stop_tol
    dim = p.dim
    q_ref = cfg.q_ref

    x = cfg.x0.copy()
    Tx = T(x)
    fr = _nrm(x - Tx)
    xs = [x]
    al, be, en, sn, frs, dr = [], [], [], [], [], []
    n_clamped = 0
    status = "max_iter"
    for n in range(cfg.max_iter):
        a_raw = float(alpha_s(n))
        a = a_raw if a_raw <= cap else cap
        n_clamped += a < a_raw
        b = float(beta_s(n))
        y = a * f(x) + Tx - a * F(Tx)
        if zero_err:
            e_norm = 0.0
        else:
            e = err_s(n, a, dim)
            e_norm = _nrm(e)
            y = y + e
        x_new = b * x + (1.0 - b) * Q(y)
        step = _nrm(x_new - x)
        if not math.isfinite(step):
            status = "diverged"
            break
        Tx_new = T(x_new)
        fr_new = _nrm(x_new - Tx_new)
        al.append(a)
        be.append(b)
        en.append(e_norm)
        sn.append(step)
        frs.append(fr)
        dr.append(_nrm(x - q_ref) if q_ref is not None else math.nan)
        x, Tx, fr = x_new, Tx_new, fr_new
        xs.append(x)
        if step <= tol * a and fr <= tol:
            status = "converged"
            break

    nan = math.nan
    al.append(nan)
    be.append(nan)
    en.append(nan)
    sn.append(nan)
    frs.append(fr)
    dr.append(_nrm(x - q_ref) if q_ref is not None else nan)
    iterates = np.array(xs)
    columns = {
        "n": np.arange(len(xs)),
        "alpha": np.array(al),
        "beta": np.array(be),
        "err_norm": np.array(en),
        "step_norm": np.array(sn),
        "fix_residual": np.array(frs),
        "dist_ref": np.array(dr),
    }
    return IterationTrace(iterates, columns, status, n_clamped=int(n_clamped), conditions=conditions)


def implicit_solve(p, t, e=None, tol=1e-10, x_init=None, delta0=None):
    """Banach iteration for ``x_t = P_Q(S_t(x_t) + e)``.

    The map is a ``(1 - t sigma0)``-contraction, so stopping once a step is
    at most ``tol * t sigma0 / (1 - t sigma0)`` guarantees ``||x - x_t|| <= tol``.

    Parameters
    ----------
    p : ProblemInstance
    t : float
        ``0 < t <= delta0``.
    e : array_like, optional
        Perturbation ``e(t)``; zero by default.
    tol : float
        Distance to the exact fixed point that is guaranteed on return.
    x_init : array_like, optional
        Starting point, ``P_Q(0)`` by default. The result does not depend on it
        beyond ``tol``.
    delta0 : float, optional
        Defaults to ``delta0_star / 2``.

    Raises
    ------
    ConvergenceError
        If the a-priori iteration count is exceeded, which means the
        certified constants are wrong.
    """
    delta0 = default_delta0(p) if delta0 is None else delta0
    s0 = sigma0(p, delta0)
    if not 0.0 < t <= delta0:
        raise DomainError(f"t={t!r} out of range (0, {delta0}]")
    check_scalar(tol, "tol", 0.0, low_open=True)
    e = np.zeros(p.dim) if e is None else as_vector(e, p.dim, name="e")
    x = p.Q.project(np.zeros(p.dim) if x_init is None else as_vector(x_init, p.dim, name="x_init"))

    f, F, T, Q = p.f._apply, p.F._apply, p.T._apply, p.Q._project
    L = 1.0 - t * s0
    threshold = tol * (t * s0) / L if L > 0 else math.inf

    def phi(z):
        Tz = T(z)
        return Q(t * f(z) + Tz - t * F(Tz) + e)

    x_new = phi(x)
    d_first = _nrm(x_new - x)
    if d_first <= threshold:
        return x_new
    budget = math.ceil(math.log(threshold / d_first) / math.log(L)) + 10
    x = x_new
    for k in range(budget):
        x_new = phi(x)
        step = _nrm(x_new - x)
        x = x_new
        if step <= threshold:
            return x
    raise ConvergenceError(
        f"implicit iteration exceeded its a-priori budget of {budget} steps; check the certified constants",
        last_iterate=x,
        n_iter=budget,
    )


def oracle_step(p):
    """Default projected-gradient step ``m_g / L_g**2`` for ``g = F - f``."""
    m, L = residual_constants(p)
    if m > 0:
        return m / L**2
    return 1.0 / L if L > 0 else 1.0


def oracle_solve(p, lam=None, tol=1e-12, max_iter=1_000_000):
    """Independent ground truth by projected gradient on ``Fix(T)``.

    Iterates ``q <- P_C(q - lam (F(q) - f(q)))`` with ``C = Fix(T)``. For
    ``0 < lam < 2 m_g / L_g**2`` the map contracts with factor
    ``sqrt(1 - 2 lam m_g + lam**2 L_g**2)``, where ``m_g`` and ``L_g`` are the
    exact constants of ``g = F - f``. Returns ``q`` with ``||q - q*|| <= tol``.
    """
    m, L = residual_constants(p)
    if not m > 0:
        raise DomainError("F - f is not strongly monotone; the oracle needs a unique solution")
    lam = oracle_step(p) if lam is None else check_scalar(lam, "lam", 0.0, low_open=True)
    if not lam < 2.0 * m / L**2:
        raise DomainError(f"lam={lam!r} out of range (0, {2.0 * m / L**2:.17g})")
    rate = math.sqrt(max(0.0, 1.0 - 2.0 * lam * m + (lam * L) ** 2))
    C = p.C
    proj_noise = 4.0 * C.tol if isinstance(C, Intersection) else 0.0
    G, c = p.F.matrix - p.f.matrix, p.F.shift - p.f.shift

    def phi(q):
        return C.project(q - lam * (G @ q + c))

    q = C.project(np.zeros(p.dim))
    prev = None
    for k in range(int(max_iter)):
        q_new = phi(q)
        step = _nrm(q_new - q)
        q = q_new
        if rate == 0.0 or step <= tol * (1.0 - rate) / rate:
            return q
        if prev is not None and step > rate * prev + 1e-9 * prev + 1e-13 * (1.0 + _nrm(q)) + proj_noise:
            raise ConvergenceError(
                "projected-gradient steps grew; lam or the certified constants are wrong",
                last_iterate=q,
                n_iter=k,
            )
        prev = step
    raise ConvergenceError(f"oracle did not converge in {max_iter} steps", last_iterate=q, n_iter=max_iter)


def vip_residual(p, q, lam=None):
    """Natural-map residual ``||q - P_C(q - lam (F(q) - f(q)))||``; zero iff q solves the VI."""
    lam = oracle_step(p) if lam is None else check_scalar(lam, "lam", 0.0, low_open=True)
    q = as_vector(q, p.dim, name="q")
    return _nrm(q - p.C.project(q - lam * p.g(q)))


@dataclass
class RegularizationRecord:
    epsilon: float
    q_eps: np.ndarray
    norm_q_eps: float
    vip_eps_residual: float
    status: str = "converged"
    n_iter: int = 0

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "q_eps": self.q_eps.tolist(),
            "norm_q_eps": self.norm_q_eps,
            "vip_eps_residual": self.vip_eps_residual,
            "status": self.status,
            "n_iter": self.n_iter,
        }


def regularized_run(p, eps, cfg, return_trace=False):
    """Solve the Tikhonov-regularized problem for one ``eps``.

    ``F`` is replaced by ``F + eps I`` (so ``eta`` and ``kappa`` grow by
    ``eps``) and the explicit iteration runs with the schedules of ``cfg``.
    ``cfg.delta0`` is reused only if it is admissible for the new instance;
    otherwise pass ``None`` to get half of the new ``delta0_star``.
    """
    if not p.limit_case:
        raise DomainError("regularized_run expects a limit-case instance")
    eps = check_scalar(eps, "eps", 0.0, low_open=True)
    p_eps = p.regularized(eps)
    run_cfg = dataclasses.replace(cfg, problem=p_eps, delta0=cfg.delta0 if not cfg.problem.limit_case else None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = run_hpa(run_cfg)
    q = trace.x.copy()
    record = RegularizationRecord(
        epsilon=eps,
        q_eps=q,
        norm_q_eps=_nrm(q),
        vip_eps_residual=vip_residual(p_eps, q),
        status=trace.status,
        n_iter=trace.n_iter,
    )
    return (record, trace) if return_trace else record


def regularization_path(p, eps_list, cfg):
    """Records of :func:`regularized_run` along a strictly decreasing ``eps_list``."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise DomainError("eps_list must be nonempty and positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DomainError("eps_list must be strictly decreasing")
    return [regularized_run(p, e, cfg) for e in eps_list]
