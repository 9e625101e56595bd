"""Mappings used to pose variational inequalities over fixed-point sets.

Three families:

* nonexpansive maps ``T`` whose fixed-point set is a known convex set,
* Lipschitz maps ``f`` with certified coefficient ``alpha``,
* strongly monotone Lipschitz maps ``F`` with certified ``eta`` and ``kappa``.

Constants are computed exactly from the defining matrices at construction.
:func:`certify_constants` only cross-checks them on random pairs.
"""
from dataclasses import dataclass

import numpy as np

from .core import DimensionError, DomainError, as_points, as_vector, norm
from .sets import AffineSubspace, ConvexSet, Intersection, WholeSpace, contains, sample_points, set_from_dict


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _square(M, name):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} has non-finite entries")
    return M


def spectral_norm(M):
    """Largest singular value of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.any(M):
        return 0.0
    return float(np.linalg.norm(M, 2))


def min_symmetric_eigenvalue(M):
    """Smallest eigenvalue of the symmetric part ``(M + M^T) / 2``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


class _Mapping:
    def __call__(self, x):
        return self._apply(as_points(x, self.dim))

    def to_dict(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


# -- nonexpansive maps ---------------------------------------------------------


class NonexpansiveMap(_Mapping):
    """Base class for ``T``. ``fix_set`` describes ``Fix(T)`` as a convex set."""

    @property
    def fix_set(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Identity(NonexpansiveMap):
    n: int

    @property
    def dim(self):
        return self.n

    def _apply(self, x):
        return np.array(x, copy=True)

    @property
    def fix_set(self):
        return WholeSpace(self.n)

    def to_dict(self):
        return {"type": "identity", "dim": self.n}


@dataclass(frozen=True, eq=False)
class SetProjection(NonexpansiveMap):
    C: ConvexSet

    @property
    def dim(self):
        return self.C.dim

    def _apply(self, x):
        return self.C._project(x)

    @property
    def fix_set(self):
        return self.C

    def to_dict(self):
        return {"type": "projection", "set": self.C.to_dict()}


@dataclass(frozen=True, eq=False)
class ProjectionComposition(NonexpansiveMap):
    """``P_{C_k} o ... o P_{C_1}``: the first set is applied first.

    When the sets have a common point, the fixed points are exactly the
    intersection.
    """

    sets: tuple

    def __post_init__(self):
        sets = tuple(self.sets)
        if not sets:
            raise DomainError("composition needs at least one set")
        if len({s.dim for s in sets}) != 1:
            raise DimensionError("composed sets have different dimensions")
        object.__setattr__(self, "sets", sets)

    @property
    def dim(self):
        return self.sets[0].dim

    def _apply(self, x):
        for s in self.sets:
            x = s._project(x)
        return x

    @property
    def fix_set(self):
        return self.sets[0] if len(self.sets) == 1 else Intersection(self.sets)

    def to_dict(self):
        return {"type": "composition", "sets": [s.to_dict() for s in self.sets]}


@dataclass(frozen=True, eq=False)
class Averaged(NonexpansiveMap):
    """``(1 - weight) I + weight * base``."""

    base: NonexpansiveMap
    weight: float

    def __post_init__(self):
        if not 0.0 < self.weight < 1.0:
            raise DomainError("averaging weight must lie in (0, 1)")
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def dim(self):
        return self.base.dim

    def _apply(self, x):
        return (1.0 - self.weight) * x + self.weight * self.base._apply(x)

    @property
    def fix_set(self):
        return self.base.fix_set

    def to_dict(self):
        return {"type": "averaged", "base": self.base.to_dict(), "weight": self.weight}


@dataclass(frozen=True, eq=False)
class Rotation2D(NonexpansiveMap):
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def dim(self):
        return 2

    @property
    def _matrix(self):
        c, s = np.cos(self.angle), np.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def _apply(self, x):
        return x @ self._matrix.T

    @property
    def fix_set(self):
        if np.isclose(np.cos(self.angle), 1.0, rtol=0.0, atol=1e-15):
            return WholeSpace(2)
        return AffineSubspace(np.zeros(2))

    def to_dict(self):
        return {"type": "rotation2d", "angle": self.angle}


# -- Lipschitz maps f ----------------------------------------------------------


class LipschitzMap(_Mapping):
    """Base class for ``f``. Every variant is affine: ``f(x) = matrix @ x + shift``."""

    matrix: np.ndarray
    shift: np.ndarray

    @property
    def dim(self):
        return self.shift.shape[0]

    @property
    def alpha(self):
        return self._alpha

    def _apply(self, x):
        return x @ self.matrix.T + self.shift


class Zero(LipschitzMap):
    def __init__(self, n):
        self.n = int(n)
        self.matrix = _frozen(np.zeros((self.n, self.n)))
        self.shift = _frozen(np.zeros(self.n))
        self._alpha = 0.0

    def _apply(self, x):
        return np.zeros_like(x)

    def to_dict(self):
        return {"type": "zero", "dim": self.n}


class Constant(LipschitzMap):
    def __init__(self, u):
        self.u = _frozen(as_vector(u, name="u"))
        self.matrix = _frozen(np.zeros((self.u.size, self.u.size)))
        self.shift = self.u
        self._alpha = 0.0

    def _apply(self, x):
        return np.broadcast_to(self.u, np.shape(x)).copy()

    def to_dict(self):
        return {"type": "constant", "u": self.u.tolist()}


class Affine(LipschitzMap):
    """``f(x) = M x + b`` with ``alpha = ||M||_2``."""

    def __init__(self, M, b=None):
        M = _square(M, "M")
        b = np.zeros(M.shape[0]) if b is None else as_vector(b, M.shape[0], name="b")
        self.matrix = _frozen(M)
        self.shift = _frozen(b)
        self._alpha = spectral_norm(M)

    def to_dict(self):
        return {"type": "affine", "matrix": self.matrix.tolist(), "shift": self.shift.tolist()}


# -- strongly monotone maps F --------------------------------------------------


class StrongMonotoneMap(_Mapping):
    """Base class for ``F``; affine with certified ``eta`` and ``kappa``."""

    matrix: np.ndarray
    shift: np.ndarray

    @property
    def dim(self):
        return self.shift.shape[0]

    @property
    def eta(self):
        return self._eta

    @property
    def kappa(self):
        return self._kappa

    def _apply(self, x):
        return x @ self.matrix.T + self.shift

    def shifted(self, eps):
        """The map ``F + eps I``."""
        raise NotImplementedError


class ScaledIdentityShift(StrongMonotoneMap):
    """``F(x) = eta x + shift``."""

    def __init__(self, eta, shift=None, n=None):
        if not eta > 0:
            raise DomainError("eta must be positive")
        if shift is None:
            if n is None:
                raise DimensionError("give a shift vector or a dimension")
            shift = np.zeros(n)
        self.shift = _frozen(as_vector(shift, name="shift"))
        self.scale = float(eta)
        self.matrix = _frozen(self.scale * np.eye(self.shift.size))
        self._eta = self._kappa = self.scale

    def _apply(self, x):
        return self.scale * x + self.shift

    def shifted(self, eps):
        return ScaledIdentityShift(self.scale + eps, self.shift)

    def to_dict(self):
        return {"type": "scaled_identity", "eta": self.scale, "shift": self.shift.tolist()}


class IdentityOperator(ScaledIdentityShift):
    def __init__(self, n):
        super().__init__(1.0, n=n)

    def to_dict(self):
        return {"type": "identity", "dim": self.dim}


class AffineSPD(StrongMonotoneMap):
    """``F(x) = A x + c`` for symmetric positive-definite ``A``."""

    def __init__(self, A, c=None):
        A = _square(A, "A")
        scale = max(1.0, float(np.max(np.abs(A))))
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
            raise DomainError("A must be symmetric")
        A = 0.5 * (A + A.T)
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] <= 0:
            raise DomainError("A must be positive definite")
        c = np.zeros(A.shape[0]) if c is None else as_vector(c, A.shape[0], name="c")
        self.matrix = _frozen(A)
        self.shift = _frozen(c)
        self._eta = float(eigs[0])
        self._kappa = float(eigs[-1])

    def shifted(self, eps):
        return AffineSPD(self.matrix + eps * np.eye(self.dim), self.shift)

    def to_dict(self):
        return {"type": "affine_spd", "matrix": self.matrix.tolist(), "shift": self.shift.tolist()}


# -- problem instance ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Data of the variational inequality: find ``q`` in ``Fix(T)`` with
    ``<F(q) - f(q), x - q> >= 0`` for every ``x`` in ``Fix(T)``.

    ``limit_case`` marks instances with ``alpha == eta``, which are only
    solvable through the regularization path.
    """

    Q: ConvexSet
    T: NonexpansiveMap
    f: LipschitzMap
    F: StrongMonotoneMap
    limit_case: bool = False

    def __post_init__(self):
        dims = {self.Q.dim, self.T.dim, self.f.dim, self.F.dim}
        if len(dims) != 1:
            raise DimensionError(f"problem members disagree on dimension: {sorted(dims)}")
        slack = 1e-12 * max(1.0, self.eta)
        if self.limit_case:
            if self.alpha > self.eta + slack:
                raise DomainError("limit case requires alpha <= eta")
        elif not self.alpha < self.eta:
            raise DomainError(
                f"alpha={self.alpha:g} must be < eta={self.eta:g}; "
                "flag the instance as limit_case and use the regularization path"
            )

    @property
    def dim(self):
        return self.Q.dim

    @property
    def alpha(self):
        return self.f.alpha

    @property
    def eta(self):
        return self.F.eta

    @property
    def kappa(self):
        return self.F.kappa

    @property
    def C(self):
        """Feasible set of the inequality, ``Fix(T)`` restricted to ``Q``."""
        fix = self.T.fix_set
        if isinstance(self.Q, WholeSpace):
            return fix
        if isinstance(fix, WholeSpace):
            return self.Q
        return Intersection((fix, self.Q))

    def g(self, x):
        """``F(x) - f(x)``."""
        return self.F(x) - self.f(x)

    def regularized(self, eps):
        """The strictly monotone instance with ``F`` replaced by ``F + eps I``."""
        return ProblemInstance(self.Q, self.T, self.f, self.F.shifted(eps), limit_case=False)

    def check_invariance(self, rng=None, n_probe=64, tol=1e-8):
        """Raise :class:`DomainError` unless ``T`` maps probe points of Q into Q."""
        rng = np.random.default_rng(0) if rng is None else rng
        pts = sample_points(self.Q, rng, n_probe, scale=4.0)
        if not contains(self.Q, self.T(pts), tol):
            raise DomainError("T does not map Q into Q on probe points")

    def to_dict(self):
        return {
            "Q": self.Q.to_dict(),
            "T": self.T.to_dict(),
            "f": self.f.to_dict(),
            "F": self.F.to_dict(),
            "limit_case": self.limit_case,
        }

    def __eq__(self, other):
        return isinstance(other, ProblemInstance) and self.to_dict() == other.to_dict()


def residual_constants(p):
    """Exact (strong monotonicity, Lipschitz) constants of ``g = F - f``.

    Both maps are affine so ``g`` has matrix ``G = A - M``. The returned
    values are at least as good as ``eta - alpha`` and ``kappa + alpha``.
    """
    G = p.F.matrix - p.f.matrix
    return min_symmetric_eigenvalue(G), spectral_norm(G)


# -- functional helpers --------------------------------------------------------


def apply_T(T, x):
    return T(x)


def apply_f(f, x):
    return f(x)


def apply_F(F, x):
    return F(x)


def fix_residual(T, x):
    """``||x - T x||``; zero exactly on the fixed-point set."""
    x = as_points(x, T.dim)
    return norm(x - T._apply(x))


@dataclass
class ConstantReport:
    max_ratio_lipschitz: float
    min_ratio_monotone: float = None
    n_pairs: int = 0


def certify_constants(op, n_samples=1000, rng=None, sampler=None, scale=1.0):
    """Empirical cross-check of a map's certified constants.

    Parameters
    ----------
    op : NonexpansiveMap, LipschitzMap or StrongMonotoneMap
    n_samples : int
        Number of random pairs.
    rng : numpy.random.Generator, optional
        Used by the default Gaussian sampler.
    sampler : callable, optional
        ``sampler(n) -> (X, Y)`` returning two ``(n, d)`` arrays of points.
    scale : float
        Standard deviation of the default sampler.

    Returns
    -------
    ConstantReport
        Largest observed ``||op x - op y|| / ||x - y||`` and, for strongly
        monotone maps, the smallest ``<op x - op y, x - y> / ||x - y||^2``.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if sampler is None:
        rng = np.random.default_rng(0) if rng is None else rng
        X = scale * rng.standard_normal((n_samples, op.dim))
        Y = scale * rng.standard_normal((n_samples, op.dim))
    else:
        X, Y = sampler(n_samples)
    X, Y = as_points(X, op.dim), as_points(Y, op.dim)
    D = X - Y
    dn = norm(D)
    keep = dn > 0
    if not np.any(keep):
        raise DomainError("all sample pairs are degenerate")
    D, dn = D[keep], dn[keep]
    DF = op(X[keep]) - op(Y[keep])
    report = ConstantReport(float(np.max(norm(DF) / dn)), n_pairs=int(keep.sum()))
    if isinstance(op, StrongMonotoneMap):
        report.min_ratio_monotone = float(np.min(np.sum(DF * D, axis=-1) / dn**2))
    return report


# -- serialization -------------------------------------------------------------


def nonexpansive_from_dict(d):
    kind = d.get("type")
    if kind == "identity":
        return Identity(int(d["dim"]))
    if kind == "projection":
        return SetProjection(set_from_dict(d["set"]))
    if kind == "composition":
        return ProjectionComposition(tuple(set_from_dict(s) for s in d["sets"]))
    if kind == "averaged":
        return Averaged(nonexpansive_from_dict(d["base"]), d["weight"])
    if kind == "rotation2d":
        return Rotation2D(d["angle"])
    raise DomainError(f"unknown nonexpansive map type in {d!r}")


def lipschitz_from_dict(d):
    kind = d.get("type")
    if kind == "zero":
        return Zero(d["dim"])
    if kind == "constant":
        return Constant(d["u"])
    if kind == "affine":
        return Affine(d["matrix"], d.get("shift"))
    raise DomainError(f"unknown Lipschitz map type in {d!r}")


def monotone_from_dict(d):
    kind = d.get("type")
    if kind == "identity":
        return IdentityOperator(d["dim"])
    if kind == "affine_spd":
        return AffineSPD(d["matrix"], d.get("shift"))
    if kind == "scaled_identity":
        return ScaledIdentityShift(d["eta"], d["shift"])
    raise DomainError(f"unknown strongly monotone map type in {d!r}")


def problem_from_dict(d):
    return ProblemInstance(
        Q=set_from_dict(d["Q"]),
        T=nonexpansive_from_dict(d["T"]),
        f=lipschitz_from_dict(d["f"]),
        F=monotone_from_dict(d["F"]),
        limit_case=bool(d.get("limit_case", False)),
    )
