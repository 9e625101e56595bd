"""Closed convex sets of R^d with exact metric projections.

Every set knows how to project a single point or a stack of points with shape
``(m, d)``. Intersections are projected with Dykstra's cyclic algorithm; the
caller is responsible for the intersection being nonempty.
"""
import math
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, DimensionError, DomainError, as_points, as_vector, norm


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


class ConvexSet:
    """Base class. Subclasses implement ``dim``, ``_project`` and ``to_dict``."""

    @property
    def dim(self):
        raise NotImplementedError

    def _project(self, x):
        raise NotImplementedError

    def project(self, x):
        return self._project(as_points(x, self.dim))

    def to_dict(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = as_vector(self.lower, name="lower"), as_vector(self.upper, name="upper")
        if lo.shape != up.shape:
            raise DimensionError("box bounds have different dimensions")
        if np.any(lo > up):
            raise DomainError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(up))

    @property
    def dim(self):
        return self.lower.shape[0]

    def _project(self, x):
        return np.clip(x, self.lower, self.upper)

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(as_vector(self.center, name="center")))
        if not self.radius > 0 or not np.isfinite(self.radius):
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def _project(self, x):
        d = x - self.center
        if d.ndim == 1:
            r = math.sqrt(d @ d)
            return self.center + d * (self.radius / r) if r > self.radius else x.copy()
        r = norm(d)[..., None]
        scale = self.radius / np.maximum(r, self.radius)
        return self.center + d * scale

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """The set ``{x : <normal, x> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal, name="normal")
        if not np.any(n):
            raise DomainError("zero normal vector")
        object.__setattr__(self, "normal", _frozen(n))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.shape[0]

    def _project(self, x):
        if x.ndim == 1:
            excess = x @ self.normal - self.offset
            return x - (excess / (self.normal @ self.normal)) * self.normal if excess > 0 else x.copy()
        excess = np.maximum(x @ self.normal - self.offset, 0.0)
        return x - (excess / (self.normal @ self.normal))[..., None] * self.normal

    def to_dict(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Hyperplane(ConvexSet):
    """The set ``{x : <normal, x> = offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal, name="normal")
        if not np.any(n):
            raise DomainError("zero normal vector")
        object.__setattr__(self, "normal", _frozen(n))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.shape[0]

    def _project(self, x):
        gap = x @ self.normal - self.offset
        return x - (gap / (self.normal @ self.normal))[..., None] * self.normal

    def to_dict(self):
        return {"type": "hyperplane", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConvexSet):
    """``basepoint + span(basis)``; an empty basis gives the single point."""

    basepoint: np.ndarray
    basis: np.ndarray = None

    def __post_init__(self):
        p = as_vector(self.basepoint, name="basepoint")
        if self.basis is None or len(self.basis) == 0:
            B = np.zeros((0, p.shape[0]))
        else:
            B = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if B.shape[1] != p.shape[0]:
            raise DimensionError("basis vectors must match the basepoint dimension")
        if not np.allclose(B @ B.T, np.eye(B.shape[0]), rtol=0.0, atol=1e-10):
            raise DomainError("affine basis must be orthonormal")
        object.__setattr__(self, "basepoint", _frozen(p))
        object.__setattr__(self, "basis", _frozen(B))

    @property
    def dim(self):
        return self.basepoint.shape[0]

    def _project(self, x):
        d = x - self.basepoint
        return self.basepoint + (d @ self.basis.T) @ self.basis

    def to_dict(self):
        return {"type": "affine", "basepoint": self.basepoint.tolist(), "basis": self.basis.tolist()}


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("dimension must be a positive integer")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self):
        return self.n

    def _project(self, x):
        return np.array(x, dtype=float, copy=True)

    def to_dict(self):
        return {"type": "whole", "dim": self.n}


@dataclass(frozen=True, eq=False)
class Intersection(ConvexSet):
    """Intersection of convex sets, projected by Dykstra's algorithm.

    Nonemptiness is not checked. ``tol`` and ``max_iter`` are the defaults used
    by :meth:`project`.
    """

    members: tuple
    tol: float = 1e-12
    max_iter: int = 100_000

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DomainError("intersection needs at least one member")
        if len({m.dim for m in members}) != 1:
            raise DimensionError("intersection members have different dimensions")
        object.__setattr__(self, "members", members)

    @property
    def dim(self):
        return self.members[0].dim

    def _project(self, x):
        return dykstra_project(self, x, tol=self.tol, max_iter=self.max_iter)

    def to_dict(self):
        return {
            "type": "intersection",
            "members": [m.to_dict() for m in self.members],
            "tol": self.tol,
            "max_iter": self.max_iter,
        }


def project(S, x):
    """Nearest point of ``S`` to ``x`` (or to each row of a stack of points)."""
    return S.project(x)


def dykstra_project(S, x, tol=1e-12, max_iter=100_000):
    """Project onto an intersection with cyclic Dykstra iterations.

    Parameters
    ----------
    S : Intersection
        Members are visited in their stored order.
    x : array_like, shape (d,) or (m, d)
        Point(s) to project.
    tol : float
        Accuracy target. A cycle is accepted once the iterate and every
        correction term move by at most ``tol / 10`` and the iterate lies
        within ``tol`` of every member.
    max_iter : int
        Maximum number of full cycles.

    Returns
    -------
    y : ndarray
        Same shape as ``x``.

    Raises
    ------
    ConvergenceError
        If the budget is exhausted; the last iterate is attached.
    """
    if not isinstance(S, Intersection):
        S = Intersection((S,))
    if not tol > 0:
        raise DomainError("tol must be positive")
    x = as_points(x, S.dim)
    members = S.members
    y = np.array(x, dtype=float, copy=True)
    corr = [np.zeros_like(y) for _ in members]
    for k in range(int(max_iter)):
        y_prev = y
        corr_change = 0.0
        for i, m in enumerate(members):
            z = y + corr[i]
            y = m._project(z)
            new_corr = z - y
            corr_change = max(corr_change, float(np.max(norm(new_corr - corr[i]))))
            corr[i] = new_corr
        change = float(np.max(norm(y - y_prev)))
        if change <= tol / 10 and corr_change <= tol / 10:
            gap = max(float(np.max(norm(y - m._project(y)))) for m in members[:-1]) if len(members) > 1 else 0.0
            if gap <= tol:
                return y
    raise ConvergenceError(f"Dykstra did not converge in {max_iter} cycles", last_iterate=y, n_iter=max_iter)


def contains(S, x, tol=0.0):
    """True iff ``x`` lies within ``tol`` of ``S``.

    Intersections are tested member by member, so no inner iteration runs.
    """
    if tol < 0:
        raise DomainError("tol must be nonnegative")
    if isinstance(S, Intersection):
        return all(contains(m, x, tol) for m in S.members)
    x = as_points(x, S.dim)
    return bool(np.all(norm(x - S._project(x)) <= tol))


def sample_points(S, rng, n, scale=2.0):
    """``n`` points of ``S``: Gaussian draws around the origin, projected onto S."""
    raw = scale * rng.standard_normal((n, S.dim))
    return S.project(raw)


_BUILDERS = {
    "box": lambda d: Box(d["lower"], d["upper"]),
    "ball": lambda d: Ball(d["center"], d["radius"]),
    "halfspace": lambda d: Halfspace(d["normal"], d["offset"]),
    "hyperplane": lambda d: Hyperplane(d["normal"], d["offset"]),
    "affine": lambda d: AffineSubspace(d["basepoint"], d.get("basis") or None),
    "whole": lambda d: WholeSpace(d["dim"]),
    "intersection": lambda d: Intersection(
        tuple(set_from_dict(m) for m in d["members"]),
        tol=d.get("tol", 1e-12),
        max_iter=d.get("max_iter", 100_000),
    ),
}


def set_from_dict(d):
    """Build a set from its tagged-record description, e.g. ``{"type": "ball", ...}``."""
    try:
        builder = _BUILDERS[d["type"]]
    except KeyError:
        raise DomainError(f"unknown set type in {d!r}") from None
    return builder(d)
