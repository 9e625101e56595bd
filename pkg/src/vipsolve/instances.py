"""Ready-made problem instances with known or oracle-computable solutions."""
import numpy as np

from .operators import (
    Affine,
    AffineSPD,
    Averaged,
    Constant,
    Identity,
    IdentityOperator,
    ProblemInstance,
    ProjectionComposition,
    Rotation2D,
    SetProjection,
    Zero,
)
from .sets import Ball, Box, Halfspace, WholeSpace


def halpern_instance():
    """Halpern's setting: ``f = u = (2, 0)``, ``F = I``, ``T`` = projection onto the unit ball.

    The solution is ``P_C(u) = (1, 0)``.
    """
    return ProblemInstance(
        Q=WholeSpace(2),
        T=SetProjection(Ball(np.zeros(2), 1.0)),
        f=Constant([2.0, 0.0]),
        F=IdentityOperator(2),
    )


def box_instance():
    """``T = I`` on ``Q = [1, 2]^2`` with ``f = 0`` and ``F = I``; solution ``(1, 1)``."""
    return ProblemInstance(
        Q=Box([1.0, 1.0], [2.0, 2.0]),
        T=Identity(2),
        f=Zero(2),
        F=IdentityOperator(2),
    )


def quadratic_instance(dim=10, seed=0):
    """Strongly monotone affine ``F`` with spectrum in ``[3, 5]`` and ``f = 0.25 I x + b``.

    ``T`` projects onto the unit ball and the unconstrained zero of ``F - f``
    lies outside it, so the constraint is active at the solution.
    """
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.linspace(3.0, 5.0, dim)
    A = (U * eigs) @ U.T
    A = 0.5 * (A + A.T)
    c = 3.0 * rng.standard_normal(dim)
    b = rng.standard_normal(dim)
    return ProblemInstance(
        Q=WholeSpace(dim),
        T=SetProjection(Ball(np.zeros(dim), 1.0)),
        f=Affine(0.25 * np.eye(dim), b),
        F=AffineSPD(A, c),
    )


def rotation_instance():
    """Rotation by 60 degrees, whose only fixed point (and the solution) is the origin."""
    return ProblemInstance(
        Q=WholeSpace(2),
        T=Rotation2D(np.pi / 3),
        f=Constant([1.0, -0.5]),
        F=IdentityOperator(2),
    )


def composition_instance():
    """Two projections composed, with a skew Lipschitz ``f``; ``Fix(T)`` is ball ∩ halfspace."""
    ball = Ball(np.zeros(3), 1.5)
    half = Halfspace([1.0, 1.0, 0.0], 0.5)
    A = np.diag([2.0, 3.0, 2.5])
    M = 0.5 * np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    return ProblemInstance(
        Q=WholeSpace(3),
        T=ProjectionComposition((ball, half)),
        f=Affine(M, [4.0, 3.0, -1.0]),
        F=AffineSPD(A, [0.0, 0.0, 0.5]),
    )


def averaged_instance():
    """Averaged box projection on a larger box ``Q``; ``Fix(T) = [0, 1]^2``."""
    return ProblemInstance(
        Q=Box([-3.0, -3.0], [3.0, 3.0]),
        T=Averaged(SetProjection(Box([0.0, 0.0], [1.0, 1.0])), 0.5),
        f=Constant([3.0, -2.0]),
        F=AffineSPD(np.array([[2.0, 0.5], [0.5, 1.0]])),
    )


def shifted_limit_instance():
    """``F = I``, ``f(x) = x + (1, 0)`` over ``Fix(T) = [0, 1]^2``: ``alpha == eta == 1``.

    The solution set is ``{1} x [0, 1]`` and its least-norm element is ``(1, 0)``.
    """
    return ProblemInstance(
        Q=WholeSpace(2),
        T=SetProjection(Box([0.0, 0.0], [1.0, 1.0])),
        f=Affine(np.eye(2), [1.0, 0.0]),
        F=IdentityOperator(2),
        limit_case=True,
    )


def unshifted_limit_instance():
    """``F = f = I`` over ``[0, 1]^2``: every point solves, the least-norm one is the origin."""
    return ProblemInstance(
        Q=WholeSpace(2),
        T=SetProjection(Box([0.0, 0.0], [1.0, 1.0])),
        f=Affine(np.eye(2)),
        F=IdentityOperator(2),
        limit_case=True,
    )


SHIPPED = {
    "halpern": halpern_instance,
    "box": box_instance,
    "quadratic": quadratic_instance,
    "rotation": rotation_instance,
    "composition": composition_instance,
    "averaged": averaged_instance,
}

LIMIT_CASES = {
    "shifted_limit": shifted_limit_instance,
    "unshifted_limit": unshifted_limit_instance,
}
