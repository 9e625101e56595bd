import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vipsolve.core import ConvergenceError, DimensionError, DomainError, norm
from vipsolve.sets import (
    AffineSubspace,
    Ball,
    Box,
    Halfspace,
    Hyperplane,
    Intersection,
    WholeSpace,
    contains,
    dykstra_project,
    project,
    sample_points,
    set_from_dict,
)

# Frozen by dense grid refinement over [0,1]^2 ∩ Ball(0,1); see _grid_nearest.
BOX_BALL_NEAREST = np.array([0.7071067811865476, 0.7071067811865476])


def _grid_nearest(inside, x, lo, hi, levels=8, n=201):
    """Brute-force nearest point of ``{z : inside(z)}`` to ``x`` by grid refinement."""
    lo, hi = np.array(lo, float), np.array(hi, float)
    best = None
    for _ in range(levels):
        g = np.stack(np.meshgrid(*[np.linspace(a, b, n) for a, b in zip(lo, hi)]), -1).reshape(-1, len(lo))
        g = g[inside(g)]
        best = g[np.argmin(norm(g - x))]
        half = (hi - lo) / 20
        lo, hi = best - half, best + half
    return best


def test_box_ball_grid_oracle_matches_frozen_value():
    inside = lambda z: np.all((z >= 0) & (z <= 2), axis=-1) & (norm(z) <= 1.0)
    best = _grid_nearest(inside, np.array([2.0, 2.0]), [0, 0], [2, 2])
    np.testing.assert_allclose(best, BOX_BALL_NEAREST, atol=1e-6)


@pytest.mark.parametrize(
    "S, x, expected",
    [
        (Box([0, 0], [1, 1]), (3, -1), (1, 0)),
        (Ball([0, 0], 1), (2, 0), (1, 0)),
        (Halfspace([1, 0], 0), (2, 3), (0, 3)),
        (Hyperplane([1, 1], 1), (1, 1), (0.5, 0.5)),
        (AffineSubspace([0, 0, 1], [[1, 0, 0]]), (2, 3, 4), (2, 0, 1)),
        (WholeSpace(2), (5, -7), (5, -7)),
    ],
)
def test_project_examples(S, x, expected):
    np.testing.assert_allclose(project(S, x), expected, atol=1e-15)


def test_dykstra_examples():
    strip = Intersection((Halfspace([1, 0], 1), Halfspace([-1, 0], -1)))
    np.testing.assert_allclose(dykstra_project(strip, [5, 2], tol=1e-12), [1, 2], atol=1e-12)
    box_ball = Intersection((Box([0, 0], [2, 2]), Ball([0, 0], 1)))
    np.testing.assert_allclose(dykstra_project(box_ball, [2, 2], tol=1e-12), BOX_BALL_NEAREST, atol=2e-12)
    whole = Intersection((WholeSpace(3),))
    np.testing.assert_array_equal(dykstra_project(whole, [1, 2, 3]), [1, 2, 3])


def test_dykstra_budget_error_carries_iterate():
    S = Intersection((Ball([0, 0], 1), Halfspace([-1, -1], -1.2)))
    with pytest.raises(ConvergenceError) as info:
        dykstra_project(S, [3.0, -4.0], tol=1e-14, max_iter=2)
    assert info.value.last_iterate.shape == (2,)


def test_dykstra_batched_matches_single(rng):
    S = Intersection((Box([0, 0, 0], [1, 1, 1]), Ball([0.5, 0.5, 0.5], 0.6), Halfspace([1, 1, 1], 1.5)))
    X = 3 * rng.standard_normal((20, 3))
    Y = dykstra_project(S, X, tol=1e-11)
    for x, y in zip(X, Y):
        np.testing.assert_allclose(dykstra_project(S, x, tol=1e-11), y, atol=2e-11)


def test_contains_examples():
    assert contains(Box([0, 0], [1, 1]), [0.5, 0.5], 0.0)
    assert not contains(Ball([0, 0], 1), [1 + 1e-6, 0], 1e-9)
    assert contains(Hyperplane([1, 1], 1), [0.5, 0.5], 1e-12)
    with pytest.raises(DimensionError):
        contains(Ball([0, 0], 1), [0, 0, 0])
    with pytest.raises(DomainError):
        contains(Ball([0, 0], 1), [0, 0], -1.0)


def test_invalid_sets_rejected():
    with pytest.raises(DomainError):
        Box([1, 0], [0, 1])
    with pytest.raises(DomainError):
        Halfspace([0, 0], 1)
    with pytest.raises(DomainError):
        Ball([0, 0], 0.0)
    with pytest.raises(DomainError):
        AffineSubspace([0, 0], [[1, 1]])
    with pytest.raises(DimensionError):
        Intersection((Ball([0, 0], 1), Ball([0, 0, 0], 1)))
    with pytest.raises(DimensionError):
        project(Box([0, 0], [1, 1]), [1, 2, 3])


ALL_SETS = [
    Box([-1, 0, 0.5], [1, 2, 0.5]),
    Ball([1, -1, 0], 2.0),
    Halfspace([1, 2, -1], 0.3),
    Hyperplane([0, 1, 1], -1.0),
    AffineSubspace([1, 1, 1], [[0.6, 0.8, 0], [0, 0, 1]]),
    AffineSubspace([1, 2, 3]),
    WholeSpace(3),
    Intersection((Ball([0, 0, 0], 1.5), Halfspace([1, 1, 0], 0.5)), tol=1e-13),
]


@pytest.mark.parametrize("S", ALL_SETS, ids=lambda s: type(s).__name__)
def test_dict_round_trip(S):
    T = set_from_dict(S.to_dict())
    assert T == S
    assert hash(T) == hash(S)


def test_single_member_intersection_matches_exact(rng):
    X = 4 * rng.standard_normal((200, 3))
    for S in ALL_SETS[:-1]:
        tol = 1e-11
        Y = dykstra_project(Intersection((S,)), X, tol=tol)
        assert np.max(norm(Y - project(S, X))) <= 2 * tol


points3 = arrays(np.float64, 3, elements=st.floats(-50, 50))


@pytest.mark.parametrize("S", ALL_SETS, ids=lambda s: type(s).__name__)
@settings(max_examples=60, deadline=None)
@given(x=points3, y=points3)
def test_projection_properties_hypothesis(S, x, y):
    px, py = project(S, x), project(S, y)
    np.testing.assert_allclose(project(S, px), px, atol=1e-10 * (1 + norm(px)))
    assert norm(px - py) <= norm(x - y) * (1 + 1e-12) + 1e-10
    z = sample_points(S, np.random.default_rng(0), 8)
    assert np.all(np.sum((x - px) * (z - px), axis=-1) <= 1e-9 * (1 + norm(x - px)))
