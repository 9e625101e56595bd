import numpy as np
import pytest

from vipsolve.core import DimensionError, DomainError
from vipsolve.instances import LIMIT_CASES, SHIPPED, quadratic_instance
from vipsolve.operators import (
    Affine,
    AffineSPD,
    Averaged,
    Constant,
    Identity,
    IdentityOperator,
    ProblemInstance,
    ProjectionComposition,
    Rotation2D,
    ScaledIdentityShift,
    SetProjection,
    Zero,
    apply_F,
    apply_f,
    apply_T,
    certify_constants,
    fix_residual,
    min_symmetric_eigenvalue,
    problem_from_dict,
    residual_constants,
    spectral_norm,
)
from vipsolve.sets import Ball, Box, Halfspace, WholeSpace, contains, sample_points


def test_apply_T_examples():
    np.testing.assert_array_equal(apply_T(Identity(2), [1, 2]), [1, 2])
    np.testing.assert_array_equal(apply_T(SetProjection(Ball([0, 0], 1)), [2, 0]), [1, 0])
    np.testing.assert_allclose(apply_T(Rotation2D(np.pi / 2), [1, 0]), [0, 1], atol=1e-15)


def test_apply_f_F_examples():
    np.testing.assert_array_equal(apply_f(Constant([1, 1]), [7, -3]), [1, 1])
    np.testing.assert_array_equal(apply_f(Affine(0.5 * np.eye(2)), [2, 2]), [1, 1])
    F = AffineSPD(np.diag([1.0, 2.0]))
    np.testing.assert_array_equal(apply_F(F, [1, 1]), [1, 2])
    assert F.eta == pytest.approx(1.0) and F.kappa == pytest.approx(2.0)
    assert Constant([1, 1]).alpha == 0.0
    assert Affine(0.5 * np.eye(2)).alpha == pytest.approx(0.5)


def test_fix_residual_examples():
    assert fix_residual(Identity(2), [3.0, -1.0]) == 0.0
    assert fix_residual(SetProjection(Ball([0, 0], 1)), [2, 0]) == pytest.approx(1.0)
    assert fix_residual(Rotation2D(np.pi), [1, 0]) == pytest.approx(2.0)


def test_dimension_checks():
    with pytest.raises(DimensionError):
        apply_T(Identity(2), [1, 2, 3])
    with pytest.raises(DimensionError):
        ProblemInstance(WholeSpace(3), Identity(2), Zero(2), IdentityOperator(2))


def test_spectral_helpers_on_hard_seed_matrix():
    # the all-ones vector is in the kernel, so a naive power iteration from it returns 0
    M = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert spectral_norm(M) == pytest.approx(2.0)
    assert min_symmetric_eigenvalue(M) == pytest.approx(0.0, abs=1e-15)


def test_certify_constants_examples(rng):
    assert certify_constants(Zero(3), rng=rng).max_ratio_lipschitz == 0.0
    rep = certify_constants(IdentityOperator(2), rng=rng)
    assert rep.max_ratio_lipschitz == pytest.approx(1.0)
    assert rep.min_ratio_monotone == pytest.approx(1.0)
    rep = certify_constants(AffineSPD(np.diag([1.0, 4.0])), n_samples=10_000, rng=rng)
    assert 3.5 <= rep.max_ratio_lipschitz <= 4.0 + 1e-9
    assert rep.min_ratio_monotone >= 1.0 - 1e-9


def test_certify_constants_degenerate_pairs():
    same = lambda n: (np.ones((n, 2)), np.ones((n, 2)))
    with pytest.raises(DomainError):
        certify_constants(IdentityOperator(2), n_samples=5, sampler=same)
    with pytest.raises(DomainError):
        certify_constants(IdentityOperator(2), n_samples=0)


def _all_maps():
    p = quadratic_instance()
    rng = np.random.default_rng(3)
    M = rng.standard_normal((4, 4))
    return [
        (Identity(3), None, None),
        (SetProjection(Ball([0, 0, 0], 1.0)), None, None),
        (ProjectionComposition((Ball([0, 0, 0], 1.5), Halfspace([1, 1, 0], 0.5))), None, None),
        (Averaged(SetProjection(Box([0, 0], [1, 1])), 0.3), None, None),
        (Rotation2D(1.1), None, None),
        (Affine(M, [1, 2, 3, 4]), spectral_norm(M), None),
        (p.F, p.F.kappa, p.F.eta),
        (ScaledIdentityShift(2.5, [1.0, -1.0]), 2.5, 2.5),
    ]


@pytest.mark.parametrize("op, lip, eta", _all_maps(), ids=lambda v: type(v).__name__)
def test_certified_constants_hold_on_samples(op, lip, eta, rng):
    rep = certify_constants(op, n_samples=2000, rng=rng, scale=3.0)
    bound = 1.0 if lip is None else lip
    assert rep.max_ratio_lipschitz <= bound * (1 + 1e-12) + 1e-12
    if eta is not None:
        assert rep.min_ratio_monotone >= eta - 1e-10
        assert eta <= lip


def test_composition_fix_residual_vanishes_on_intersection(rng):
    ball, half = Ball([0, 0, 0], 1.5), Halfspace([1, 1, 0], 0.5)
    T = ProjectionComposition((ball, half))
    C = T.fix_set
    pts = sample_points(C, rng, 500)
    assert np.all(contains(ball, p, 1e-10) and contains(half, p, 1e-10) for p in pts)
    assert np.max(fix_residual(T, pts)) <= 1e-10
    outside = np.array([[3.0, 3.0, 0.0], [0.0, 0.0, 2.0]])
    assert np.all(fix_residual(T, outside) > 0.1)


@pytest.mark.parametrize("name", sorted(SHIPPED), ids=str)
def test_g_is_strongly_monotone(name, rng):
    p = SHIPPED[name]()
    X = 3 * rng.standard_normal((2000, p.dim))
    Y = 3 * rng.standard_normal((2000, p.dim))
    D = X - Y
    lhs = np.sum((p.g(X) - p.g(Y)) * D, axis=-1)
    assert np.all(lhs >= (p.eta - p.alpha - 1e-9) * np.sum(D * D, axis=-1))
    m_g, L_g = residual_constants(p)
    assert m_g >= p.eta - p.alpha - 1e-12
    assert L_g <= p.kappa + p.alpha + 1e-12


@pytest.mark.parametrize("name", sorted(SHIPPED) + sorted(LIMIT_CASES), ids=str)
def test_shipped_instances_round_trip_and_invariance(name):
    p = {**SHIPPED, **LIMIT_CASES}[name]()
    assert problem_from_dict(p.to_dict()) == p
    p.check_invariance(np.random.default_rng(1))


def test_problem_constant_regimes():
    T = SetProjection(Box([0, 0], [1, 1]))
    with pytest.raises(DomainError):
        ProblemInstance(WholeSpace(2), T, Affine(np.eye(2)), IdentityOperator(2))
    p = ProblemInstance(WholeSpace(2), T, Affine(np.eye(2)), IdentityOperator(2), limit_case=True)
    r = p.regularized(0.1)
    assert not r.limit_case
    assert r.eta == pytest.approx(1.1) and r.kappa == pytest.approx(1.1)
    with pytest.raises(DomainError):
        ProblemInstance(WholeSpace(2), T, Affine(2 * np.eye(2)), IdentityOperator(2), limit_case=True)


def test_invariance_violation_detected():
    p = ProblemInstance(Box([0, 0], [1, 1]), Rotation2D(np.pi / 2), Zero(2), IdentityOperator(2))
    with pytest.raises(DomainError):
        p.check_invariance()


def test_fixed_sets():
    assert Rotation2D(0.7).fix_set.to_dict()["type"] == "affine"
    assert Rotation2D(0.0).fix_set == WholeSpace(2)
    assert Averaged(SetProjection(Ball([0, 0], 2.0)), 0.5).fix_set == Ball([0, 0], 2.0)
    with pytest.raises(DomainError):
        Averaged(Identity(2), 1.0)
    with pytest.raises(DomainError):
        AffineSPD(np.array([[1.0, 2.0], [0.0, 1.0]]))
