import numpy as np
import pytest

from vipsolve.core import DomainError
from vipsolve.schedules import (
    ConstantStep,
    Custom,
    CustomError,
    FixedDirection,
    Geometric,
    PowerDecay,
    PowerLaw,
    RandomDirection,
    RelativelySmall,
    Summable,
    Verdict,
    ZeroError,
    alpha_at,
    alpha_from_dict,
    beta_at,
    beta_from_dict,
    check_conditions,
    error_at,
    error_from_dict,
    partial_sums,
)

H, F, U = Verdict.HOLDS, Verdict.FAILS, Verdict.UNDECIDABLE


def test_term_examples():
    assert alpha_at(PowerLaw(1, 1), 0) == 1.0
    assert alpha_at(PowerLaw(1, 1), 9) == pytest.approx(0.1)
    assert all(beta_at(ConstantStep(0.5), n) == 0.5 for n in (0, 7, 10**6))
    assert np.linalg.norm(error_at(RelativelySmall(1.0), 0, 1.0, 3)) == pytest.approx(1.0, rel=1e-14)
    assert alpha_at(Geometric(1, 0.5), 3) == 0.125
    assert beta_at(PowerDecay(0.5, 1.0), 4) == pytest.approx(0.1)
    with pytest.raises(DomainError):
        alpha_at(PowerLaw(1, 1), -1)


def test_condition_examples():
    r = check_conditions(PowerLaw(1, 1), ConstantStep(0.5), ZeroError())
    assert (r.c1, r.c2, r.h1) == (H, H, H)
    assert r.overall_theorem2_applicable
    r = check_conditions(Geometric(1, 0.5), ConstantStep(0.5), ZeroError())
    assert (r.c1, r.c2) == (H, F)
    assert not r.overall_theorem2_applicable
    r = check_conditions(PowerLaw(1, 1), ConstantStep(0.0), Summable(1.0, 0.5))
    assert r.h1 is F and r.h2 is H
    assert r.overall_theorem2_applicable


def test_constant_and_custom_verdicts():
    r = check_conditions(ConstantStep(0.3), ConstantStep(0.5), ZeroError())
    assert r.c1 is F and not r.overall_theorem2_applicable
    r = check_conditions(Custom((0.5, 0.25)), Custom((0.5,)), CustomError(((1.0, 0.0),)))
    assert (r.c1, r.c2, r.c5, r.h1, r.h2) == (U, U, U, U, U)
    assert r.e_summable is U
    assert not r.overall_theorem2_applicable
    r = check_conditions(PowerLaw(1, 0.5), PowerDecay(0.5, 1.0), RelativelySmall(1.0))
    assert r.h1 is F and r.h2 is H and r.overall_theorem2_applicable
    r = check_conditions(PowerLaw(1, 2.0), ConstantStep(0.5), ZeroError())
    assert r.c2 is F


def test_h2_ratio_form_agrees_on_shipped_families():
    for a in (PowerLaw(1, 1), PowerLaw(2, 0.5), Geometric(1, 0.5), ConstantStep(0.1)):
        for b in (ConstantStep(0.0), ConstantStep(0.5), PowerDecay(0.5, 2.0)):
            assert check_conditions(a, b, ZeroError()) == check_conditions(a, b, ZeroError(), h2_ratio_form=True)


def test_verdicts_match_partial_sum_probes():
    horizon = 10**6
    harmonic = partial_sums(PowerLaw(1, 1), horizon)
    geometric = partial_sums(Geometric(1, 0.5), horizon)
    # divergence probe: the harmonic sum keeps growing, the geometric one has plateaued
    assert harmonic[-1] > 14 and harmonic[-1] - harmonic[horizon // 10] > 2.0
    assert geometric[-1] == pytest.approx(2.0) and geometric[-1] - geometric[60] < 1e-15
    assert check_conditions(PowerLaw(1, 1), ConstantStep(0.5), ZeroError()).c2 is H
    assert check_conditions(Geometric(1, 0.5), ConstantStep(0.5), ZeroError()).c2 is F
    # telescoping bound for the step differences of the harmonic schedule
    n = np.arange(horizon, dtype=float)
    assert np.sum(np.abs(np.diff(1.0 / (n + 1)))) <= 1.0
    # C5 ratio probe: (a_{n+1} - a_n) / a_n -> 0 for power laws, stays at rho - 1 for geometric
    a = PowerLaw(1, 1)
    assert abs((a(horizon) - a(horizon - 1)) / a(horizon - 1)) < 1e-5
    g = Geometric(1, 0.5)
    assert (g(40) - g(39)) / g(39) == pytest.approx(-0.5)
    # relatively small perturbations of a harmonic step are summable: sum 1/(n+1)^2 < pi^2/6
    e = RelativelySmall(1.0)
    s = sum(e.norm_at(k, a(k)) for k in range(10**5))
    assert s < np.pi**2 / 6


@pytest.mark.parametrize(
    "err, law",
    [
        (Summable(2.0, 0.7, RandomDirection(5)), lambda n, a: 2.0 * 0.7**n),
        (Summable(1.0, 0.5, FixedDirection((3.0, 4.0, 0.0))), lambda n, a: 0.5**n),
        (RelativelySmall(0.3, RandomDirection(9)), lambda n, a: 0.3 * a / (n + 1)),
    ],
)
def test_error_norm_law(err, law):
    alpha = PowerLaw(1, 0.7)
    for n in list(range(200)) + [1023, 1024, 5000]:
        a = alpha(n)
        if law(n, a) < 1e-150:
            continue  # squared norm would underflow; the law is met up to subnormal rounding only
        e = error_at(err, n, a, 3)
        assert abs(np.linalg.norm(e) - law(n, a)) <= 1e-14 * law(n, a)


def test_random_direction_is_deterministic_and_unit():
    d = RandomDirection(11)
    u = [d.unit(n, 4) for n in range(3000)]
    assert all(abs(np.linalg.norm(v) - 1) < 1e-15 for v in u)
    np.testing.assert_array_equal(u[2047], RandomDirection(11).unit(2047, 4))
    assert not np.allclose(u[0], RandomDirection(12).unit(0, 4))


def test_schedule_validation():
    with pytest.raises(DomainError):
        PowerLaw(0.0, 1.0)
    with pytest.raises(DomainError):
        Geometric(1.0, 1.0)
    with pytest.raises(DomainError):
        Summable(1.0, 1.0)
    with pytest.raises(DomainError):
        FixedDirection((0.0, 0.0))


@pytest.mark.parametrize(
    "s",
    [PowerLaw(2.0, 0.5), Geometric(1.0, 0.9), ConstantStep(0.25), Custom((0.5, 0.25), PowerLaw(1.0, 1.0))],
)
def test_alpha_round_trip(s):
    assert alpha_from_dict(s.to_dict()) == s


def test_beta_and_error_round_trip():
    for b in (ConstantStep(0.5), PowerDecay(0.3, 2.0)):
        assert beta_from_dict(b.to_dict()) == b
    for e in (ZeroError(), Summable(1.0, 0.5, RandomDirection(3)), RelativelySmall(2.0, FixedDirection((1.0, 0.0)))):
        assert error_from_dict(e.to_dict()) == e
    assert error_from_dict({"type": "summable"}, seed=42).direction == RandomDirection(42)
