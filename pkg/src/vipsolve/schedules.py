"""Step-size, averaging and perturbation sequences, plus the condition checker.

Each family has closed-form asymptotics, so :func:`check_conditions` decides
the convergence hypotheses from a rule table instead of from samples. Custom
(tabulated) sequences are always reported as undecidable.
"""
import enum
import functools
from dataclasses import asdict, dataclass

import numpy as np

from .core import DomainError, as_vector


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDECIDABLE = "undecidable"

    @classmethod
    def of(cls, flag):
        return cls.HOLDS if flag else cls.FAILS


def _all(*verdicts):
    if any(v is Verdict.FAILS for v in verdicts):
        return Verdict.FAILS
    if any(v is Verdict.UNDECIDABLE for v in verdicts):
        return Verdict.UNDECIDABLE
    return Verdict.HOLDS


def _any(*verdicts):
    if any(v is Verdict.HOLDS for v in verdicts):
        return Verdict.HOLDS
    if any(v is Verdict.UNDECIDABLE for v in verdicts):
        return Verdict.UNDECIDABLE
    return Verdict.FAILS


class _Schedule:
    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


# -- alpha ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PowerLaw(_Schedule):
    """``a / (n + 1) ** theta``."""

    a: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.theta > 0):
            raise DomainError("power law needs a > 0 and theta > 0")

    def __call__(self, n):
        return self.a / (n + 1) ** self.theta

    def to_dict(self):
        return {"type": "power", "a": self.a, "theta": self.theta}


@dataclass(frozen=True, eq=False)
class Geometric(_Schedule):
    """``a * rho ** n``."""

    a: float = 1.0
    rho: float = 0.5

    def __post_init__(self):
        if not (self.a > 0 and 0 < self.rho < 1):
            raise DomainError("geometric schedule needs a > 0 and 0 < rho < 1")

    def __call__(self, n):
        return self.a * self.rho**n

    def to_dict(self):
        return {"type": "geometric", "a": self.a, "rho": self.rho}


@dataclass(frozen=True, eq=False)
class ConstantStep(_Schedule):
    a: float = 0.5

    def __post_init__(self):
        if not 0 <= self.a <= 1:
            raise DomainError("constant value must lie in [0, 1]")

    def __call__(self, n):
        return self.a

    def to_dict(self):
        return {"type": "constant", "a": self.a}


@dataclass(frozen=True, eq=False)
class PowerDecay(_Schedule):
    """``b / (n + 1) ** gamma``, meant for the averaging weights."""

    b: float = 0.5
    gamma: float = 1.0

    def __post_init__(self):
        if not (0 <= self.b <= 1 and self.gamma > 0):
            raise DomainError("power decay needs 0 <= b <= 1 and gamma > 0")

    def __call__(self, n):
        return self.b / (n + 1) ** self.gamma

    def to_dict(self):
        return {"type": "power_decay", "b": self.b, "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class Custom(_Schedule):
    """A finite table of values followed by ``tail`` (or the last value repeated)."""

    values: tuple
    tail: object = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals and self.tail is None:
            raise DomainError("custom schedule needs values or a tail")
        object.__setattr__(self, "values", vals)

    def __call__(self, n):
        if n < len(self.values):
            return self.values[n]
        if self.tail is None:
            return self.values[-1]
        return self.tail(n)

    def to_dict(self):
        d = {"type": "custom", "values": list(self.values)}
        if self.tail is not None:
            d["tail"] = self.tail.to_dict()
        return d


def alpha_at(s, n):
    if n < 0:
        raise DomainError("n must be >= 0")
    return float(s(n))


def beta_at(s, n):
    if n < 0:
        raise DomainError("n must be >= 0")
    return float(s(n))


# -- perturbations -------------------------------------------------------------

_BLOCK = 1024


@functools.lru_cache(maxsize=64)
def _direction_block(seed, dim, block):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    v = rng.standard_normal((_BLOCK, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class FixedDirection(_Schedule):
    vector: tuple

    def __post_init__(self):
        v = as_vector(self.vector, name="direction")
        if not np.any(v):
            raise DomainError("direction must be nonzero")
        object.__setattr__(self, "vector", tuple(v.tolist()))

    def unit(self, n, dim):
        v = np.asarray(self.vector)
        if v.size != dim:
            raise DomainError(f"direction has dimension {v.size}, expected {dim}")
        return v / np.linalg.norm(v)

    def to_dict(self):
        return {"type": "fixed", "vector": list(self.vector)}


@dataclass(frozen=True, eq=False)
class RandomDirection(_Schedule):
    """Unit vectors from PCG64 seeded by ``(seed, n // 1024)``.

    Any term can be regenerated on its own, so runs are reproducible bit for bit.
    """

    seed: int = 0

    def unit(self, n, dim):
        return _direction_block(int(self.seed), int(dim), n // _BLOCK)[n % _BLOCK]

    def to_dict(self):
        return {"type": "random", "seed": int(self.seed)}


@dataclass(frozen=True, eq=False)
class ZeroError(_Schedule):
    def norm_at(self, n, alpha_n):
        return 0.0

    def __call__(self, n, alpha_n, dim):
        return np.zeros(dim)

    def to_dict(self):
        return {"type": "zero"}


class _DirectedError(_Schedule):
    def __call__(self, n, alpha_n, dim):
        size = self.norm_at(n, alpha_n)
        if size == 0.0:
            return np.zeros(dim)
        return size * self.direction.unit(n, dim)


@dataclass(frozen=True, eq=False)
class Summable(_DirectedError):
    """``||e_n|| = c * rho ** n``."""

    c: float = 1.0
    rho: float = 0.5
    direction: object = RandomDirection(0)

    def __post_init__(self):
        if not (self.c >= 0 and 0 <= self.rho < 1):
            raise DomainError("summable errors need c >= 0 and 0 <= rho < 1")

    def norm_at(self, n, alpha_n):
        return self.c * self.rho**n

    def to_dict(self):
        return {"type": "summable", "c": self.c, "rho": self.rho, "direction": self.direction.to_dict()}


@dataclass(frozen=True, eq=False)
class RelativelySmall(_DirectedError):
    """``||e_n|| = c * alpha_n / (n + 1)``."""

    c: float = 1.0
    direction: object = RandomDirection(0)

    def __post_init__(self):
        if not self.c >= 0:
            raise DomainError("c must be >= 0")

    def norm_at(self, n, alpha_n):
        return self.c * alpha_n / (n + 1)

    def to_dict(self):
        return {"type": "relative", "c": self.c, "direction": self.direction.to_dict()}


@dataclass(frozen=True, eq=False)
class CustomError(_Schedule):
    """Tabulated perturbation vectors, zero afterwards."""

    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(tuple(float(c) for c in v) for v in self.vectors))

    def norm_at(self, n, alpha_n):
        return float(np.linalg.norm(self.vectors[n])) if n < len(self.vectors) else 0.0

    def __call__(self, n, alpha_n, dim):
        if n < len(self.vectors):
            return as_vector(self.vectors[n], dim, name="e_n")
        return np.zeros(dim)

    def to_dict(self):
        return {"type": "custom", "vectors": [list(v) for v in self.vectors]}


def error_at(s, n, alpha_n, dim):
    """The perturbation vector ``e_n``; ``alpha_n`` is the step actually used."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return s(n, alpha_n, dim)


# -- condition checking --------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    c1: Verdict
    c2: Verdict
    c5: Verdict
    h1: Verdict
    h2: Verdict
    e_summable: Verdict
    e_relatively_small: Verdict
    overall_theorem2_applicable: bool

    def to_dict(self):
        return {k: (v.value if isinstance(v, Verdict) else v) for k, v in asdict(self).items()}


def _alpha_rules(a, h2_ratio_form=False):
    """Return (c1, c2, c5, alpha clause of h2) for an alpha schedule.

    ``h2_ratio_form`` tests ``alpha_{n+1} / alpha_n -> 1`` instead of
    ``(alpha_{n+1} - alpha_n) / alpha_n -> 0``; for these families the two
    limits coincide, so the flag only changes which rule is consulted.
    """
    H, F, U = Verdict.HOLDS, Verdict.FAILS, Verdict.UNDECIDABLE
    if isinstance(a, PowerLaw):
        # ratio ((n+1)/(n+2))^theta -> 1; monotone, so sum |diff| = a
        c1, c2 = H, Verdict.of(a.theta <= 1)
        ratio_clause, summable_diff = H, H
    elif isinstance(a, Geometric):
        # ratio is rho != 1; sum |diff| telescopes to a
        c1, c2 = H, F
        ratio_clause, summable_diff = F, H
    elif isinstance(a, ConstantStep):
        c1, c2 = Verdict.of(a.a == 0), Verdict.of(a.a > 0)
        ratio_clause, summable_diff = H, H
    else:
        return U, U, U, U
    c5 = _any(ratio_clause, summable_diff)
    alpha_clause = _any(ratio_clause, summable_diff)
    return c1, c2, c5, alpha_clause


def _beta_rules(b):
    """Return (h1, limsup < 1, beta-difference clause of h2)."""
    H, F, U = Verdict.HOLDS, Verdict.FAILS, Verdict.UNDECIDABLE
    if isinstance(b, ConstantStep):
        return Verdict.of(0 < b.a < 1), Verdict.of(b.a < 1), H
    if isinstance(b, PowerDecay):
        # beta_n -> 0 so liminf is 0; monotone, so sum |diff| = b
        return F, H, H
    return U, U, U


def _error_rules(e, a):
    """Return (summable, relatively small) for the perturbation norms."""
    H, F, U = Verdict.HOLDS, Verdict.FAILS, Verdict.UNDECIDABLE
    if isinstance(e, ZeroError):
        return H, H
    if isinstance(e, Summable):
        if e.c == 0:
            return H, H
        if isinstance(a, PowerLaw) or (isinstance(a, ConstantStep) and a.a > 0):
            rel = H
        elif isinstance(a, Geometric):
            rel = Verdict.of(e.rho < a.rho)
        else:
            rel = U
        return H, rel
    if isinstance(e, RelativelySmall):
        if e.c == 0:
            return H, H
        if isinstance(a, (PowerLaw, Geometric)):
            # sum alpha_n / (n + 1) <= sum a / (n + 1)^(1 + theta) or a geometric sum
            return H, H
        if isinstance(a, ConstantStep):
            return Verdict.of(a.a == 0), H
        return U, H
    return U, U


def check_conditions(alpha, beta, error, h2_ratio_form=False):
    """Decide the convergence hypotheses for a schedule triple.

    Parameters
    ----------
    alpha, beta, error : schedules
    h2_ratio_form : bool
        Consult the ``alpha_{n+1}/alpha_n -> 1`` reading of the step-size
        clause in the averaging condition instead of the difference form.

    Returns
    -------
    ConditionReport
        ``overall_theorem2_applicable`` is true only when every needed verdict
        is ``holds``: ``c1 and c2``, then ``h1`` or the composite ``h2``, then
        one of the two perturbation conditions.
    """
    c1, c2, c5, alpha_clause = _alpha_rules(alpha, h2_ratio_form)
    h1, limsup_below_one, beta_clause = _beta_rules(beta)
    h2 = _all(limsup_below_one, beta_clause, alpha_clause)
    e_sum, e_rel = _error_rules(error, alpha)
    applicable = _all(c1, c2, _any(h1, h2), _any(e_sum, e_rel)) is Verdict.HOLDS
    return ConditionReport(c1, c2, c5, h1, h2, e_sum, e_rel, applicable)


def partial_sums(schedule, horizon):
    """Cumulative sums of the first ``horizon`` terms, for finite-horizon probes."""
    n = np.arange(horizon, dtype=float)
    if isinstance(schedule, PowerLaw):
        terms = schedule.a / (n + 1) ** schedule.theta
    elif isinstance(schedule, Geometric):
        terms = schedule.a * schedule.rho**n
    else:
        terms = np.array([schedule(int(k)) for k in range(horizon)])
    return np.cumsum(terms)


# -- serialization -------------------------------------------------------------


def _direction_from_dict(d, seed):
    if d is None:
        return RandomDirection(seed)
    if d["type"] == "fixed":
        return FixedDirection(tuple(d["vector"]))
    if d["type"] == "random":
        return RandomDirection(int(d.get("seed", seed)))
    raise DomainError(f"unknown direction rule {d!r}")


def alpha_from_dict(d):
    kind = d.get("type")
    if kind == "power":
        return PowerLaw(d.get("a", 1.0), d.get("theta", 1.0))
    if kind == "geometric":
        return Geometric(d.get("a", 1.0), d.get("rho", 0.5))
    if kind == "constant":
        return ConstantStep(d["a"])
    if kind == "custom":
        tail = alpha_from_dict(d["tail"]) if d.get("tail") else None
        return Custom(tuple(d.get("values", ())), tail)
    raise DomainError(f"unknown alpha schedule {d!r}")


def beta_from_dict(d):
    kind = d.get("type")
    if kind == "constant":
        return ConstantStep(d.get("b", d.get("a")))
    if kind == "power_decay":
        return PowerDecay(d.get("b", 0.5), d.get("gamma", 1.0))
    if kind == "custom":
        tail = beta_from_dict(d["tail"]) if d.get("tail") else None
        return Custom(tuple(d.get("values", ())), tail)
    raise DomainError(f"unknown beta schedule {d!r}")


def error_from_dict(d, seed=0):
    kind = d.get("type")
    if kind == "zero":
        return ZeroError()
    if kind == "summable":
        return Summable(d.get("c", 1.0), d.get("rho", 0.5), _direction_from_dict(d.get("direction"), seed))
    if kind == "relative":
        return RelativelySmall(d.get("c", 1.0), _direction_from_dict(d.get("direction"), seed))
    if kind == "custom":
        return CustomError(tuple(d["vectors"]))
    raise DomainError(f"unknown error schedule {d!r}")
