"""Experiment configuration files (JSON, one experiment per file)."""
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..core import VIPError, as_vector
from ..operators import problem_from_dict
from ..schedules import alpha_from_dict, beta_from_dict, error_from_dict
from ..sets import contains
from ..solver import delta0_star, default_delta0

MODES = ("hpa", "implicit-sweep", "regularization-sweep", "oracle", "validate")


class ConfigError(VIPError, ValueError):
    """The configuration file is malformed or violates an invariant."""


@dataclass(eq=False)
class ExperimentConfig:
    problem: object
    alpha: object
    beta: object
    error: object
    mode: str = "hpa"
    name: str = "experiment"
    seed: int = 0
    x0: list = None
    max_iter: int = 100_000
    stop_tol: float = 1e-6
    delta0: float = None
    reference: object = None
    t_values: list = field(default_factory=list)
    error_scale: float = 1.0
    error_power: float = 2.0
    implicit_tol: float = 1e-10
    epsilons: list = field(default_factory=list)
    oracle_lambda: float = None
    oracle_tol: float = 1e-12
    output: str = "out"
    strict: bool = False
    h2_ratio_form: bool = False

    def to_dict(self):
        return {
            "name": self.name,
            "mode": self.mode,
            "seed": self.seed,
            "problem": self.problem.to_dict(),
            "schedules": {
                "alpha": self.alpha.to_dict(),
                "beta": self.beta.to_dict(),
                "error": self.error.to_dict(),
            },
            "solver": {
                "x0": self.x0,
                "max_iter": self.max_iter,
                "stop_tol": self.stop_tol,
                "delta0": self.delta0,
                "reference": self.reference,
            },
            "implicit": {
                "t": list(self.t_values),
                "error_scale": self.error_scale,
                "error_power": self.error_power,
                "tol": self.implicit_tol,
            },
            "regularization": {"epsilons": list(self.epsilons)},
            "oracle": {"lambda": self.oracle_lambda, "tol": self.oracle_tol},
            "output": self.output,
            "strict": self.strict,
            "h2_ratio_form": self.h2_ratio_form,
        }

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.to_dict() == other.to_dict()

    @property
    def problem_hash(self):
        return problem_hash(self.problem)


def problem_hash(problem):
    blob = json.dumps(problem.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def config_from_dict(d, seed=None):
    """Build and validate a config from parsed JSON. ``seed`` overrides the file's seed."""
    try:
        seed = int(d.get("seed", 0) if seed is None else seed)
        sched = d.get("schedules", {})
        solver = d.get("solver", {})
        implicit = d.get("implicit", {})
        oracle = d.get("oracle", {})
        cfg = ExperimentConfig(
            problem=problem_from_dict(d["problem"]),
            alpha=alpha_from_dict(sched.get("alpha", {"type": "power", "a": 1.0, "theta": 1.0})),
            beta=beta_from_dict(sched.get("beta", {"type": "constant", "b": 0.5})),
            error=error_from_dict(sched.get("error", {"type": "zero"}), seed=seed),
            mode=d.get("mode", "hpa"),
            name=d.get("name", "experiment"),
            seed=seed,
            x0=solver.get("x0"),
            max_iter=int(solver.get("max_iter", 100_000)),
            stop_tol=float(solver.get("stop_tol", 1e-6)),
            delta0=solver.get("delta0"),
            reference=solver.get("reference"),
            t_values=[float(t) for t in implicit.get("t", [])],
            error_scale=float(implicit.get("error_scale", 1.0)),
            error_power=float(implicit.get("error_power", 2.0)),
            implicit_tol=float(implicit.get("tol", 1e-10)),
            epsilons=[float(e) for e in d.get("regularization", {}).get("epsilons", [])],
            oracle_lambda=oracle.get("lambda"),
            oracle_tol=float(oracle.get("tol", 1e-12)),
            output=d.get("output", "out"),
            strict=bool(d.get("strict", False)),
            h2_ratio_form=bool(d.get("h2_ratio_form", False)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"missing or malformed field: {exc}") from exc
    except VIPError as exc:
        raise ConfigError(str(exc)) from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg, n_probe=64):
    """Check the cross-field invariants; raise :class:`ConfigError` naming the violated one."""
    p = cfg.problem
    if cfg.mode not in MODES:
        raise ConfigError(f"unknown mode {cfg.mode!r}; expected one of {MODES}")
    if cfg.max_iter < 1 or not cfg.stop_tol > 0:
        raise ConfigError("max_iter must be >= 1 and stop_tol > 0")
    if cfg.x0 is not None:
        try:
            x0 = as_vector(cfg.x0, p.dim, name="x0")
        except VIPError as exc:
            raise ConfigError(str(exc)) from exc
        if not contains(p.Q, x0, 1e-10):
            raise ConfigError("x0 must lie in Q")
    if isinstance(cfg.reference, list) and len(cfg.reference) != p.dim:
        raise ConfigError("reference point has the wrong dimension")
    if cfg.reference not in (None, "oracle") and not isinstance(cfg.reference, list):
        raise ConfigError("reference must be null, \"oracle\" or a point")
    try:
        p.check_invariance(np.random.default_rng(cfg.seed), n_probe=n_probe)
    except VIPError as exc:
        raise ConfigError(str(exc)) from exc

    if p.limit_case:
        if cfg.mode in ("hpa", "implicit-sweep", "oracle"):
            raise ConfigError(
                "limit-case instance (alpha == eta): use mode regularization-sweep"
            )
    else:
        if cfg.mode == "regularization-sweep":
            raise ConfigError("regularization-sweep needs a limit_case instance")
        star = delta0_star(p)
        if cfg.delta0 is not None and not 0.0 < cfg.delta0 < star:
            raise ConfigError(f"delta0 out of range: need 0 < delta0 < {star:.17g}")
        if cfg.mode == "implicit-sweep":
            d0 = default_delta0(p) if cfg.delta0 is None else cfg.delta0
            if not cfg.t_values or any(not 0.0 < t <= d0 for t in cfg.t_values):
                raise ConfigError(f"implicit sweep needs t values in (0, {d0:.17g}]")
    if cfg.mode == "regularization-sweep":
        eps = cfg.epsilons
        if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilons must be positive and strictly decreasing")


def load_config(path, seed=None):
    """Parse and validate a config file.

    Raises
    ------
    ConfigError
        With the line and column for JSON syntax errors, or the name of the
        violated invariant.
    """
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(d, seed=seed)


def save_config(cfg, path):
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")
