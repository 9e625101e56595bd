"""Execute experiment configs, write traces and summaries, compare traces."""
import csv
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import ConvergenceError, VIPError
from ..schedules import RandomDirection, check_conditions
from ..solver import (
    SolverConfig,
    TRACE_COLUMNS,
    default_delta0,
    implicit_solve,
    oracle_solve,
    regularized_run,
    run_hpa,
    vip_residual,
)
from ..operators import fix_residual
from .config import ConfigError, problem_hash

EXIT_CONVERGED = 0
EXIT_BUDGET = 2
EXIT_DIVERGED = 3
EXIT_INVALID = 4
EXIT_NOT_APPLICABLE = 5

_STATUS_EXIT = {"converged": EXIT_CONVERGED, "max_iter": EXIT_BUDGET, "diverged": EXIT_DIVERGED}


def _finite_or_none(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class SummaryReport:
    name: str
    mode: str
    status: str
    iterations: int = 0
    vip_residual: float = None
    fix_residual: float = None
    dist_oracle: float = None
    dist_ref: float = None
    solution: list = None
    conditions: dict = None
    problem_hash: str = ""
    reference: list = None
    records: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self):
        d = asdict(self)
        for k in ("vip_residual", "fix_residual", "dist_oracle", "dist_ref"):
            d[k] = _finite_or_none(d[k])
        return d

    @property
    def exit_code(self):
        if self.status == "not_applicable":
            return EXIT_NOT_APPLICABLE
        return _STATUS_EXIT.get(self.status, EXIT_BUDGET)


def _reference(cfg, q_oracle):
    if cfg.reference == "oracle":
        return q_oracle
    if cfg.reference is None:
        return None
    return np.asarray(cfg.reference, dtype=float)


def _solver_config(cfg, q_ref=None):
    return SolverConfig(
        problem=cfg.problem,
        alpha=cfg.alpha,
        beta=cfg.beta,
        error=cfg.error,
        x0=cfg.x0,
        max_iter=cfg.max_iter,
        stop_tol=cfg.stop_tol,
        delta0=cfg.delta0,
        q_ref=q_ref,
    )


def _run_hpa_mode(cfg, out_dir, report):
    p = cfg.problem
    q_star = oracle_solve(p, cfg.oracle_lambda, cfg.oracle_tol)
    q_ref = _reference(cfg, q_star)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = run_hpa(_solver_config(cfg, q_ref))
    trace.to_csv(os.path.join(out_dir, f"{cfg.name}.trace.csv"))
    x = trace.x
    report.status = trace.status
    report.iterations = trace.n_iter
    report.vip_residual = vip_residual(p, x, cfg.oracle_lambda)
    report.fix_residual = float(fix_residual(p.T, x))
    report.dist_oracle = float(np.linalg.norm(x - q_star))
    report.dist_ref = None if q_ref is None else float(np.linalg.norm(x - q_ref))
    report.reference = None if q_ref is None else q_ref.tolist()
    report.solution = x.tolist()
    report.records = [{"n_clamped": trace.n_clamped}]


def _run_implicit_sweep(cfg, out_dir, report):
    p = cfg.problem
    q_star = oracle_solve(p, cfg.oracle_lambda, cfg.oracle_tol)
    delta0 = default_delta0(p) if cfg.delta0 is None else cfg.delta0
    direction = getattr(cfg.error, "direction", RandomDirection(cfg.seed))
    unit = direction.unit(0, p.dim)

    def solve(t):
        e = cfg.error_scale * t**cfg.error_power * unit
        x = implicit_solve(p, t, e=e, tol=cfg.implicit_tol, x_init=cfg.x0, delta0=delta0)
        return {
            "t": t,
            "err_norm": float(np.linalg.norm(e)),
            "dist_oracle": float(np.linalg.norm(x - q_star)),
            "vip_residual": vip_residual(p, x, cfg.oracle_lambda),
            "x": x.tolist(),
        }

    try:
        with ThreadPoolExecutor() as pool:
            records = list(pool.map(solve, cfg.t_values))
    except ConvergenceError:
        report.status = "max_iter"
        return
    _write_rows(os.path.join(out_dir, f"{cfg.name}.sweep.csv"), ["t", "err_norm", "dist_oracle", "vip_residual"], records)
    report.status = "converged"
    report.records = records
    report.dist_oracle = records[-1]["dist_oracle"]
    report.vip_residual = records[-1]["vip_residual"]
    report.solution = records[-1]["x"]
    report.reference = q_star.tolist()


def _run_regularization_sweep(cfg, out_dir, report):
    p = cfg.problem
    base = _solver_config(cfg)
    q_ref = _reference(cfg, None)

    def solve(eps):
        record, trace = regularized_run(p, eps, base, return_trace=True)
        p_eps = p.regularized(eps)
        q_eps_oracle = oracle_solve(p_eps, None, cfg.oracle_tol)
        trace.to_csv(os.path.join(out_dir, f"{cfg.name}.eps{eps:.3g}.trace.csv"))
        row = record.to_dict()
        row["dist_oracle"] = float(np.linalg.norm(record.q_eps - q_eps_oracle))
        row["dist_ref"] = None if q_ref is None else float(np.linalg.norm(record.q_eps - q_ref))
        return row

    with ThreadPoolExecutor() as pool:
        records = list(pool.map(solve, cfg.epsilons))
    _write_rows(
        os.path.join(out_dir, f"{cfg.name}.path.csv"),
        ["epsilon", "norm_q_eps", "vip_eps_residual", "dist_oracle", "dist_ref", "n_iter"],
        records,
    )
    statuses = {r["status"] for r in records}
    report.status = "diverged" if "diverged" in statuses else "max_iter" if "max_iter" in statuses else "converged"
    report.records = records
    last = records[-1]
    report.iterations = sum(r["n_iter"] for r in records)
    report.solution = last["q_eps"]
    report.vip_residual = last["vip_eps_residual"]
    report.dist_oracle = last["dist_oracle"]
    report.dist_ref = last["dist_ref"]
    report.reference = None if q_ref is None else q_ref.tolist()


def _run_oracle(cfg, out_dir, report):
    p = cfg.problem
    try:
        q = oracle_solve(p, cfg.oracle_lambda, cfg.oracle_tol)
    except ConvergenceError:
        report.status = "max_iter"
        return
    report.status = "converged"
    report.solution = q.tolist()
    report.vip_residual = vip_residual(p, q, cfg.oracle_lambda)
    report.fix_residual = float(fix_residual(p.T, q))


def _write_rows(path, columns, records):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for r in records:
            vals = []
            for c in columns:
                v = r.get(c)
                vals.append("" if v is None or (isinstance(v, float) and math.isnan(v)) else (f"{v:.17g}" if isinstance(v, float) else str(v)))
            fh.write(",".join(vals) + "\n")


_MODES = {
    "hpa": _run_hpa_mode,
    "implicit-sweep": _run_implicit_sweep,
    "regularization-sweep": _run_regularization_sweep,
    "oracle": _run_oracle,
}


def run_experiment(cfg, out_dir=None, strict=None):
    """Run the mode selected in ``cfg``.

    Writes ``<name>.trace.csv`` (or the sweep tables) and ``<name>.summary.json``
    into ``out_dir`` and returns the :class:`SummaryReport`; its ``exit_code``
    is 0 converged, 2 budget exhausted, 3 diverged, 5 not applicable. When no
    solver runs (validate mode, or a strict refusal) the report goes to
    ``<name>.validate.json`` so it never sits next to a stale trace.
    """
    out_dir = out_dir or cfg.output
    os.makedirs(out_dir, exist_ok=True)
    strict = cfg.strict if strict is None else strict
    conditions = check_conditions(cfg.alpha, cfg.beta, cfg.error, h2_ratio_form=cfg.h2_ratio_form)
    report = SummaryReport(
        name=cfg.name,
        mode=cfg.mode,
        status="converged",
        conditions=conditions.to_dict(),
        problem_hash=problem_hash(cfg.problem),
    )
    start = time.perf_counter()
    uses_schedules = cfg.mode in ("hpa", "regularization-sweep", "validate")
    if uses_schedules and not conditions.overall_theorem2_applicable and (strict or cfg.mode == "validate"):
        report.status = "not_applicable"
    elif cfg.mode != "validate":
        _MODES[cfg.mode](cfg, out_dir, report)
    report.wall_time = time.perf_counter() - start
    ran = cfg.mode != "validate" and report.status != "not_applicable"
    suffix = "summary" if ran else "validate"
    with open(os.path.join(out_dir, f"{cfg.name}.{suffix}.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    return report


# -- trace comparison ----------------------------------------------------------


def read_trace(path):
    """Load a trace CSV into a dict of float arrays (empty fields become NaN)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ConfigError(f"{path}: not a trace file (header {header})")
        rows = [[float(v) if v else math.nan for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))
    return {c: data[:, i] for i, c in enumerate(TRACE_COLUMNS)}


def _summary_for(trace_path):
    stem = trace_path[: -len(".trace.csv")] if trace_path.endswith(".trace.csv") else os.path.splitext(trace_path)[0]
    candidates = [stem + ".summary.json"]
    if ".eps" in os.path.basename(stem):
        candidates.append(stem.rsplit(".eps", 1)[0] + ".summary.json")
    for c in candidates:
        if os.path.exists(c):
            with open(c) as fh:
                return json.load(fh)
    return None


def _checkpoints(n_max):
    pts = [0]
    scale = 1
    while scale <= n_max:
        pts.extend(k * scale for k in (1, 2, 5) if k * scale <= n_max)
        scale *= 10
    return pts


def compare_runs(paths):
    """Align ``dist_ref`` of several traces at iterations 0, 1, 2, 5, 10, 20, ...

    Returns ``(header, rows)``; the last row is labelled ``"final"`` and holds
    each trace's terminal distance. Raises :class:`ConfigError` when the
    summaries next to the traces name different problems or references.
    """
    if not paths:
        raise ConfigError("no traces to compare")
    traces = [read_trace(p) for p in paths]
    summaries = [_summary_for(p) for p in paths]
    hashes = {s["problem_hash"] for s in summaries if s}
    if len(hashes) > 1:
        raise ConfigError(f"traces come from different problems: {sorted(hashes)}")
    refs = {json.dumps(s.get("reference")) for s in summaries if s}
    if len(refs) > 1:
        raise ConfigError("traces use different reference points")
    n_max = max(int(t["n"][-1]) for t in traces)
    header = ["n"] + [os.path.basename(p) for p in paths]
    rows = []
    for n in _checkpoints(n_max):
        row = [str(n)]
        for t in traces:
            row.append(f"{t['dist_ref'][n]:.6e}" if n < len(t["n"]) and not math.isnan(t["dist_ref"][n]) else "")
        rows.append(row)
    rows.append(["final"] + [f"{t['dist_ref'][-1]:.6e}" if not math.isnan(t["dist_ref"][-1]) else "" for t in traces])
    return header, rows


def format_table(header, rows):
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header] + rows]
    return "\n".join(lines)
