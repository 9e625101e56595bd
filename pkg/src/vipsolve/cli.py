"""Command line entry point: ``vip run|validate|sweep|compare``."""
import argparse
import json
import os
import sys

from .core import ConvergenceError, VIPError
from .harness.config import ConfigError, load_config
from .harness.runner import EXIT_BUDGET, EXIT_INVALID, compare_runs, format_table, run_experiment

OUT_ENV = "VIP_OUT_DIR"


def _out_dir(args, cfg):
    return args.out or os.environ.get(OUT_ENV) or cfg.output


def _load(args):
    return load_config(args.config, seed=args.seed)


def _print_summary(report):
    d = report.to_dict()
    d.pop("records", None)
    print(json.dumps(d, indent=2))


def cmd_run(args):
    cfg = _load(args)
    report = run_experiment(cfg, _out_dir(args, cfg), strict=args.strict or None)
    _print_summary(report)
    return report.exit_code


def cmd_validate(args):
    cfg = _load(args)
    cfg.mode = "validate"
    report = run_experiment(cfg, _out_dir(args, cfg))
    applicable = report.conditions["overall_theorem2_applicable"]
    print(json.dumps({"valid": True, "applicable": applicable, "conditions": report.conditions}, indent=2))
    return report.exit_code


def cmd_sweep(args):
    cfg = _load(args)
    if cfg.mode not in ("implicit-sweep", "regularization-sweep"):
        raise ConfigError(f"mode {cfg.mode!r} is not a sweep; use implicit-sweep or regularization-sweep")
    report = run_experiment(cfg, _out_dir(args, cfg), strict=args.strict or None)
    _print_summary(report)
    for r in report.records:
        print(json.dumps({k: v for k, v in r.items() if k not in ("x", "q_eps")}))
    return report.exit_code


def cmd_compare(args):
    header, rows = compare_runs(args.traces)
    print(format_table(header, rows))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="vip", description="Hybrid perturbed solver for variational inequalities")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (
        ("run", cmd_run, "run the experiment described by a config"),
        ("validate", cmd_validate, "validate a config and report the convergence conditions"),
        ("sweep", cmd_sweep, "run an implicit or regularization sweep"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--strict", action="store_true", help="refuse schedules that fail the hypotheses")
        p.set_defaults(func=func)
    p = sub.add_parser("compare", help="align distance-to-reference columns of several traces")
    p.add_argument("traces", nargs="+")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, VIPError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
