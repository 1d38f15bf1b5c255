"""Command-line front-end.

Subcommands: ``threshold``, ``handover``, ``sweep`` run the corresponding
experiment; ``verify`` runs the brute-force cross-check suite. Exit codes:
0 on success, 2 on configuration errors, 3 on contract violations.
"""

from __future__ import annotations

import argparse
import sys

from .config import default_config, load_config
from .errors import ConfigError, ContractViolation
from .oracles import run_verification_suite

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="batt",
        description="Handover threshold search and measurement-ordering experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("threshold", "compare the binary and uniform threshold searchers"),
        ("handover", "compare the five measurement-ordering policies"),
        ("sweep", "parameter sweep over one of the experiments"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML config file (defaults to the bundled setup)")
        p.add_argument("--seed", type=int, help="override run.base_seed")
        p.add_argument("--out", help="override run.out_dir")
    v = sub.add_parser("verify", help="run the brute-force verification suite")
    v.add_argument("--seed", type=int, default=7)
    return parser


def _load(args) -> "ExperimentConfig":
    cfg = load_config(args.config) if args.config else default_config()
    overrides = {}
    if args.seed is not None:
        overrides["run.base_seed"] = int(args.seed)
    if args.out is not None:
        overrides["run.out_dir"] = str(args.out)
    if args.command != cfg.experiment:
        overrides["experiment"] = args.command
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            reports = run_verification_suite(seed=args.seed, verbose=True)
            if any(not r.agreement for r in reports):
                raise ContractViolation("verification suite found disagreements")
            return 0
        cfg = _load(args)
        out_dir = cfg.out_dir
        if args.command == "threshold":
            from .experiments import run_threshold_experiment

            res = run_threshold_experiment(cfg, out_dir=out_dir)
            print(res.summary.to_string(index=False))
        elif args.command == "handover":
            from .experiments import run_handover_experiment

            res = run_handover_experiment(cfg, out_dir=out_dir)
            print(res.summary.to_string(index=False))
        elif args.command == "sweep":
            from .experiments import run_sweep

            res = run_sweep(cfg, out_dir=out_dir)
            print(res.points.to_string(index=False))
        print(f"outputs written to {out_dir}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
