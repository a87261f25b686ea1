"""Command line driver: ``rbfsobolev run|validate|oracle``.

Exit codes: 0 when every criterion passes, 2 when a rate criterion fails,
1 on configuration or execution errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .errors import RBFError
from .experiments import load_configs, run_experiment
from .oracles import run_oracle
from .report import emit_report

log = logging.getLogger("rbfsobolev")


def _cmd_run(args) -> int:
    configs = load_configs(args.config)
    if args.only:
        configs = [c for c in configs if c.name in args.only]
        if not configs:
            raise RBFError(f"no sections named {args.only} in {args.config}")
    out_dir = Path(args.out) if args.out else Path(args.config).with_suffix("")
    status = 0
    for cfg in configs:
        start = time.perf_counter()
        report = run_experiment(cfg)
        paths = emit_report(report, args.format, out_dir, cfg.name)
        elapsed = time.perf_counter() - start
        for c in report.criteria:
            print(f"{c.id:<28} {'PASS' if c.passed else 'FAIL'}  measured={c.measured}  required {c.threshold}")
        log.info("%s done in %.1f s; wrote %s", cfg.name, elapsed, ", ".join(str(p) for p in paths))
        if not report.passed:
            status = 2
    return status


def _cmd_validate(args) -> int:
    for cfg in load_configs(args.config):
        print(f"{cfg.name}: {cfg.kind} {cfg.kernel.to_text()} levels={list(cfg.levels)} sigmas={list(cfg.sigmas)} ok")
    return 0


def _cmd_oracle(args) -> int:
    for group, values in run_oracle(args.name).items():
        for label, value in values.items():
            print(f"{group:<15} {label:<40} {value!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbfsobolev", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run every experiment section of a config file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (default: config path without suffix)")
    run.add_argument("--format", nargs="+", choices=("csv", "json", "svg"), default=["csv", "json", "svg"])
    run.add_argument("--only", nargs="+", help="run only these sections")
    run.set_defaults(func=_cmd_run)
    val = sub.add_parser("validate", help="parse and check a config without running it")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)
    orc = sub.add_parser("oracle", help="print reference constants from the independent oracles")
    orc.add_argument("name", nargs="?", default="all")
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (RBFError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
