"""Command-line entry point: ``vocdm <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import BudgetExceededError, ConfigError
from .config import EXPERIMENTS, default_config, load_config
from .experiments import run_experiment
from .records import render
from .verify import report_csv, report_json, run_verify

log = logging.getLogger("vocdm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vocdm", description="VOCDM simulation harness")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify",) + EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="YAML experiment config")
        p.add_argument("--seed", type=int, help="base seed (overrides config)")
        p.add_argument("--workers", type=int, help="worker processes (overrides config)")
        p.add_argument("--out", type=Path, help="output file; stdout when omitted")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        if name != "verify":
            p.add_argument("--trials", type=int, help="trials (overrides config)")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        log.info("wrote %s", out)


def _verify(args) -> int:
    results = run_verify()
    fmt = args.format or "json"
    _emit(report_json(results) if fmt == "json" else report_csv(results), args.out)
    for r in results:
        log.info("%s %s residual=%.3g tol=%.3g", "PASS" if r.passed else "FAIL", r.name, r.residual, r.tolerance)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "verify":
        return _verify(args)
    try:
        cfg = load_config(args.config) if args.config else default_config(args.command)
        if cfg.experiment != args.command:
            raise ConfigError(f"config describes {cfg.experiment!r}, not {args.command!r}")
        cfg = cfg.replace(
            seed=args.seed,
            workers=args.workers,
            trials=args.trials,
            format=args.format,
            out=str(args.out) if args.out else None,
        )
        records = run_experiment(cfg)
    except (ConfigError, BudgetExceededError, OSError) as exc:
        print(f"vocdm: error: {exc}", file=sys.stderr)
        return 2
    _emit(render(records, cfg.format), Path(cfg.out) if cfg.out else None)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
