"""Command-line runner: ``chernoffkit run|validate|list-experiments``."""

from __future__ import annotations

import argparse
import sys

from chernoffkit.config import DESCRIPTIONS, EXPERIMENTS, ConfigError, load_config

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chernoffkit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write its report")
    run.add_argument("config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--threads", type=int, default=1, help="worker cap; outputs do not depend on it")
    run.add_argument("--level-filter", type=int, default=None, metavar="L",
                     help="run only ladder level L (0-based)")
    run.add_argument("--timings", action="store_true",
                     help="also write timings.json (wall clock, not reproducible)")
    val = sub.add_parser("validate", help="parse and check a config without running it")
    val.add_argument("config")
    sub.add_parser("list-experiments", help="list experiment kinds")
    return ap


def _load(path: str):
    try:
        return load_config(path), None
    except ConfigError as exc:
        return None, f"invalid config: {exc}"
    except OSError as exc:
        return None, f"cannot read config: {exc}"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(f"{name:12s} {DESCRIPTIONS[name]}")
        return EXIT_OK

    cfg, err = _load(args.config)
    if err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"ok: {cfg.experiment} with {len(cfg.levels)} level(s)")
        return EXIT_OK

    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    from chernoffkit.experiments import emit_report, run_experiment

    try:
        report = run_experiment(cfg, threads=args.threads, level_filter=args.level_filter)
    except IndexError as exc:
        print(f"invalid level filter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced as a runtime failure
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        emit_report(report, args.out, timings=args.timings)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    for name, v in report.verdicts.items():
        state = "n/a" if v.passed is None else ("pass" if v.passed else "FAIL")
        extra = "" if v.value is None else f" value={v.value:.6g}"
        extra += "" if v.tolerance is None else f" tol={v.tolerance:.6g}"
        print(f"{name}: {state}{extra}")
    return EXIT_OK if report.passed else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
