"""Command line entry point: run experiments, sweeps and inequality checks."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis, runner


def _add_common(parser):
    parser.add_argument("--workers", type=int, default=1)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="osmdkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single experiment config")
    p_run.add_argument("--config", required=True)
    _add_common(p_run)

    p_fig1 = sub.add_parser(
        "fig1", help="shifted vs plain importance weighting on the 5-armed instance"
    )
    p_fig1.add_argument("--repeats", type=int, default=runner.FIG1_REPEATS)
    p_fig1.add_argument("--horizon", type=int, default=runner.FIG1_HORIZON)
    p_fig1.add_argument("--seed", type=int, default=0)
    p_fig1.add_argument("--out", default="out")
    _add_common(p_fig1)

    p_sweep = sub.add_parser("sweep", help="run every experiment in a config list")
    p_sweep.add_argument("--config", required=True)
    _add_common(p_sweep)

    p_check = sub.add_parser("check", help="run an analysis inequality suite")
    p_check.add_argument("--suite", required=True, choices=sorted(analysis.SUITES))
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--out", default=None, help="optional JSON report path")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (runner.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _write_summary(summary: dict, out_dir: str, experiment: str) -> None:
    path = os.path.join(out_dir, experiment, "summary.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)


def _dispatch(args) -> int:
    if args.command == "run":
        with open(args.config) as fh:
            cfg = json.load(fh)
        summary = runner.run_experiment(cfg, workers=args.workers)
        _write_summary(summary, cfg.get("out", "out"), cfg["experiment"])
        print(f"wrote {summary['csv']}")
        return 0

    if args.command == "fig1":
        doc = runner.run_fig1(
            repeats=args.repeats,
            horizon=args.horizon,
            seed=args.seed,
            out=args.out,
            workers=args.workers,
        )
        print(
            f"fig1 complete: final regret ratio plain/shifted = "
            f"{doc['final_regret_ratio']:.3f}"
        )
        return 0

    if args.command == "sweep":
        with open(args.config) as fh:
            doc = json.load(fh)
        experiments = doc["experiments"] if isinstance(doc, dict) else doc
        status = 0
        for cfg in experiments:
            summary = runner.run_experiment(cfg, workers=args.workers)
            _write_summary(summary, cfg.get("out", "out"), cfg["experiment"])
            print(f"wrote {summary['csv']}")
        return status

    if args.command == "check":
        results = analysis.run_suite(args.suite, seed=args.seed)
        all_ok = True
        for res in results:
            flag = "ok " if res.passed else "FAIL"
            print(f"[{flag}] {res.name}: margin {res.margin:.6g}")
            all_ok &= res.passed
        if args.out:
            with open(args.out, "w") as fh:
                json.dump([r.report() for r in results], fh, indent=2)
        return 0 if all_ok else 1

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
