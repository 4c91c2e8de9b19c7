#!/usr/bin/env python3
"""Run every inequality check suite and report margins.

Each suite samples random contexts and verifies the analytical upper bounds
(estimator bias, stability constants, graph revealer ratios, clipped-lp
curvature).  Exit status is nonzero if any margin is negative.
"""
import argparse
import sys

sys.path.insert(0, "src")

from osmdkit import analysis  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--suite", choices=sorted(analysis.SUITES), default=None,
                    help="run a single suite instead of all of them")
    args = ap.parse_args()

    names = [args.suite] if args.suite else sorted(analysis.SUITES)
    failures = 0
    for name in names:
        for res in analysis.run_suite(name, seed=args.seed):
            flag = "ok " if res.passed else "FAIL"
            print(f"[{flag}] {res.name}: margin {res.margin:.6g}")
            failures += not res.passed
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
