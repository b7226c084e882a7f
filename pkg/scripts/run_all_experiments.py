#!/usr/bin/env python3
"""Run every headline experiment on the shipped scenarios and export the results.

Writes one directory per run under --out and prints a verdict table.
"""
import argparse
import logging
import sys
import time
from pathlib import Path

from lightcone_bohm.experiments import (
    export_worldlines,
    run_boost_test,
    run_consistency_check,
    run_nonlocality_demo,
    run_nrlimit_test,
    run_simulate,
)
from lightcone_bohm.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]


def jobs(scenarios: Path):
    for path in sorted(scenarios.glob("*.yaml")):
        s = load_scenario(path)
        if s.final_events is not None:
            yield f"simulate/{s.name}", s, lambda s=s: run_simulate(s)
            yield f"check/{s.name}", s, lambda s=s: run_consistency_check(s)
        if "boost" in s.experiments:
            for chi in s.experiments["boost"].get("chi", [0.3]):
                yield f"boost/{s.name}/chi{chi:g}", s, lambda s=s, chi=chi: run_boost_test(s, float(chi))
        if "nrlimit" in s.experiments:
            yield f"nrlimit/{s.name}", s, lambda s=s: run_nrlimit_test(s)
        if "nonlocality" in s.experiments:
            yield f"nonlocality/{s.name}", s, lambda s=s: run_nonlocality_demo(s)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenarios", type=Path, default=ROOT / "scenarios")
    ap.add_argument("--out", type=Path, default=ROOT / "out" / "all")
    ap.add_argument("--only", default=None, help="substring filter on job names")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    failed = 0
    for name, s, fn in jobs(args.scenarios):
        if args.only and args.only not in name:
            continue
        t0 = time.perf_counter()
        report = fn()
        export_worldlines(report, args.out / name, s.output.stride)
        failed += report.verdict != "PASS"
        print(f"{report.verdict:13s} {name:45s} {time.perf_counter() - t0:7.1f} s")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
