"""Command-line entry point: one subcommand per experiment.

Exit codes: 0 PASS, 1 FAIL, 2 INCONCLUSIVE, 3 error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import LightconeError
from .experiments import (
    export_worldlines,
    run_boost_test,
    run_consistency_check,
    run_nonlocality_demo,
    run_nrlimit_test,
    run_simulate,
)
from .scenario import load_scenario

log = logging.getLogger("lightcone_bohm")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lightcone-bohm", description="Light-cone law of motion experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="scenario YAML file")
        p.add_argument("--ht", type=float, default=None, help="integration step in coordinate time")
        p.add_argument("--T", type=float, default=None, dest="t_final", help="final time of the run")
        p.add_argument("--out", default=None, help="output directory (default: scenario output.path)")
        p.add_argument("--stride", type=int, default=None, help="export every n-th sample")
        return p

    add("simulate", "integrate the light-cone law backwards from final data")
    p = add("boost-test", "compare runs in two Lorentz frames")
    p.add_argument("--chi", type=float, default=None, help="rapidity of the boost")
    p.add_argument("--refine", action="store_true", help="also run at ht/2 and ht/4")
    p = add("nrlimit-test", "light-cone law versus equal-time law as momenta shrink")
    p.add_argument("--scales", type=float, nargs="+", default=None, help="momentum scales in units of m")
    add("nonlocality-demo", "field-on/field-off deflection for entangled and product states")
    p = add("check", "multi-time consistency and commutator residuals")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--sweep", type=int, default=None, help="random configurations for the timelike sweep")
    return ap


def _dispatch(args):
    s = load_scenario(args.scenario)
    if args.command == "simulate":
        return s, run_simulate(s, args.ht, args.t_final)
    if args.command == "boost-test":
        chi = args.chi if args.chi is not None else float((s.experiments.get("boost") or {}).get("chi", [0.3])[0])
        return s, run_boost_test(s, chi, args.ht, args.t_final, refine=args.refine)
    if args.command == "nrlimit-test":
        return s, run_nrlimit_test(s, args.scales, args.ht, args.t_final)
    if args.command == "nonlocality-demo":
        return s, run_nonlocality_demo(s, args.ht, args.t_final)
    return s, run_consistency_check(s, samples=args.samples, sweep=args.sweep)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = _parser().parse_args(argv)
    try:
        s, report = _dispatch(args)
        out = Path(args.out or Path(s.output.path) / args.command)
        stride = args.stride or s.output.stride
        export_worldlines(report, out, stride)
    except (LightconeError, ValueError, OSError) as exc:
        log.error("error: %s", exc)
        return 3
    log.info(json.dumps({"experiment": report.experiment, "verdict": report.verdict,
                         "metrics": report.metrics}, default=str, indent=2))
    log.info("%s: %s (exports in %s)", report.experiment, report.verdict, out)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
