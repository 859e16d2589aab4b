"""Command-line front end.

    nwmm simulate <scenario.json> [--out DIR] [--plots]
    nwmm plan     <scenario.json>
    nwmm check    <scenario.json> [--trials N] [--tol-scale X]

Exit codes: 0 success, 1 invalid input, 2 invariant-check failure.
NWMM_LOG=debug|info raises diagnostic verbosity.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .model import forward_kinematics
from .scenario import load_scenario
from .sim import emit_csv, run_scenario
from .trajectory import plan_approach
from .verify import run_all_checks

log = logging.getLogger("nwmm")

_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO}


def _configure_logging():
    level = _LEVELS.get(os.environ.get("NWMM_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    log.info("running scenario %s (dt=%g s)", args.scenario, scenario.dt)
    result = run_scenario(scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scenario).stem
    csv_path = out_dir / f"{stem}.csv"
    emit_csv(result, csv_path)
    print(csv_path)
    if args.plots:
        from .plots import emit_plots

        for path in emit_plots(result, out_dir, scenario.geometry, prefix=f"{stem}_"):
            print(path)
    err = result.tracking_error[-1]
    log.info(
        "final position error %.3e m, orientation error %.3e rad",
        float(np.linalg.norm(err[:3])),
        float(np.linalg.norm(err[3:])),
    )
    return 0


def _cmd_plan(args):
    scenario = load_scenario(args.scenario)
    start = forward_kinematics(scenario.initial_state, scenario.geometry)
    segments = plan_approach(
        start, scenario.pruning_point, *scenario.phase_durations
    )
    print(json.dumps([seg.to_dict() for seg in segments], indent=2))
    return 0


def _cmd_check(args):
    scenario = load_scenario(args.scenario)
    results = run_all_checks(
        scenario.geometry,
        seed=scenario.seed,
        trials=args.trials,
        tol_scale=args.tol_scale,
        dynamics_params=scenario.dynamics,
    )
    failed = False
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name}: {res.worst:.3e} (tol {res.tolerance:.1e})")
        failed = failed or not res.passed
    return 2 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nwmm",
        description="Whole-body motion control simulator for a wheeled mobile manipulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and emit CSV (+SVG with --plots)")
    p_sim.add_argument("scenario", help="scenario JSON file")
    p_sim.add_argument("--out", default=".", help="output directory (default: .)")
    p_sim.add_argument("--plots", action="store_true", help="also write SVG charts")
    p_sim.set_defaults(func=_cmd_simulate)

    p_plan = sub.add_parser("plan", help="print the planned quintic segments as JSON")
    p_plan.add_argument("scenario", help="scenario JSON file")
    p_plan.set_defaults(func=_cmd_plan)

    p_check = sub.add_parser("check", help="run the model invariant suite on the scenario geometry")
    p_check.add_argument("scenario", help="scenario JSON file")
    p_check.add_argument("--trials", type=int, default=200, help="random configurations per check")
    p_check.add_argument("--tol-scale", type=float, default=1.0, help="multiply all tolerances")
    p_check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
