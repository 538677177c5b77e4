"""Command line entry points: run, replay, calibrate-drag, export-csv."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ..dynamics import calibrate_drag
from .bridge import BridgeServer, replay
from .logs import export_csv
from .runner import run_scenario
from .scenario import load_scenario

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("LOCO_LOG_LEVEL", "info").lower()
    if level not in LOG_LEVELS:
        print(f"LOCO_LOG_LEVEL must be one of {sorted(LOG_LEVELS)}", file=sys.stderr)
        level = "info"
    logging.basicConfig(level=LOG_LEVELS[level], format="%(asctime)s %(name)s %(levelname)s %(message)s")


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    scenario = scenario.with_overrides(dt=args.dt, seed=args.seed, duration=args.duration)
    log_path = args.log or f"{scenario.name}.jsonl"
    bridge = None
    if args.bridge_port:
        bridge = BridgeServer(args.bridge_port, scenario.name, scenario.seed).start()
        print(f"bridge listening on ws://127.0.0.1:{args.bridge_port}", flush=True)
    try:
        summary = run_scenario(scenario, log_path=log_path, bridge=bridge, realtime=args.realtime)
    finally:
        if bridge is not None:
            bridge.stop()
    print(
        json.dumps(
            {
                "exit_reason": summary.exit_reason,
                "sim_time": summary.sim_time,
                "wall_time": round(summary.wall_time, 3),
                "log": summary.log_path,
                "final": summary.final_truth,
                "metrics": summary.metrics,
                "error": summary.error,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0 if summary.ok else 1


def cmd_replay(args) -> int:
    bridge = None
    if args.bridge_port:
        bridge = BridgeServer(args.bridge_port, f"replay:{Path(args.log).name}").start()
        print(f"bridge listening on ws://127.0.0.1:{args.bridge_port}", flush=True)
    try:
        out = replay(args.log, speed=args.speed, bridge=bridge)
    finally:
        if bridge is not None:
            bridge.stop()
    print(json.dumps(out))
    return 0


def cmd_calibrate_drag(args) -> int:
    coeff = calibrate_drag(args.thrust, args.speed)
    print(f"{coeff:.6g}")
    return 0


def cmd_export_csv(args) -> int:
    rows = export_csv(args.log, args.fields, args.out)
    print(f"wrote {rows} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loco-sim", description="LoCO AUV simulator and autonomy stack")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file")
    run_p.add_argument("scenario", help="scenario YAML path")
    run_p.add_argument("--dt", type=float, default=None, help="override integrator step (s)")
    run_p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    run_p.add_argument("--duration", type=float, default=None, help="override duration (s)")
    run_p.add_argument("--log", default=None, help="log output path (JSON lines)")
    run_p.add_argument("--bridge-port", type=int, default=None, help="serve the operator bridge on this port")
    pace = run_p.add_mutually_exclusive_group()
    pace.add_argument("--realtime", action="store_true", help="pace the loop to wall clock")
    pace.add_argument("--fast", dest="realtime", action="store_false", help="run as fast as possible (default)")
    run_p.set_defaults(func=cmd_run, realtime=False)

    rep = sub.add_parser("replay", help="re-emit a recorded log over the bridge")
    rep.add_argument("log", help="JSON-lines log path")
    rep.add_argument("--speed", type=float, default=1.0, help="pacing multiplier; 0 = as fast as possible")
    rep.add_argument("--bridge-port", type=int, default=None)
    rep.set_defaults(func=cmd_replay)

    cal = sub.add_parser("calibrate-drag", help="quadratic drag coefficient from a steady-state run")
    cal.add_argument("--thrust", type=float, required=True, help="total thrust (N)")
    cal.add_argument("--speed", type=float, required=True, help="steady speed (m/s)")
    cal.set_defaults(func=cmd_calibrate_drag)

    exp = sub.add_parser("export-csv", help="flatten log fields to CSV")
    exp.add_argument("log")
    exp.add_argument("--fields", nargs="+", required=True, help="dotted record paths, e.g. t truth.depth power.alarm")
    exp.add_argument("-o", "--out", default="out.csv")
    exp.set_defaults(func=cmd_export_csv)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
