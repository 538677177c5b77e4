#!/usr/bin/env python3
"""Run the diver-following scenario and plot tracking quality.

Writes follow_report.png (bbox center error and area fraction over time)
next to the log. Usage: python scripts/follow_report.py [scenario.yaml]
"""

import sys
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from locosim.harness.logs import read_log
from locosim.harness.metrics import bbox_stats
from locosim.harness.runner import run_scenario
from locosim.harness.scenario import load_scenario

REPO = Path(__file__).resolve().parent.parent


def main():
    scenario_path = sys.argv[1] if len(sys.argv) > 1 else REPO / "scenarios" / "diver_follow.yaml"
    scenario = load_scenario(scenario_path)
    log = Path(tempfile.mkdtemp()) / f"{scenario.name}.jsonl"
    summary = run_scenario(scenario, log_path=log)
    print(f"run: {summary.exit_reason} after {summary.sim_time:.1f} s (wall {summary.wall_time:.1f} s)")

    _, records = read_log(log)
    ts, cx_err, area = [], [], []
    for r in records:
        bbox = r["hri"].get("bbox")
        if bbox is None:
            continue
        ts.append(r["t"])
        cx_err.append(bbox[0] - 400.0)
        area.append(bbox[2] * bbox[3] / (800.0 * 600.0))

    stats = bbox_stats(log, after_t=30.0)
    print(f"after 30 s: centered {100 * stats['centered_fraction']:.1f}%, area ok {100 * stats['area_ok_fraction']:.1f}%")

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    ax1.plot(ts, cx_err)
    ax1.axhspan(-80, 80, alpha=0.15, color="green", label="central 20% of width")
    ax1.set_ylabel("bbox center error [px]")
    ax1.legend()
    ax2.plot(ts, area)
    ax2.axhspan(0.035, 0.065, alpha=0.15, color="green", label="target +-30%")
    ax2.set_ylabel("bbox area fraction")
    ax2.set_xlabel("sim time [s]")
    ax2.legend()
    out = Path("follow_report.png")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
