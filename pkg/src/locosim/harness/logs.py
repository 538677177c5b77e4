"""JSON-lines run logs: one header line, then one record per logging tick.

Canonical serialization (sorted keys, fixed separators, shortest-repr
floats) makes two runs of the same scenario and seed byte-identical, which
the determinism and replay checks rely on. Wall-clock time never appears
anywhere in a log.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

from ..geometry import quat_to_euler

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def make_header(scenario_name: str, scenario_sha256: str, seed: int, dt: float) -> dict:
    return {
        "type": "header",
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario_name,
        "scenario_sha256": scenario_sha256,
        "seed": seed,
        "dt": dt,
    }


def make_record(t, truth, est, odom, depth_est, cmd, cmd_source, thrusters, power, hri, events) -> dict:
    """Build one log record from live objects; everything becomes plain JSON."""
    roll, pitch, yaw = quat_to_euler(truth.orientation)
    record = {
        "type": "record",
        "t": round(t, 6),
        "truth": {
            "p": [float(x) for x in truth.position],
            "q": [float(x) for x in truth.orientation],
            "v": [float(x) for x in truth.linear_velocity],
            "w": [float(x) for x in truth.angular_velocity],
            "rpy": [roll, pitch, yaw],
            "depth": truth.depth,
        },
        "cmd": {
            "thrust": float(cmd.thrust),
            "pitch": float(cmd.pitch),
            "yaw": float(cmd.yaw),
            "source": cmd_source,
        },
        "thr": [thrusters.left, thrusters.right, thrusters.vertical],
        "power": {
            "v": [power.voltages[0], power.voltages[1]],
            "charge": [power.left.charge, power.right.charge],
            "alarm": power.alarm_active,
        },
        "hri": hri,
        "events": events,
    }
    if est is not None:
        eroll, epitch, eyaw = quat_to_euler(est.orientation)
        record["est"] = {
            "q": [float(x) for x in est.orientation],
            "rpy": [eroll, epitch, eyaw],
            "bias": [float(x) for x in est.gyro_bias],
            "depth": depth_est,
            "odom_p": [float(x) for x in odom.position],
            "odom_v": float(odom.velocity[0]),
            "odom_yaw": float(odom.yaw),
        }
    else:
        record["est"] = None
    return record


class LogWriter:
    def __init__(self, path: str | Path, header: dict):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8")
        self._fh.write(canonical_json(header) + "\n")
        self.records_written = 0

    def write(self, record: dict):
        self._fh.write(canonical_json(record) + "\n")
        self.records_written += 1

    def close(self):
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_log(path: str | Path) -> tuple[dict, list[dict]]:
    """Read a log file; malformed lines are skipped with a warning."""
    header = None
    records = []
    skipped = 0
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                skipped += 1
                logger.warning("%s:%d: malformed log line skipped", path, lineno)
                continue
            if obj.get("type") == "header":
                header = obj
            else:
                records.append(obj)
    if skipped:
        logger.warning("%s: skipped %d malformed line(s)", path, skipped)
    if header is None:
        raise ValueError(f"{path}: missing header line")
    return header, records


def export_csv(log_path: str | Path, fields: list[str], out_path: str | Path):
    """Flatten dotted field paths from each record into CSV columns."""
    import csv

    def pick(record: dict, dotted: str):
        cur = record
        for part in dotted.split("."):
            if isinstance(cur, list):
                cur = cur[int(part)]
            elif isinstance(cur, dict):
                cur = cur.get(part)
            else:
                return None
            if cur is None:
                return None
        return cur

    _, records = read_log(log_path)
    with Path(out_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for rec in records:
            writer.writerow([pick(rec, f) for f in fields])
    return len(records)
