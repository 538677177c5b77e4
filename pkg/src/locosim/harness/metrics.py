"""Post-hoc metrics computed from log files alone.

Acceptance checks never read live simulator state; they parse the JSONL
log a run produced, so anything they measure is reproducible offline.
"""

from __future__ import annotations

import math

import numpy as np

from .logs import read_log


def _records(log_path):
    _, records = read_log(log_path)
    return [r for r in records if r.get("type") == "record"]


def terminal_speed(log_path, tail_seconds: float = 5.0) -> float:
    recs = _records(log_path)
    t_end = recs[-1]["t"]
    tail = [r["truth"]["v"][0] for r in recs if r["t"] >= t_end - tail_seconds]
    return float(np.mean(tail))


def depth_drift(log_path) -> float:
    recs = _records(log_path)
    d0 = recs[0]["truth"]["depth"]
    return float(max(abs(r["truth"]["depth"] - d0) for r in recs))


def pitch_stats(log_path, threshold_deg: float = 2.0) -> dict:
    recs = _records(log_path)
    pitches = [math.degrees(r["truth"]["rpy"][1]) for r in recs]
    signs = [p > 0 for p in pitches if abs(p) > threshold_deg]
    alternations = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    return {
        "alternations": alternations,
        "peak_deg": float(max(abs(p) for p in pitches)) if pitches else 0.0,
        "final_deg": float(pitches[-1]) if pitches else 0.0,
    }


def attitude_error_stats(log_path) -> dict:
    """Angle between true and estimated attitude, plus the tilt-only part."""
    recs = [r for r in _records(log_path) if r.get("est")]
    full, tilt = [], []
    for r in recs:
        qt = np.array(r["truth"]["q"])
        qe = np.array(r["est"]["q"])
        d = min(1.0, abs(float(qt @ qe)))
        full.append(math.degrees(2.0 * math.acos(d)))
        rt = r["truth"]["rpy"]
        re = r["est"]["rpy"]
        # tilt error from roll/pitch difference (yaw has no reference)
        tilt.append(math.degrees(math.hypot(rt[0] - re[0], rt[1] - re[1])))
    return {
        "max_full_deg": float(max(full)) if full else 0.0,
        "rms_tilt_deg": float(np.sqrt(np.mean(np.square(tilt)))) if tilt else 0.0,
        "max_tilt_deg": float(max(tilt)) if tilt else 0.0,
    }


def bbox_stats(log_path, after_t: float = 30.0, target_area_fraction: float = 0.05) -> dict:
    recs = _records(log_path)
    width = 800.0
    height = 600.0
    centered = []
    area_ok = []
    present = 0
    for r in recs:
        if r["t"] < after_t:
            continue
        bbox = r["hri"].get("bbox")
        if bbox is None:
            centered.append(False)
            area_ok.append(False)
            continue
        present += 1
        cx, cy, w, h = bbox
        centered.append(abs(cx - width / 2.0) <= 0.1 * width)
        frac = (w * h) / (width * height)
        area_ok.append(abs(frac - target_area_fraction) <= 0.3 * target_area_fraction)
    n = len(centered)
    return {
        "frames": n,
        "detected": present,
        "centered_fraction": float(np.mean(centered)) if n else 0.0,
        "area_ok_fraction": float(np.mean(area_ok)) if n else 0.0,
    }


def primitive_events(log_path, kind: str | None = None) -> list[dict]:
    out = []
    for r in _records(log_path):
        for e in r.get("events", []):
            if e.get("type") == "primitive" and (kind is None or e.get("kind") == kind):
                out.append({**e, "t": r["t"]})
    return out


def emitted_menu_actions(log_path) -> list[dict]:
    out = []
    for r in _records(log_path):
        for e in r.get("events", []):
            if e.get("type") == "menu_action":
                out.append({**e, "t": r["t"]})
    return out


def alarm_time(log_path) -> float | None:
    for r in _records(log_path):
        if r["power"]["alarm"]:
            return r["t"]
    return None


def first_event_time(log_path, event_type: str) -> float | None:
    for r in _records(log_path):
        for e in r.get("events", []):
            if e.get("type") == event_type:
                return r["t"]
    return None


def circle_radius(log_path, tail_fraction: float = 0.5) -> float:
    recs = _records(log_path)
    tail = recs[int(len(recs) * tail_fraction) :]
    speeds = [r["truth"]["v"][0] for r in tail]
    rates = [r["truth"]["w"][2] for r in tail]
    mean_rate = float(np.mean(rates))
    if abs(mean_rate) < 1e-9:
        return math.inf
    return float(np.mean(speeds)) / mean_rate


def standard_metrics(log_path) -> dict:
    recs = _records(log_path)
    if not recs:
        return {}
    out = {
        "records": len(recs),
        "terminal_speed": terminal_speed(log_path),
        "depth_drift": depth_drift(log_path),
        "final_t": recs[-1]["t"],
    }
    if any(e["status"] == "success" for e in primitive_events(log_path, "circle")):
        radius = circle_radius(log_path)
        out["circle_radius"] = radius if math.isfinite(radius) else None
    return out
