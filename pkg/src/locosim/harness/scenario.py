"""Declarative scenarios: vehicle overrides, diver path, timed events.

A scenario is a plain YAML document; everything the run needs is inside it
(or resolvable at load time), so a scenario plus a seed fully determines a
run. See scenarios/ for working examples.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..dynamics import MAX_STEP_DT, RigidBodyState, VehicleParams, params_from_dict
from ..geometry import quat_from_euler
from ..sensors import NoiseSpec, PinholeCamera

EVENT_KINDS = (
    "set_command",
    "teleop_command",
    "input",
    "start_primitive",
    "start_follower",
    "stop_follower",
    "start_rcvm",
    "power_profile",
    "set_battery_charge",
    "stop",
)


@dataclass(frozen=True)
class ScenarioEvent:
    at: float
    kind: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.at < 0:
            raise ValueError("event time must be >= 0")


class DiverPath:
    """Piecewise-linear waypoint track; the diver stops at the last point."""

    def __init__(self, waypoints: list[dict]):
        if not waypoints:
            raise ValueError("diver path needs at least one waypoint")
        self.points = [np.asarray(w["position"], dtype=float) for w in waypoints]
        self.speeds = [float(w.get("speed", 0.0)) for w in waypoints]
        times = [0.0]
        for i in range(1, len(self.points)):
            dist = float(np.linalg.norm(self.points[i] - self.points[i - 1]))
            speed = self.speeds[i]
            if speed <= 0 and dist > 0:
                raise ValueError(f"waypoint {i}: positive speed required to move")
            times.append(times[-1] + (dist / speed if speed > 0 else 0.0))
        self.times = times

    def position_at(self, t: float) -> np.ndarray:
        if t <= 0 or len(self.points) == 1:
            return self.points[0]
        for i in range(1, len(self.points)):
            if t <= self.times[i]:
                seg = self.times[i] - self.times[i - 1]
                frac = 1.0 if seg == 0 else (t - self.times[i - 1]) / seg
                return self.points[i - 1] + frac * (self.points[i] - self.points[i - 1])
        return self.points[-1]


@dataclass(frozen=True)
class Scenario:
    name: str = "unnamed"
    duration: float = 10.0
    dt: float = 0.01
    seed: int = 0
    compute_load: str = "idle"
    vehicle: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    camera: dict = field(default_factory=dict)
    diver: list = field(default_factory=list)
    menu: dict = field(default_factory=dict)
    events: tuple = ()

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if not 0.0 < self.dt <= MAX_STEP_DT:
            raise ValueError(f"dt must be in (0, {MAX_STEP_DT}]")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        times = [e.at for e in self.events]
        if times != sorted(times):
            raise ValueError("events must be sorted by time")

    # -- derived objects ---------------------------------------------------

    def vehicle_params(self) -> VehicleParams:
        return params_from_dict(self.vehicle)

    def noise_spec(self) -> NoiseSpec:
        d = dict(self.noise)
        if d.pop("quiet", False):
            return NoiseSpec.quiet(seed=self.seed)
        bias = np.asarray(d.pop("gyro_bias", [0.0, 0.0, 0.0]), dtype=float)
        return NoiseSpec(gyro_bias=bias, seed=self.seed, **{k: float(v) for k, v in d.items()})

    def camera_model(self) -> PinholeCamera:
        d = self.camera
        return PinholeCamera(
            focal_px=float(d.get("focal_px", 400.0)),
            image_width=int(d.get("image_width", 800)),
            image_height=int(d.get("image_height", 600)),
        )

    def initial_state(self) -> RigidBodyState:
        d = self.initial
        pos = np.asarray(d.get("position", [0.0, 0.0, -2.0]), dtype=float)
        roll = math.radians(float(d.get("roll_deg", 0.0)))
        pitch = math.radians(float(d.get("pitch_deg", 0.0)))
        yaw = math.radians(float(d.get("yaw_deg", 0.0)))
        vel = np.asarray(d.get("velocity", [0.0, 0.0, 0.0]), dtype=float)
        return RigidBodyState(
            position=pos,
            orientation=quat_from_euler(roll, pitch, yaw),
            linear_velocity=vel,
        )

    def diver_path(self) -> DiverPath | None:
        return DiverPath(self.diver) if self.diver else None

    # -- identity ----------------------------------------------------------

    def canonical_dict(self) -> dict:
        return {
            "name": self.name,
            "duration": self.duration,
            "dt": self.dt,
            "seed": self.seed,
            "compute_load": self.compute_load,
            "vehicle": self.vehicle,
            "noise": self.noise,
            "initial": self.initial,
            "camera": self.camera,
            "diver": self.diver,
            "menu": self.menu,
            "events": [{"at": e.at, "kind": e.kind, "payload": e.payload} for e in self.events],
        }

    def sha256(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def with_overrides(self, dt: float | None = None, seed: int | None = None, duration: float | None = None) -> "Scenario":
        from dataclasses import replace

        changes = {}
        if dt is not None:
            changes["dt"] = dt
        if seed is not None:
            changes["seed"] = seed
        if duration is not None:
            changes["duration"] = duration
        return replace(self, **changes) if changes else self


def scenario_from_dict(raw: dict, base_dir: Path | None = None) -> Scenario:
    d = dict(raw or {})
    events = []
    for e in d.pop("events", []) or []:
        payload = {k: v for k, v in e.items() if k not in ("at", "kind")}
        if "do" in payload:  # nested form: {at: t, do: {kind: ..., ...}}
            do = payload.pop("do")
            kind = do.pop("kind")
            payload.update(do)
        else:
            kind = e["kind"]
            payload.pop("kind", None)
        events.append(ScenarioEvent(at=float(e["at"]), kind=kind, payload=payload))
    events.sort(key=lambda ev: ev.at)

    menu = d.pop("menu", {}) or {}
    menu_file = d.pop("menu_file", None)
    if menu_file:
        path = (base_dir / menu_file) if base_dir else Path(menu_file)
        menu = yaml.safe_load(path.read_text())

    diver = d.pop("diver", {}) or {}
    waypoints = diver.get("waypoints", []) if isinstance(diver, dict) else diver

    known = {
        "name": d.pop("name", "unnamed"),
        "duration": float(d.pop("duration", 10.0)),
        "dt": float(d.pop("dt", 0.01)),
        "seed": int(d.pop("seed", 0)),
        "compute_load": d.pop("compute_load", "idle"),
        "vehicle": d.pop("vehicle", {}) or {},
        "noise": d.pop("noise", {}) or {},
        "initial": d.pop("initial", {}) or {},
        "camera": d.pop("camera", {}) or {},
    }
    if d:
        raise ValueError(f"unknown scenario keys: {sorted(d)}")
    return Scenario(menu=menu, diver=waypoints, events=tuple(events), **known)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    raw = yaml.safe_load(path.read_text())
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: scenario document must be a mapping")
    return scenario_from_dict(raw, base_dir=path.parent)
