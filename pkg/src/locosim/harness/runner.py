"""The fixed-step scenario loop: the single authority over simulated time.

Per tick: drain inputs -> HRI/pilot produce a command -> mix -> power drain
-> dynamics step -> sensors -> estimation -> log at 10 Hz. The loop is
single-threaded; an attached bridge only exchanges data through two bounded
queues, so a run with an idle bridge logs byte-identically to a headless
one.

Command ownership: exactly one source (scripted, teleop, primitive, rcvm,
follower) holds the channel; every transition is logged. Teleop input goes
stale after 1 s (watchdog zeroes the thrusters); scripted commands persist.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import dynamics as dyn
from ..estimation import (
    DepthFilter,
    FilterDivergenceError,
    OdometryEstimate,
    dead_reckon_step,
    ekf_predict,
    ekf_update_accel,
    initial_estimate,
)
from ..hri.follower import DiverFollowState, FollowerGains, diver_follow_step
from ..hri.menu import InputEvent, MenuSession, parse_menu
from ..hri.rcvm import BUILTIN_SEQUENCES, RcvmPlayer
from ..pilot import (
    BusyError,
    Command,
    PrimitiveDriver,
    PrimitiveRequest,
    make_primitive,
    mix_to_thrusters,
)
from ..power import PowerState, drain_step
from ..sensors import (
    SensorStreams,
    depth_from_pressure,
    project_diver,
    sample_imu,
    sample_pressure,
)
from .logs import LogWriter, make_header, make_record, read_log
from .scenario import Scenario
from . import metrics as metrics_mod

logger = logging.getLogger(__name__)

TELEOP_STALE_S = 1.0
LOG_RATE_HZ = 10.0
IMU_RATE_HZ = 100.0
PRESSURE_RATE_HZ = 10.0
DETECTION_RATE_HZ = 10.0

DEFAULT_MENU = """
root: main
menus:
  main:
    label: LoCO Main
    items:
      - label: Turn 90
        action: {kind: service_call, target: pilot.turn_to, args: {target_yaw_deg: 90}}
      - label: Square
        action: {kind: service_call, target: pilot.square, args: {side_duration: 6.0, thrust_level: 0.4}}
      - label: Follow diver
        action: {kind: launch, target: follower.start}
      - label: Nod yes
        action: {kind: service_call, target: rcvm.affirmative}
      - label: Stop
        action: {kind: service_call, target: pilot.stop}
"""


@dataclass
class RunSummary:
    exit_reason: str
    ticks: int
    sim_time: float
    wall_time: float
    log_path: str | None
    final_truth: dict
    metrics: dict = field(default_factory=dict)
    primitive_results: list = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _every(rate_hz: float, dt: float) -> int:
    return max(1, int(round(1.0 / (rate_hz * dt))))


class SimSession:
    """All mutable run state; built from a Scenario, driven by run()."""

    def __init__(self, scenario: Scenario, log_path=None, bridge=None):
        self.scenario = scenario
        self.params = scenario.vehicle_params()
        self.noise = scenario.noise_spec()
        self.camera = scenario.camera_model()
        self.streams = SensorStreams(scenario.seed)
        self.state = scenario.initial_state()
        self.power = PowerState()
        # power-on alignment: the filter starts at the deployment attitude
        # (roll/pitch would converge from the accelerometer anyway; yaw has
        # no reference at all, so it is defined relative to startup)
        from dataclasses import replace as _replace

        self.est = _replace(initial_estimate(), orientation=self.state.orientation.copy())
        self.depth_filter = DepthFilter()
        self.odom = OdometryEstimate(position=self.state.position.copy())
        self.diver = scenario.diver_path()
        self.follower_gains = FollowerGains()

        menu_doc = scenario.menu
        if menu_doc:
            import yaml as _yaml

            self.menu = MenuSession(parse_menu(_yaml.safe_dump(menu_doc)))
        else:
            self.menu = MenuSession(parse_menu(DEFAULT_MENU))

        self.driver = PrimitiveDriver()
        self.rcvm: RcvmPlayer | None = None
        self.follow_state = DiverFollowState()
        self.owner = "none"  # none|scripted|teleop|primitive|rcvm|follower
        self.scripted_cmd = Command()
        self.teleop_cmd: Command | None = None
        self.teleop_at = -math.inf
        self.follower_cmd = Command()
        self.compute_load = scenario.compute_load
        self.powered_off = False
        self.menu_pending_kind: str | None = None  # what completion to watch

        self.last_detection = None
        self.last_cmd = Command()
        self.thrusters = dyn.ThrusterSet()
        self.events_pending: list[dict] = []
        self.stop_requested = False

        self.log_writer = (
            LogWriter(log_path, make_header(scenario.name, scenario.sha256(), scenario.seed, scenario.dt))
            if log_path
            else None
        )
        self.bridge = bridge
        self._last_menu_frame: list[str] | None = None

    # ------------------------------------------------------------ ownership

    def _transfer(self, new_owner: str, t: float, why: str):
        if new_owner == self.owner:
            return
        if self.owner == "primitive" and self.driver.active is not None:
            self.driver.cancel(t)
            self._note({"type": "primitive", "status": "preempted"})
        if self.owner == "rcvm" and self.rcvm is not None and self.rcvm.active:
            self.rcvm.cancel(t)
            self._note({"type": "rcvm", "status": "preempted"})
        self._note({"type": "ownership", "from": self.owner, "to": new_owner, "why": why})
        self.owner = new_owner

    def _note(self, event: dict):
        self.events_pending.append(event)

    # --------------------------------------------------------------- events

    def apply_event(self, kind: str, payload: dict, t: float, source: str):
        self._note({"type": "event", "kind": kind, "source": source})
        if kind == "set_command":
            self.scripted_cmd = Command(
                thrust=float(payload.get("thrust", 0.0)),
                pitch=float(payload.get("pitch", 0.0)),
                yaw=float(payload.get("yaw", 0.0)),
                timestamp=t,
            )
            self._transfer("scripted", t, source)
        elif kind == "teleop_command":
            self.teleop_cmd = Command(
                thrust=float(payload.get("thrust", 0.0)),
                pitch=float(payload.get("pitch", 0.0)),
                yaw=float(payload.get("yaw", 0.0)),
                timestamp=t,
            )
            self.teleop_at = t
            self._transfer("teleop", t, source)
        elif kind == "input":
            spec = payload.get("input", payload)
            event = InputEvent(
                kind=spec["kind"],
                value=spec.get("id", spec.get("token", spec.get("value"))),
                timestamp=t,
            )
            self._handle_menu_input(event, t)
        elif kind == "start_primitive":
            params = {k: v for k, v in payload.items() if k not in ("primitive", "tolerance", "timeout")}
            request = PrimitiveRequest(
                kind=payload["primitive"],
                parameters=params,
                tolerance=float(payload.get("tolerance", math.radians(5.0))),
                timeout=float(payload.get("timeout", 30.0)),
            )
            self._start_primitive(request, t, source)
        elif kind == "start_follower":
            self.follow_state = DiverFollowState()
            self.follower_cmd = Command()
            self._transfer("follower", t, source)
        elif kind == "stop_follower":
            if self.owner == "follower":
                self._transfer("none", t, source)
        elif kind == "start_rcvm":
            self._start_rcvm(payload.get("name", "affirmative"), t, source)
        elif kind == "power_profile":
            self.compute_load = payload["profile"]
        elif kind == "set_battery_charge":
            from dataclasses import replace as _replace

            frac = float(payload["fraction"])
            self.power = _replace(
                self.power,
                left=_replace(self.power.left, charge=frac * self.power.left.capacity),
                right=_replace(self.power.right, charge=frac * self.power.right.capacity),
            )
        elif kind == "stop":
            self.stop_requested = True

    def _start_primitive(self, request: PrimitiveRequest, t: float, source: str) -> bool:
        prim = make_primitive(request)
        if self.owner == "primitive" and self.driver.active is not None:
            self._note({"type": "error", "reason": "primitive busy"})
            return False
        self._transfer("primitive", t, source)
        try:
            self.driver.start(prim, t)
        except BusyError:
            self._note({"type": "error", "reason": "primitive busy"})
            return False
        self._note({"type": "primitive", "status": "started", "kind": request.kind})
        return True

    def _start_rcvm(self, name: str, t: float, source: str):
        seq = BUILTIN_SEQUENCES.get(name)
        if seq is None:
            self._note({"type": "error", "reason": f"unknown rcvm sequence {name!r}"})
            return
        self._transfer("rcvm", t, source)
        self.rcvm = RcvmPlayer(seq)
        self.rcvm.begin(t)
        self._note({"type": "rcvm", "status": "started", "name": name})

    def _handle_menu_input(self, event: InputEvent, t: float):
        was_executing = self.menu.state.phase == "executing"
        action = self.menu.handle_event(event)
        if event.kind == "cancel" and was_executing:
            # manual cancel of a menu-launched activity stops the motion too
            if self.owner in ("primitive", "rcvm", "follower"):
                self._transfer("none", t, "menu cancel")
            self.menu_pending_kind = None
        if action is None:
            return
        self._note(
            {
                "type": "menu_action",
                "kind": action.kind,
                "target": action.target,
                "args": action.args,
                "node": action.node,
                "index": action.index,
                "label": action.label,
            }
        )
        self._execute_menu_action(action, t)

    def _execute_menu_action(self, action, t: float):
        target = action.target
        if action.kind == "noop":
            self.menu.complete()
            return
        if action.kind == "set_param":
            if target == "log_level":
                logging.getLogger("locosim").setLevel(str(action.args.get("value", "info")).upper())
            self.menu.complete()
            return
        if target == "follower.start":
            self.apply_event("start_follower", {}, t, "menu")
            self.menu_pending_kind = "follower"
            return
        if target.startswith("rcvm."):
            self.apply_event("start_rcvm", {"name": target.split(".", 1)[1]}, t, "menu")
            self.menu_pending_kind = "rcvm"
            return
        if target.startswith("pilot."):
            kind = target.split(".", 1)[1]
            payload = dict(action.args)
            payload["primitive"] = kind
            if action.timeout:
                payload["timeout"] = action.timeout
            self.apply_event("start_primitive", payload, t, "menu")
            self.menu_pending_kind = "primitive"
            return
        # unknown targets complete immediately but are logged
        self._note({"type": "error", "reason": f"unbound menu target {target!r}"})
        self.menu.complete()

    # ----------------------------------------------------------- tick logic

    def command_for_tick(self, t: float) -> tuple[Command, str]:
        if self.powered_off:
            return Command(timestamp=t), "off"
        if self.owner == "scripted":
            return self.scripted_cmd, "scripted"
        if self.owner == "teleop":
            if self.teleop_cmd is None or t - self.teleop_at > TELEOP_STALE_S:
                return Command(timestamp=t), "teleop"  # watchdog zeroes stale teleop
            return self.teleop_cmd, "teleop"
        if self.owner == "primitive":
            cmd = self.driver.tick(t, self.est)
            if self.driver.active is None:
                result = self.driver.history[-1]
                self._note(
                    {
                        "type": "primitive",
                        "status": result.status,
                        "kind": result.kind,
                        "final_error": result.final_error,
                        "elapsed": result.elapsed,
                        "detail": _jsonable(result.detail),
                    }
                )
                if self.menu_pending_kind == "primitive":
                    self.menu.complete()
                    self.menu_pending_kind = None
                self._transfer("none", t, "primitive done")
            return (cmd or Command(timestamp=t)), "primitive"
        if self.owner == "rcvm":
            cmd = self.rcvm.update(t) if self.rcvm else Command(timestamp=t)
            if self.rcvm is not None and not self.rcvm.active:
                self._note({"type": "rcvm", "status": self.rcvm.result.status, "name": self.rcvm.result.name})
                if self.menu_pending_kind == "rcvm":
                    self.menu.complete()
                    self.menu_pending_kind = None
                self.rcvm = None
                self._transfer("none", t, "rcvm done")
                return cmd, "rcvm"  # the final zero command
            return cmd, "rcvm"
        if self.owner == "follower":
            return self.follower_cmd, "follower"
        return Command(timestamp=t), "none"

    def hri_snapshot(self) -> dict:
        bbox = None
        if self.last_detection is not None:
            b = self.last_detection.bbox
            bbox = [b.center_x, b.center_y, b.width, b.height]
        return {
            "owner": self.owner,
            "follow_mode": self.follow_state.mode,
            "menu_node": self.menu.state.node_name,
            "menu_phase": self.menu.state.phase,
            "bbox": bbox,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    return obj


def run_scenario(
    scenario: Scenario,
    log_path=None,
    bridge=None,
    realtime: bool = False,
    compute_metrics: bool = True,
) -> RunSummary:
    """Run a scenario to completion; returns the summary.

    Fatal integration/filter errors terminate the run with a diagnostic
    record in the log and a non-None summary.error.
    """
    session = SimSession(scenario, log_path=log_path, bridge=bridge)
    dt = scenario.dt
    n_ticks = int(round(scenario.duration / dt))
    imu_every = _every(IMU_RATE_HZ, dt)
    pressure_every = _every(PRESSURE_RATE_HZ, dt)
    detection_every = _every(DETECTION_RATE_HZ, dt)
    log_every = _every(LOG_RATE_HZ, dt)

    pending = list(scenario.events)
    exit_reason = "duration"
    error_text = None
    wall_start = time.perf_counter()
    t = 0.0

    try:
        for k in range(n_ticks):
            t = (k + 1) * dt

            # 1. scenario events due this tick, then bridge input
            while pending and pending[0].at <= t:
                ev = pending.pop(0)
                session.apply_event(ev.kind, ev.payload, t, "scenario")
            if bridge is not None:
                for kind, payload in bridge.drain_inbound():
                    session.apply_event(kind, payload, t, "bridge")

            session.menu.tick(t)

            # 2. command + mixing (power cut forces zero thrust)
            cmd, source = session.command_for_tick(t)
            session.last_cmd = cmd
            thrusters = mix_to_thrusters(cmd) if not session.powered_off else dyn.ThrusterSet()
            session.thrusters = thrusters

            # 3. power drain; a dead tube cuts the motors this same tick
            if not session.powered_off:
                session.power = drain_step(session.power, thrusters, session.compute_load, dt)
                if session.power.exhausted:
                    session.powered_off = True
                    session._note({"type": "power", "status": "exhausted"})
                    exit_reason = "power_exhausted"
                    thrusters = dyn.ThrusterSet()
                    session.thrusters = thrusters

            # 4. dynamics
            v_before = session.state.linear_velocity
            session.state = dyn.step(session.state, session.params, thrusters, dt)
            body_accel = (session.state.linear_velocity - v_before) / dt

            # 5. sensors + estimation (halted after power-off)
            if not session.powered_off:
                if (k + 1) % imu_every == 0:
                    imu = sample_imu(session.state, session.noise, session.streams.imu, body_accel=body_accel)
                    session.est = ekf_predict(session.est, imu, imu_every * dt)
                    session.est, _ = ekf_update_accel(session.est, imu)
                if (k + 1) % pressure_every == 0:
                    ps = sample_pressure(
                        session.state, session.params.fluid_density, session.noise, session.streams.pressure
                    )
                    session.depth_filter.update(
                        depth_from_pressure(ps, session.params.fluid_density), pressure_every * dt
                    )
                if session.diver is not None and (k + 1) % detection_every == 0:
                    det = project_diver(
                        session.state,
                        session.diver.position_at(t),
                        session.camera,
                        rng=session.streams.detection,
                        dropout_prob=session.noise.detection_dropout_prob,
                    )
                    session.last_detection = det
                    if session.owner == "follower":
                        session.follow_state, session.follower_cmd = diver_follow_step(
                            session.follow_state, det, session.follower_gains, detection_every * dt
                        )
                session.odom = dead_reckon_step(
                    session.odom,
                    thrusters,
                    session.params,
                    float(_yaw_of(session.est.orientation)),
                    dt,
                )

            # 6. menu frame changes are events too (replay re-emits them)
            frame = session.menu.render()
            if frame != session._last_menu_frame:
                session._last_menu_frame = frame
                session._note({"type": "menu_frame", "lines": frame})
                if bridge is not None:
                    bridge.push_menu_frame(frame, t)

            # 7. log record at 10 Hz with all events since the last one
            if (k + 1) % log_every == 0:
                record = make_record(
                    t,
                    session.state,
                    None if session.powered_off else session.est,
                    session.odom,
                    session.depth_filter.depth,
                    cmd,
                    source,
                    thrusters,
                    session.power,
                    session.hri_snapshot(),
                    _jsonable(session.events_pending),
                )
                session.events_pending = []
                if session.log_writer is not None:
                    session.log_writer.write(record)
                if bridge is not None:
                    bridge.push_state(record)

            if session.stop_requested:
                exit_reason = "stop"
                if (k + 1) % log_every != 0:
                    _flush_final_record(session, t, cmd, source, thrusters, bridge)
                break
            if session.powered_off and exit_reason == "power_exhausted":
                if (k + 1) % log_every != 0:
                    _flush_final_record(session, t, cmd, source, thrusters, bridge)
                break
            if realtime:
                lag = wall_start + t - time.perf_counter()
                if lag > 0:
                    time.sleep(lag)
    except (dyn.IntegrationError, FilterDivergenceError) as e:
        error_text = f"{type(e).__name__}: {e}"
        exit_reason = "fatal"
        if session.log_writer is not None:
            session.log_writer.write({"type": "diagnostic", "t": round(t, 6), "error": error_text})
        logger.error("run aborted: %s", error_text)
    finally:
        if session.log_writer is not None:
            session.log_writer.close()

    wall = time.perf_counter() - wall_start
    roll, pitch, yaw = _rpy(session.state.orientation)
    summary = RunSummary(
        exit_reason=exit_reason,
        ticks=int(round(t / dt)),
        sim_time=t,
        wall_time=wall,
        log_path=str(log_path) if log_path else None,
        final_truth={
            "position": [float(x) for x in session.state.position],
            "rpy": [roll, pitch, yaw],
            "speed": float(session.state.linear_velocity[0]),
            "depth": session.state.depth,
        },
        primitive_results=[r for r in session.driver.history],
        error=error_text,
    )
    if compute_metrics and log_path is not None and error_text is None:
        # acceptance metrics come from the file, never from live state
        summary.metrics = metrics_mod.standard_metrics(log_path)
    return summary


def _flush_final_record(session: SimSession, t: float, cmd, source, thrusters, bridge):
    """Terminal record for early exits so closing events reach the log."""
    record = make_record(
        t,
        session.state,
        None if session.powered_off else session.est,
        session.odom,
        session.depth_filter.depth,
        cmd,
        source,
        thrusters,
        session.power,
        session.hri_snapshot(),
        _jsonable(session.events_pending),
    )
    session.events_pending = []
    if session.log_writer is not None:
        session.log_writer.write(record)
    if bridge is not None:
        bridge.push_state(record)


def _yaw_of(q) -> float:
    from ..geometry import quat_to_euler

    return quat_to_euler(q)[2]


def _rpy(q):
    from ..geometry import quat_to_euler

    return quat_to_euler(q)
