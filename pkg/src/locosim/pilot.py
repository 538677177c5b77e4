"""Motion control: validated commands, thruster mixing, PID, primitives.

Commands carry thrust/pitch/yaw in [-1, 1]. Mixing is differential on the
rear pair (left = thrust - yaw, right = thrust + yaw) so a positive yaw
command yields a nose-left torque, and the vertical thruster takes pitch
directly (nose-up positive, since it sits ahead of the CoM).

Primitives are tick-driven controllers: the simulation loop calls
``update(t, estimate)`` once per tick and reads ``result`` when they
finish. At most one primitive may own the command channel at a time;
``PrimitiveDriver`` enforces that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .estimation import OrientationEstimate
from .dynamics import PWM_DEADBAND, ThrusterSet
from .geometry import quat_to_euler, wrap_angle

DEFAULT_TOLERANCE = math.radians(5.0)
DEFAULT_HOLD_TIME = 1.0  # s inside tolerance before a turn counts as done
ESTIMATE_STALE_LIMIT = 1.0  # s without a fresh estimate aborts a primitive


def deadband_compensate(out: float, deadband: float = PWM_DEADBAND) -> float:
    """Map a controller output past the ESC dead-band, linearizing thrust."""
    if out == 0.0:
        return 0.0
    return math.copysign(deadband + abs(out) * (1.0 - deadband), out)


class BusyError(RuntimeError):
    """A primitive was requested while another one is still active."""


def _clamp(v: float, limit: float = 1.0) -> float:
    return min(limit, max(-limit, v))


@dataclass(frozen=True)
class Command:
    thrust: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    timestamp: float = 0.0

    def __post_init__(self):
        for name in ("thrust", "pitch", "yaw"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [-1, 1]")


ZERO_COMMAND = Command()


def mix_to_thrusters(cmd: Command) -> ThrusterSet:
    return ThrusterSet(
        left=_clamp(cmd.thrust - cmd.yaw),
        right=_clamp(cmd.thrust + cmd.yaw),
        vertical=_clamp(cmd.pitch),
    )


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = 1.0
    output_limit: float = 1.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("gains must be >= 0")
        if self.integral_limit <= 0 or self.output_limit <= 0:
            raise ValueError("limits must be > 0")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float | None = None


def pid_step(gains: PidGains, error: float, dt: float, state: PidState) -> tuple[float, PidState]:
    """One PID update with integral clamping and derivative on error."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    integral = _clamp(state.integral + error * dt, gains.integral_limit)
    derivative = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    out = _clamp(gains.kp * error + gains.ki * integral + gains.kd * derivative, gains.output_limit)
    return out, PidState(integral=integral, prev_error=error)


# yaw PID acts on the wrapped error normalized by pi
TURN_GAINS = PidGains(kp=1.2, ki=0.05, kd=0.3)


@dataclass(frozen=True)
class PrimitiveResult:
    kind: str
    status: str  # success | timeout | aborted | preempted
    final_error: float = 0.0  # rad for turns
    elapsed: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == "success"


class Primitive:
    """Base tick-driven primitive; subclasses fill in _step()."""

    kind = "primitive"

    def __init__(self):
        self._t0: float | None = None
        self.result: PrimitiveResult | None = None

    @property
    def active(self) -> bool:
        return self.result is None

    def begin(self, t: float):
        self._t0 = t

    def elapsed(self, t: float) -> float:
        return t - (self._t0 if self._t0 is not None else t)

    def _finish(self, t: float, status: str, final_error: float = 0.0, **detail) -> Command:
        self.result = PrimitiveResult(
            kind=self.kind,
            status=status,
            final_error=final_error,
            elapsed=self.elapsed(t),
            detail=detail,
        )
        return Command(timestamp=t)

    def abort(self, t: float, reason: str = "aborted") -> Command:
        return self._finish(t, reason)

    def update(self, t: float, est: OrientationEstimate | None) -> Command:
        if self._t0 is None:
            self.begin(t)
        if self.result is not None:
            return Command(timestamp=t)
        return self._step(t, est)

    def _step(self, t: float, est: OrientationEstimate | None) -> Command:
        raise NotImplementedError


def _estimate_yaw(est: OrientationEstimate) -> float:
    return quat_to_euler(est.orientation)[2]


class TurnTo(Primitive):
    """Closed-loop yaw turn to an absolute heading (shortest path)."""

    kind = "turn_to"

    def __init__(
        self,
        target_yaw: float,
        gains: PidGains = TURN_GAINS,
        tolerance: float = DEFAULT_TOLERANCE,
        hold_time: float = DEFAULT_HOLD_TIME,
        timeout: float = 30.0,
        rate_tolerance: float = math.radians(2.0),
    ):
        super().__init__()
        if timeout <= 0 or tolerance <= 0:
            raise ValueError("timeout and tolerance must be > 0")
        self.target_yaw = target_yaw
        self.gains = gains
        self.tolerance = tolerance
        self.hold_time = hold_time
        self.timeout = timeout
        self.rate_tolerance = rate_tolerance
        self._pid = PidState()
        self._hold_since: float | None = None
        self._prev: tuple[float, float] | None = None  # (t, yaw)

    def _step(self, t: float, est: OrientationEstimate | None) -> Command:
        if est is None or t - est.timestamp > ESTIMATE_STALE_LIMIT:
            return self.abort(t, "aborted")
        yaw = _estimate_yaw(est)
        error = wrap_angle(self.target_yaw - yaw)

        # yaw rate from successive estimates: success requires the vehicle
        # settled, not just passing through the tolerance band
        rate = None
        dt = 0.01
        if self._prev is not None and t > self._prev[0]:
            dt = t - self._prev[0]
            rate = wrap_angle(yaw - self._prev[1]) / dt
        self._prev = (t, yaw)

        settled = abs(error) < self.tolerance and rate is not None and abs(rate) < self.rate_tolerance
        if settled:
            if self._hold_since is None:
                self._hold_since = t
            if t - self._hold_since >= self.hold_time:
                return self._finish(t, "success", final_error=error)
        else:
            self._hold_since = None
        if self.elapsed(t) > self.timeout:
            return self._finish(t, "timeout", final_error=error)

        out, self._pid = pid_step(self.gains, error / math.pi, max(dt, 1e-6), self._pid)
        return Command(yaw=deadband_compensate(out), timestamp=t)


class MoveTimed(Primitive):
    """Constant surge thrust for a fixed duration.

    With hold_heading set, a yaw PID keeps the leg straight; otherwise the
    move is open loop.
    """

    kind = "move_timed"

    def __init__(
        self,
        duration: float,
        thrust_level: float,
        hold_heading: float | None = None,
        gains: PidGains = TURN_GAINS,
    ):
        super().__init__()
        if duration <= 0:
            raise ValueError("duration must be > 0")
        self.duration = duration
        self.thrust_level = _clamp(thrust_level)
        self.hold_heading = hold_heading
        self.gains = gains
        self._pid = PidState()
        self._prev_t: float | None = None

    def _step(self, t: float, est) -> Command:
        if self.elapsed(t) >= self.duration:
            return self._finish(t, "success")
        yaw_out = 0.0
        if self.hold_heading is not None and est is not None:
            dt = t - self._prev_t if self._prev_t is not None else 0.01
            self._prev_t = t
            error = wrap_angle(self.hold_heading - _estimate_yaw(est))
            out, self._pid = pid_step(self.gains, error / math.pi, max(dt, 1e-6), self._pid)
            yaw_out = deadband_compensate(out)
        return Command(thrust=self.thrust_level, yaw=yaw_out, timestamp=t)


class Square(Primitive):
    """Four legs of (timed move, +90 deg turn); corners chain absolutely."""

    kind = "square"

    def __init__(
        self,
        side_duration: float,
        thrust_level: float,
        gains: PidGains = TURN_GAINS,
        tolerance: float = DEFAULT_TOLERANCE,
        turn_timeout: float = 20.0,
    ):
        super().__init__()
        if side_duration <= 0:
            raise ValueError("side_duration must be > 0")
        self.side_duration = side_duration
        self.thrust_level = thrust_level
        self.gains = gains
        self.tolerance = tolerance
        self.turn_timeout = turn_timeout
        self._phase: Primitive | None = None
        self._leg = 0  # 0..7: even = move, odd = turn
        self._start_yaw: float | None = None
        self._yaw_before_turn: float | None = None
        self.corners: list[dict] = []

    def _next_phase(self, t: float, est: OrientationEstimate | None) -> Primitive | None:
        if self._leg >= 8:
            return None
        if self._leg % 2 == 0:
            heading = wrap_angle(self._start_yaw + (self._leg // 2) * math.pi / 2.0)
            phase = MoveTimed(self.side_duration, self.thrust_level, hold_heading=heading, gains=self.gains)
        else:
            corner = self._leg // 2 + 1
            target = wrap_angle(self._start_yaw + corner * math.pi / 2.0)
            self._yaw_before_turn = _estimate_yaw(est) if est else None
            phase = TurnTo(target, self.gains, self.tolerance, timeout=self.turn_timeout)
        phase.begin(t)
        return phase

    def _step(self, t: float, est: OrientationEstimate | None) -> Command:
        if est is None or t - est.timestamp > ESTIMATE_STALE_LIMIT:
            return self.abort(t, "aborted")
        if self._start_yaw is None:
            self._start_yaw = _estimate_yaw(est)
        if self._phase is None:
            self._phase = self._next_phase(t, est)
        cmd = self._phase.update(t, est)
        res = self._phase.result
        if res is not None:
            if isinstance(self._phase, TurnTo):
                achieved = _estimate_yaw(est)
                self.corners.append(
                    {
                        "target": self._phase.target_yaw,
                        "achieved": achieved,
                        "turn": wrap_angle(achieved - self._yaw_before_turn)
                        if self._yaw_before_turn is not None
                        else None,
                        "final_error": res.final_error,
                        "status": res.status,
                    }
                )
            if not res.success:
                return self._finish(t, res.status, final_error=res.final_error, corners=self.corners)
            self._leg += 1
            self._phase = self._next_phase(t, est)
            if self._phase is None:
                final_err = wrap_angle(_estimate_yaw(est) - self._start_yaw)
                return self._finish(t, "success", final_error=final_err, corners=self.corners)
        return cmd


class Circle(Primitive):
    """Constant thrust plus constant yaw bias for a fixed duration."""

    kind = "circle"

    def __init__(self, thrust_level: float, yaw_bias: float, duration: float):
        super().__init__()
        if duration <= 0:
            raise ValueError("duration must be > 0")
        self.thrust_level = _clamp(thrust_level)
        self.yaw_bias = _clamp(yaw_bias)
        self.duration = duration

    def _step(self, t: float, est) -> Command:
        if self.elapsed(t) >= self.duration:
            return self._finish(t, "success")
        return Command(thrust=self.thrust_level, yaw=self.yaw_bias, timestamp=t)


class Stop(Primitive):
    """Emit one zero command and finish."""

    kind = "stop"

    def _step(self, t: float, est) -> Command:
        return self._finish(t, "success")


@dataclass(frozen=True)
class PrimitiveRequest:
    """Declarative primitive description (scenario files, bridge messages)."""

    kind: str
    parameters: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE
    timeout: float = 30.0

    def __post_init__(self):
        if self.timeout <= 0 or self.tolerance <= 0:
            raise ValueError("timeout and tolerance must be > 0")
        if self.kind not in ("turn_to", "move_timed", "square", "circle", "stop"):
            raise ValueError(f"unknown primitive kind {self.kind!r}")


def make_primitive(request: PrimitiveRequest, gains: PidGains = TURN_GAINS) -> Primitive:
    p = request.parameters
    if request.kind == "turn_to":
        if "target_yaw_deg" in p:
            target = math.radians(float(p["target_yaw_deg"]))
        else:
            target = float(p["target_yaw"])
        return TurnTo(target, gains, request.tolerance, timeout=request.timeout)
    if request.kind == "move_timed":
        return MoveTimed(float(p["duration"]), float(p.get("thrust_level", 0.5)))
    if request.kind == "square":
        return Square(
            float(p["side_duration"]),
            float(p.get("thrust_level", 0.4)),
            gains,
            request.tolerance,
            turn_timeout=request.timeout,
        )
    if request.kind == "circle":
        return Circle(float(p.get("thrust_level", 0.4)), float(p.get("yaw_bias", 0.4)), float(p["duration"]))
    return Stop()


class PrimitiveDriver:
    """Owns the single active primitive; a second start raises BusyError."""

    def __init__(self):
        self.active: Primitive | None = None
        self.history: list[PrimitiveResult] = []

    def start(self, primitive: Primitive, t: float):
        if self.active is not None and self.active.active:
            raise BusyError(f"{self.active.kind} still active")
        primitive.begin(t)
        self.active = primitive

    def cancel(self, t: float) -> Command | None:
        if self.active is None:
            return None
        cmd = self.active.abort(t, "preempted")
        self.history.append(self.active.result)
        self.active = None
        return cmd

    def tick(self, t: float, est: OrientationEstimate | None) -> Command | None:
        if self.active is None:
            return None
        cmd = self.active.update(t, est)
        if self.active.result is not None:
            self.history.append(self.active.result)
            self.active = None
        return cmd
