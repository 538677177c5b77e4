"""Battery packs, draw model, low-voltage alarm, and endurance runs.

Two tubes, each with two 8 Ah lithium-polymer packs in parallel (16 Ah per
tube, 32 Ah total), supplying 9.6-12.6 V depending on charge with a linear
voltage curve. A latching alarm fires when either tube crosses the 9.6 V
minimum threshold; on exhaustion the vehicle powers off.

Draw is electronics plus thrusters. The numbers are calibrated backward
from the vehicle's measured endurance table (idle 18 h 30 min, average
2 h 20 min, max thrust 30 min on 32 Ah) rather than from component
datasheets; `endurance_run` reproduces those rows exactly by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .dynamics import MAX_THRUST_N, PWM_DEADBAND, ThrustCurve, ThrusterSet, thrust_from_pwm

CAPACITY_PER_TUBE_AH = 16.0  # two 8000 mAh packs in parallel
VOLTAGE_FULL = 12.6
VOLTAGE_EMPTY = 9.6
ALARM_THRESHOLD_V = 9.6

# Endurance rows: 32 Ah over 18.5 h / (7/3) h / 0.5 h.
IDLE_TOTAL_DRAW_A = 32.0 / 18.5  # = 1.7297...
AVERAGE_TOTAL_DRAW_A = 32.0 / (7.0 / 3.0)  # = 13.714...
MAX_TOTAL_DRAW_A = 32.0 / 0.5  # = 64.0

# Electronics scale with compute load (idle baseline, inference ramps up).
COMPUTE_FACTORS = {"idle": 1.0, "average": 2.0, "max": 4.0}
IDLE_DRAW_A = IDLE_TOTAL_DRAW_A
# Max row: max compute + all three thrusters at full.
THRUSTER_FULL_DRAW_A = (MAX_TOTAL_DRAW_A - COMPUTE_FACTORS["max"] * IDLE_DRAW_A) / 3.0
# Average row: average compute + two rear thrusters at a cruise setting.
_AVG_THRUSTER_TOTAL_A = AVERAGE_TOTAL_DRAW_A - COMPUTE_FACTORS["average"] * IDLE_DRAW_A
_AVG_THRUST_EACH_N = _AVG_THRUSTER_TOTAL_A / 2.0 / THRUSTER_FULL_DRAW_A * MAX_THRUST_N
AVERAGE_CRUISE_PWM = PWM_DEADBAND + _AVG_THRUST_EACH_N / MAX_THRUST_N * (1.0 - PWM_DEADBAND)


@dataclass(frozen=True)
class BatteryPack:
    tube: str  # "left" | "right"
    capacity: float = CAPACITY_PER_TUBE_AH  # Ah
    charge: float = CAPACITY_PER_TUBE_AH  # Ah remaining
    voltage_full: float = VOLTAGE_FULL
    voltage_empty: float = VOLTAGE_EMPTY

    def __post_init__(self):
        if not 0.0 <= self.charge <= self.capacity:
            raise ValueError("charge must be within [0, capacity]")
        if self.voltage_empty >= self.voltage_full:
            raise ValueError("voltage_empty must be below voltage_full")


def voltage_of_charge(pack: BatteryPack) -> float:
    """Linear map: empty -> 9.6 V, full -> 12.6 V."""
    frac = pack.charge / pack.capacity
    return pack.voltage_empty + frac * (pack.voltage_full - pack.voltage_empty)


@dataclass(frozen=True)
class PowerParams:
    idle_draw: float = IDLE_DRAW_A  # A, electronics baseline at idle compute
    thruster_full_draw: float = THRUSTER_FULL_DRAW_A  # A per thruster at full
    compute_factors: dict = field(default_factory=lambda: dict(COMPUTE_FACTORS))
    thrust_curve: ThrustCurve = field(default_factory=ThrustCurve.symmetric)
    alarm_threshold: float = ALARM_THRESHOLD_V
    load_share: float = 0.5  # fraction of total draw on the left tube


def thruster_draw(params: PowerParams, pwm: float) -> float:
    """Per-thruster current, proportional to thrust magnitude."""
    force = abs(thrust_from_pwm(params.thrust_curve, pwm))
    full = abs(thrust_from_pwm(params.thrust_curve, 1.0))
    if full == 0.0:
        return 0.0
    return params.thruster_full_draw * force / full


@dataclass(frozen=True)
class PowerState:
    left: BatteryPack = field(default_factory=lambda: BatteryPack("left"))
    right: BatteryPack = field(default_factory=lambda: BatteryPack("right"))
    alarm_active: bool = False
    params: PowerParams = field(default_factory=PowerParams)

    @property
    def packs(self) -> tuple[BatteryPack, BatteryPack]:
        return (self.left, self.right)

    @property
    def exhausted(self) -> bool:
        return self.left.charge <= 0.0 or self.right.charge <= 0.0

    @property
    def voltages(self) -> tuple[float, float]:
        return (voltage_of_charge(self.left), voltage_of_charge(self.right))

    def reset_alarm(self) -> "PowerState":
        return replace(self, alarm_active=False)


def total_draw(state: PowerState, thrusters: ThrusterSet, compute_load: str) -> float:
    """Amps drawn from both tubes combined for one tick."""
    params = state.params
    try:
        factor = params.compute_factors[compute_load]
    except KeyError:
        raise ValueError(f"unknown compute load {compute_load!r}") from None
    draw = params.idle_draw * factor
    for pwm in (thrusters.left, thrusters.right, thrusters.vertical):
        draw += thruster_draw(params, pwm)
    return draw


def drain_step(state: PowerState, thrusters: ThrusterSet, compute_load: str, dt: float) -> PowerState:
    """Drain both tubes by their load share; latch the alarm on crossing."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    draw = total_draw(state, thrusters, compute_load)
    ah = draw * dt / 3600.0
    share = state.params.load_share
    left = replace(state.left, charge=max(0.0, state.left.charge - ah * share))
    right = replace(state.right, charge=max(0.0, state.right.charge - ah * (1.0 - share)))
    threshold = state.params.alarm_threshold
    crossed = voltage_of_charge(left) <= threshold or voltage_of_charge(right) <= threshold
    return replace(state, left=left, right=right, alarm_active=state.alarm_active or crossed)


PROFILE_THRUSTERS = {
    "idle": ThrusterSet(0.0, 0.0, 0.0),
    "average": ThrusterSet(AVERAGE_CRUISE_PWM, AVERAGE_CRUISE_PWM, 0.0),
    "max": ThrusterSet(1.0, 1.0, 1.0),
}


def endurance_run(profile: str, state: PowerState | None = None, dt: float = 1.0) -> dict:
    """Fast-forward a canonical draw profile until exhaustion.

    Returns {"seconds": time-to-exhaustion, "alarm_at": first alarm time,
    "draw": steady total draw in A}.
    """
    if profile not in PROFILE_THRUSTERS:
        raise ValueError(f"unknown profile {profile!r}")
    state = state or PowerState()
    thrusters = PROFILE_THRUSTERS[profile]
    draw = total_draw(state, thrusters, profile)
    t = 0.0
    alarm_at = None
    share = state.params.load_share
    limit = 1.05 * 3600.0 * 32.0 / draw  # safety stop just past the expected time
    while not state.exhausted:
        # take a fractional final step so the exhaustion time is exact,
        # not quantized up by one dt
        ah = draw * dt / 3600.0
        ticks_left = min(
            state.left.charge / (ah * share) if share > 0 else math.inf,
            state.right.charge / (ah * (1.0 - share)) if share < 1 else math.inf,
        )
        step_dt = dt if ticks_left > 1.0 else max(ticks_left * dt, 1e-9)
        state = drain_step(state, thrusters, profile, step_dt)
        t += step_dt
        if alarm_at is None and state.alarm_active:
            alarm_at = t
        if t > limit:
            raise RuntimeError(f"endurance run for {profile!r} failed to exhaust")
    return {"seconds": t, "alarm_at": alarm_at, "draw": draw, "state": state}
