"""Ground-truth 6-DOF rigid-body model of the vehicle.

Force model, all in the body frame of `geometry`:

* three fixed thrusters (left rear +x, right rear +x, vertical +z), each
  mapped from a normalized PWM command through a monotone piecewise-linear
  thrust curve with a dead-band around zero;
* weight at the center of mass and buoyancy at the geometric center, so a
  CoM offset below center gives passive roll/pitch restoring torque;
* quadratic drag, one coefficient per body axis (surge, sway, heave, roll,
  pitch, yaw): F_i = -c_i * v_i * |v_i|.

Integration is semi-implicit Euler about the center of mass: velocities
first from the wrench, then pose from the new velocities. Everything is
pure float64 arithmetic, so identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import cross3, quat_from_rotvec, quat_multiply, quat_normalize, quat_rotate, quat_rotate_inverse

# Vehicle geometry and calibration defaults. Hull dimensions and mass are
# the production vehicle's; the thrust endpoint is the vendor datasheet
# value at nominal voltage and the surge drag coefficient comes out of
# calibrate_drag() on the max-speed run (two thrusters, 1.5 m/s).
HULL_DIMENSIONS_M = (0.731, 0.344, 0.141)  # length, width, height
MASS_KG = 12.47
MAX_THRUST_N = 23.13  # per thruster, full forward PWM
PWM_DEADBAND = 0.06
SURGE_DRAG = 2.0 * MAX_THRUST_N / 1.5**2  # = 20.56 N s^2/m^2
GRAVITY = 9.80665  # m/s^2
FRESH_WATER_DENSITY = 1000.0  # kg/m^3; use 1025 for seawater

MAX_STEP_DT = 0.1  # s; the semi-implicit scheme is untested beyond this


class IntegrationError(RuntimeError):
    """A step produced a non-finite quantity; message names the offender."""


def box_inertia(mass: float, dims: tuple[float, float, float]) -> np.ndarray:
    """Principal moments of a uniform box (length, width, height)."""
    length, width, height = dims
    return (mass / 12.0) * np.array(
        [
            width**2 + height**2,
            length**2 + height**2,
            length**2 + width**2,
        ]
    )


@dataclass(frozen=True)
class ThrustCurve:
    """Piecewise-linear PWM [-1, 1] -> Newtons, non-decreasing, zero at 0."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = self.points
        if len(pts) < 2:
            raise ValueError("thrust curve needs at least two knots")
        pwms = [p for p, _ in pts]
        if pwms != sorted(pwms) or len(set(pwms)) != len(pwms):
            raise ValueError("thrust curve knots must be strictly increasing in pwm")
        if pwms[0] > -1.0 + 1e-12 or pwms[-1] < 1.0 - 1e-12:
            raise ValueError("thrust curve must cover pwm in [-1, 1]")
        forces = [f for _, f in pts]
        if any(b < a - 1e-12 for a, b in zip(forces, forces[1:])):
            raise ValueError("thrust curve must be non-decreasing")
        if abs(self(0.0)) > 1e-12:
            raise ValueError("thrust curve must map pwm 0 to 0 N")

    def __call__(self, pwm: float) -> float:
        return thrust_from_pwm(self, pwm)

    @classmethod
    def symmetric(cls, max_thrust: float = MAX_THRUST_N, deadband: float = PWM_DEADBAND) -> "ThrustCurve":
        if not 0.0 <= deadband < 1.0:
            raise ValueError("deadband must be in [0, 1)")
        if deadband == 0.0:
            return cls(((-1.0, -max_thrust), (0.0, 0.0), (1.0, max_thrust)))
        return cls(
            (
                (-1.0, -max_thrust),
                (-deadband, 0.0),
                (deadband, 0.0),
                (1.0, max_thrust),
            )
        )


def thrust_from_pwm(curve: ThrustCurve, pwm: float) -> float:
    """Linear interpolation on the curve; callers clamp before calling."""
    if not -1.0 <= pwm <= 1.0:
        raise ValueError(f"pwm {pwm} outside [-1, 1]; clamp before calling")
    pts = curve.points
    for (p0, f0), (p1, f1) in zip(pts, pts[1:]):
        if pwm <= p1:
            return f0 + (f1 - f0) * (pwm - p0) / (p1 - p0)
    return pts[-1][1]


@dataclass(frozen=True)
class Thruster:
    position: np.ndarray  # m, body frame, relative to geometric center
    axis: np.ndarray  # unit vector, body frame


@dataclass(frozen=True)
class DragCoeffs:
    """Quadratic coefficients, N s^2/m^2 linear and N m s^2/rad^2 angular."""

    surge: float = SURGE_DRAG
    sway: float = 2.0 * SURGE_DRAG  # uncalibrated default: bluffer than surge
    heave: float = 2.0 * SURGE_DRAG  # uncalibrated default
    roll: float = 0.5  # uncalibrated default
    pitch: float = 2.0  # uncalibrated default
    yaw: float = 3.54  # sized for ~1.5 rad/s max differential yaw rate

    def linear(self) -> np.ndarray:
        return np.array([self.surge, self.sway, self.heave])

    def angular(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw])


def _default_thrusters() -> tuple[Thruster, Thruster, Thruster]:
    length, width, _ = HULL_DIMENSIONS_M
    # Rear thrusters sit at the CoM height so pure surge produces no pitch
    # moment; the vertical thruster is just ahead of the CoM.
    z = -0.01
    return (
        Thruster(np.array([-length / 2, width / 2, z]), np.array([1.0, 0.0, 0.0])),
        Thruster(np.array([-length / 2, -width / 2, z]), np.array([1.0, 0.0, 0.0])),
        Thruster(np.array([0.05, 0.0, z]), np.array([0.0, 0.0, 1.0])),
    )


@dataclass(frozen=True)
class VehicleParams:
    mass: float = MASS_KG  # kg
    inertia_diag: np.ndarray = field(default_factory=lambda: box_inertia(MASS_KG, HULL_DIMENSIONS_M))
    displaced_volume: float | None = None  # m^3; None -> neutrally buoyant
    com_offset: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -0.01]))  # m, CoM below center
    thrusters: tuple[Thruster, Thruster, Thruster] = field(default_factory=_default_thrusters)
    thrust_curve: ThrustCurve = field(default_factory=ThrustCurve.symmetric)
    drag: DragCoeffs = field(default_factory=DragCoeffs)
    fluid_density: float = FRESH_WATER_DENSITY  # kg/m^3
    gravity: float = GRAVITY  # m/s^2

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.fluid_density <= 0:
            raise ValueError("fluid_density must be positive")
        if np.any(np.asarray(self.inertia_diag) <= 0):
            raise ValueError("all inertia entries must be positive")
        if self.displaced_volume is not None and self.displaced_volume <= 0:
            raise ValueError("displaced_volume must be positive")
        if len(self.thrusters) != 3:
            raise ValueError("exactly three thrusters: left rear, right rear, vertical")
        for thr, want in zip(self.thrusters, ([1.0, 0, 0], [1.0, 0, 0], [0, 0, 1.0])):
            if abs(np.linalg.norm(thr.axis) - 1.0) > 1e-9:
                raise ValueError("thruster axes must be unit vectors")
            if not np.allclose(thr.axis, want):
                raise ValueError("thruster axes must be (+x, +x, +z) in (left, right, vertical) order")
        # Hot-path precomputation: levers about the CoM and drag vectors.
        object.__setattr__(self, "_levers", np.array([t.position - self.com_offset for t in self.thrusters]))
        object.__setattr__(self, "_axes", np.array([t.axis for t in self.thrusters]))
        object.__setattr__(self, "_drag_lin", self.drag.linear())
        object.__setattr__(self, "_drag_ang", self.drag.angular())
        object.__setattr__(self, "_inertia", np.asarray(self.inertia_diag, dtype=float))

    @property
    def volume(self) -> float:
        """Displaced volume, defaulting to neutral buoyancy."""
        if self.displaced_volume is not None:
            return self.displaced_volume
        return self.mass / self.fluid_density

    @property
    def weight(self) -> float:
        return self.mass * self.gravity  # N

    @property
    def buoyancy(self) -> float:
        if self.displaced_volume is None:
            return self.weight  # ballasted neutral: cancels weight exactly
        return self.fluid_density * self.gravity * self.displaced_volume  # N


@dataclass(frozen=True)
class ThrusterSet:
    """Normalized PWM per thruster, order (left, right, vertical)."""

    left: float = 0.0
    right: float = 0.0
    vertical: float = 0.0

    def __post_init__(self):
        for name in ("left", "right", "vertical"):
            v = getattr(self, name)
            object.__setattr__(self, name, min(1.0, max(-1.0, float(v))))

    def as_array(self) -> np.ndarray:
        return np.array([self.left, self.right, self.vertical])


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray  # N, body frame
    torque: np.ndarray  # N m, body frame, about the CoM


@dataclass(frozen=True)
class RigidBodyState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m, world, CoM
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    linear_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m/s, body
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))  # rad/s, body
    time: float = 0.0  # s since scenario start

    @property
    def depth(self) -> float:
        """Meters below the surface (world z = 0); negative above it."""
        return -float(self.position[2])


def compute_wrench(state: RigidBodyState, params: VehicleParams, thrusters: ThrusterSet) -> Wrench:
    """Total body-frame force/torque about the CoM for the current state."""
    curve = params.thrust_curve
    mags = np.array(
        [
            thrust_from_pwm(curve, thrusters.left),
            thrust_from_pwm(curve, thrusters.right),
            thrust_from_pwm(curve, thrusters.vertical),
        ]
    )
    f_thr = mags[:, None] * params._axes
    force = f_thr.sum(axis=0)
    levers = params._levers
    torque = np.array(
        [
            levers[:, 1] @ f_thr[:, 2] - levers[:, 2] @ f_thr[:, 1],
            levers[:, 2] @ f_thr[:, 0] - levers[:, 0] @ f_thr[:, 2],
            levers[:, 0] @ f_thr[:, 1] - levers[:, 1] @ f_thr[:, 0],
        ]
    )

    # Weight acts at the CoM (no torque); buoyancy at the geometric center,
    # whose lever about the CoM is -com_offset.
    up_body = quat_rotate_inverse(state.orientation, np.array([0.0, 0.0, 1.0]))
    force += (params.buoyancy - params.weight) * up_body
    torque += cross3(-params.com_offset, params.buoyancy * up_body)

    v = state.linear_velocity
    w = state.angular_velocity
    force -= params._drag_lin * v * np.abs(v)
    torque -= params._drag_ang * w * np.abs(w)

    return Wrench(force=force, torque=torque)


def _raise_nonfinite(t: float, **quantities: np.ndarray):
    for name, value in quantities.items():
        if not np.all(np.isfinite(value)):
            raise IntegrationError(f"non-finite {name} after step at t={t:.3f}")
    raise IntegrationError(f"state overflow after step at t={t:.3f}")


def step(state: RigidBodyState, params: VehicleParams, thrusters: ThrusterSet, dt: float) -> RigidBodyState:
    """One semi-implicit Euler step; raises IntegrationError on non-finite."""
    if not 0.0 < dt <= MAX_STEP_DT:
        raise ValueError(f"dt must be in (0, {MAX_STEP_DT}] s, got {dt}")

    wrench = compute_wrench(state, params, thrusters)
    inertia = params._inertia

    v_new = state.linear_velocity + (wrench.force / params.mass) * dt
    w_old = state.angular_velocity
    gyro = cross3(w_old, inertia * w_old)
    w_new = w_old + (wrench.torque - gyro) / inertia * dt
    if not math.isfinite(float(v_new.sum()) + float(w_new.sum())):
        _raise_nonfinite(state.time + dt, linear_velocity=v_new, angular_velocity=w_new)

    pos_new = state.position + quat_rotate(state.orientation, v_new) * dt
    q_new = quat_normalize(quat_multiply(state.orientation, quat_from_rotvec(w_new * dt)))
    if not math.isfinite(float(pos_new.sum()) + float(q_new.sum())):
        _raise_nonfinite(state.time + dt, position=pos_new, orientation=q_new)

    return RigidBodyState(
        position=pos_new,
        orientation=q_new,
        linear_velocity=v_new,
        angular_velocity=w_new,
        time=state.time + dt,
    )


def calibrate_drag(thrust_total: float, steady_speed: float) -> float:
    """Quadratic drag coefficient from a steady-state run: F = c * v^2."""
    if thrust_total <= 0:
        raise ValueError("thrust_total must be positive")
    if steady_speed <= 0:
        raise ValueError("steady_speed must be positive")
    return thrust_total / steady_speed**2


def advance(state: RigidBodyState, params: VehicleParams, thrusters: ThrusterSet, dt: float, steps: int) -> RigidBodyState:
    """Convenience: apply `steps` fixed-size steps with constant thrusters."""
    for _ in range(steps):
        state = step(state, params, thrusters, dt)
    return state


def state_with(state: RigidBodyState, **changes) -> RigidBodyState:
    return replace(state, **changes)


def params_from_dict(overrides: dict | None) -> VehicleParams:
    """Build VehicleParams from a config mapping (scenario `vehicle:` block).

    Every default is overridable; unknown keys are rejected so typos fail
    loudly. See configs/vehicle.yaml for the documented schema.
    """
    if not overrides:
        return VehicleParams()
    d = dict(overrides)
    kwargs = {}
    for key in ("mass", "displaced_volume", "fluid_density", "gravity"):
        if key in d:
            kwargs[key] = float(d.pop(key))
    if "inertia_diag" in d:
        kwargs["inertia_diag"] = np.asarray(d.pop("inertia_diag"), dtype=float)
    if "com_offset" in d:
        kwargs["com_offset"] = np.asarray(d.pop("com_offset"), dtype=float)
    if "drag" in d:
        kwargs["drag"] = DragCoeffs(**{k: float(v) for k, v in d.pop("drag").items()})
    if "thrust_curve" in d:
        tc = d.pop("thrust_curve")
        if "points" in tc:
            kwargs["thrust_curve"] = ThrustCurve(tuple((float(p), float(f)) for p, f in tc["points"]))
        else:
            kwargs["thrust_curve"] = ThrustCurve.symmetric(
                max_thrust=float(tc.get("max_thrust", MAX_THRUST_N)),
                deadband=float(tc.get("deadband", PWM_DEADBAND)),
            )
    if "thrusters" in d:
        td = d.pop("thrusters")
        defaults = _default_thrusters()
        out = []
        for i, name in enumerate(("left", "right", "vertical")):
            spec = td.get(name, {})
            pos = np.asarray(spec.get("position", defaults[i].position), dtype=float)
            axis = np.asarray(spec.get("axis", defaults[i].axis), dtype=float)
            out.append(Thruster(pos, axis))
        kwargs["thrusters"] = tuple(out)
    if d:
        raise ValueError(f"unknown vehicle config keys: {sorted(d)}")
    return VehicleParams(**kwargs)


def load_vehicle_params(document: str) -> VehicleParams:
    """Parse a YAML vehicle document (the `vehicle:` mapping or bare)."""
    import yaml

    raw = yaml.safe_load(document)
    if isinstance(raw, dict) and "vehicle" in raw:
        raw = raw["vehicle"]
    return params_from_dict(raw)
