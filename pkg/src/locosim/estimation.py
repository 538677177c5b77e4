"""Attitude EKF, depth filtering, and model-based dead reckoning.

The attitude filter is an error-state EKF over a 6-vector [attitude error,
gyro bias], with the nominal quaternion propagated by bias-corrected gyro
integration and roll/pitch corrected from the accelerometer's gravity
direction. Yaw has no absolute reference on this vehicle (no magnetometer)
and drifts with the gyro; dead reckoning takes yaw from the filter and
propagates planar position with the same thrust/quadratic-drag surge model
the ground-truth simulator uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .dynamics import GRAVITY, ThrusterSet, VehicleParams, thrust_from_pwm
from .geometry import quat_from_rotvec, quat_multiply, quat_normalize, quat_rotate_inverse, skew
from .sensors import ImuSample


class FilterDivergenceError(RuntimeError):
    """Covariance lost positive semi-definiteness beyond tolerance."""


PSD_TOLERANCE = 1e-9

# hot-path constants (read-only; never mutate in place)
_EYE3 = np.eye(3)
_EYE6 = np.eye(6)
_PSD_BUMP = PSD_TOLERANCE * np.eye(6)
_UP = np.array([0.0, 0.0, 1.0])


@lru_cache(maxsize=16)
def _process_noise(gyro_density: float, bias_density: float, dt: float) -> np.ndarray:
    q = np.zeros((6, 6))
    q[:3, :3] = (gyro_density**2 * dt) * _EYE3
    q[3:, 3:] = (bias_density**2 * dt) * _EYE3
    q.setflags(write=False)
    return q


@lru_cache(maxsize=16)
def _direction_noise(accel_noise_std: float, gravity: float) -> np.ndarray:
    r = (accel_noise_std / gravity) ** 2 * np.eye(3)
    r.setflags(write=False)
    return r


@dataclass(frozen=True)
class EkfTuning:
    gyro_noise_density: float = 0.005  # rad/s/sqrt(Hz)
    bias_walk_density: float = 1e-5  # rad/s^2/sqrt(Hz)
    accel_noise_std: float = 0.05  # m/s^2
    init_attitude_std: float = 0.1  # rad
    init_bias_std: float = 0.02  # rad/s
    accel_gate: tuple[float, float] = (0.5, 1.5)  # fraction of g
    gravity: float = GRAVITY


@dataclass(frozen=True)
class OrientationEstimate:
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    gyro_bias: np.ndarray = field(default_factory=lambda: np.zeros(3))
    covariance: np.ndarray = field(default_factory=lambda: np.diag([0.1**2] * 3 + [0.02**2] * 3))
    timestamp: float = 0.0


def initial_estimate(tuning: EkfTuning = EkfTuning(), timestamp: float = 0.0) -> OrientationEstimate:
    cov = np.diag([tuning.init_attitude_std**2] * 3 + [tuning.init_bias_std**2] * 3)
    return OrientationEstimate(covariance=cov, timestamp=timestamp)


def _checked_cov(p: np.ndarray) -> np.ndarray:
    p = 0.5 * (p + p.T)
    try:
        np.linalg.cholesky(p + _PSD_BUMP)
    except np.linalg.LinAlgError:
        raise FilterDivergenceError(
            f"covariance not PSD within {PSD_TOLERANCE} (min diag {np.diag(p).min():.3e})"
        ) from None
    return p


def ekf_predict(
    est: OrientationEstimate,
    imu: ImuSample,
    dt: float,
    tuning: EkfTuning = EkfTuning(),
) -> OrientationEstimate:
    """Propagate the quaternion by bias-corrected gyro and grow covariance."""
    if dt <= 0:
        raise ValueError("dt must be positive")

    omega = imu.angular_velocity - est.gyro_bias
    q = quat_normalize(quat_multiply(est.orientation, quat_from_rotvec(omega * dt)))

    phi = _EYE6.copy()
    phi[:3, :3] -= skew(omega) * dt
    phi[:3, 3:] = -dt * _EYE3
    q_noise = _process_noise(tuning.gyro_noise_density, tuning.bias_walk_density, dt)
    cov = _checked_cov(phi @ est.covariance @ phi.T + q_noise)

    return OrientationEstimate(
        orientation=q,
        gyro_bias=est.gyro_bias,
        covariance=cov,
        timestamp=imu.timestamp,
    )


def ekf_update_accel(
    est: OrientationEstimate,
    imu: ImuSample,
    tuning: EkfTuning = EkfTuning(),
) -> tuple[OrientationEstimate, bool]:
    """Roll/pitch correction from the measured gravity direction.

    Returns (estimate, applied). Samples whose magnitude falls outside the
    gate (thruster transients, sensor glitches) are rejected and the input
    estimate is returned unchanged with applied=False.
    """
    accel = imu.linear_acceleration
    norm = float(np.linalg.norm(accel))
    g = tuning.gravity
    lo, hi = tuning.accel_gate
    if not lo * g <= norm <= hi * g:
        return est, False

    measured = accel / norm
    predicted = quat_rotate_inverse(est.orientation, _UP)

    h = np.zeros((3, 6))
    h[:, :3] = skew(predicted)
    r = _direction_noise(tuning.accel_noise_std, g)
    p = est.covariance
    s = h @ p @ h.T + r
    k = p @ h.T @ np.linalg.inv(s)
    # Gravity can never observe rotation (or bias) about itself: project the
    # gain onto the orthogonal subspace so yaw is left exactly unchanged
    # instead of collecting noise kicks through covariance cross terms.
    t3 = np.eye(3) - np.outer(predicted, predicted)
    k[:3, :] = t3 @ k[:3, :]
    k[3:, :] = t3 @ k[3:, :]
    delta = k @ (measured - predicted)

    q = quat_normalize(quat_multiply(est.orientation, quat_from_rotvec(delta[:3])))
    bias = est.gyro_bias + delta[3:]
    ikh = _EYE6 - k @ h
    cov = _checked_cov(ikh @ p @ ikh.T + k @ r @ k.T)  # Joseph form

    return (
        OrientationEstimate(orientation=q, gyro_bias=bias, covariance=cov, timestamp=imu.timestamp),
        True,
    )


@dataclass(frozen=True)
class OdometryEstimate:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m, world
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m/s, body
    yaw: float = 0.0  # rad, from the attitude filter
    source: str = "dead_reckoning"
    timestamp: float = 0.0


def dead_reckon_step(
    odom: OdometryEstimate,
    thrusters: ThrusterSet,
    params: VehicleParams,
    yaw_source: float,
    dt: float,
) -> OdometryEstimate:
    """Planar surge + yaw propagation with the simulator's surge model."""
    if dt <= 0:
        raise ValueError("dt must be positive")

    thrust = thrust_from_pwm(params.thrust_curve, thrusters.left) + thrust_from_pwm(
        params.thrust_curve, thrusters.right
    )
    v = float(odom.velocity[0])
    v += (thrust - params.drag.surge * v * abs(v)) / params.mass * dt

    pos = odom.position + np.array([math.cos(yaw_source), math.sin(yaw_source), 0.0]) * (v * dt)
    return OdometryEstimate(
        position=pos,
        velocity=np.array([v, 0.0, 0.0]),
        yaw=yaw_source,
        source=odom.source,
        timestamp=odom.timestamp + dt,
    )


@dataclass
class DepthFilter:
    """First-order low-pass on the hydrostatic depth, 1 Hz default cutoff."""

    cutoff_hz: float = 1.0
    depth: float | None = None

    def update(self, measured: float, dt: float) -> float:
        if self.depth is None:
            self.depth = measured
        else:
            tau = 1.0 / (2.0 * math.pi * self.cutoff_hz)
            alpha = dt / (tau + dt)
            self.depth += alpha * (measured - self.depth)
        return self.depth


def estimate_with(est: OrientationEstimate, **changes) -> OrientationEstimate:
    return replace(est, **changes)
