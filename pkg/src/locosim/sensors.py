"""Simulated sensors: IMU, pressure/depth, and scripted-diver detections.

Each sensor draws from its own deterministic RNG stream derived from the
scenario seed, so streams stay aligned regardless of which sensors are
enabled and runs replay bit-identically.

The accelerometer reports specific force (the reaction to gravity plus the
body's linear acceleration), like real strapdown IMUs: level and at rest it
reads +g along body z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import GRAVITY, RigidBodyState
from .geometry import quat_rotate_inverse

ATMOSPHERIC_PA = 101325.0


@dataclass(frozen=True)
class NoiseSpec:
    gyro_noise_std: float = 0.005  # rad/s per sample
    gyro_bias: np.ndarray = field(default_factory=lambda: np.zeros(3))  # rad/s
    accel_noise_std: float = 0.05  # m/s^2 per sample
    pressure_noise_std: float = 200.0  # Pa (~2 cm of water)
    detection_dropout_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("gyro_noise_std", "accel_noise_std", "pressure_noise_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.detection_dropout_prob <= 1.0:
            raise ValueError("detection_dropout_prob must be in [0, 1]")

    @classmethod
    def quiet(cls, seed: int = 0) -> "NoiseSpec":
        return cls(0.0, np.zeros(3), 0.0, 0.0, 0.0, seed)


class SensorStreams:
    """Independent per-sensor RNG streams; safe to sample from anywhere."""

    def __init__(self, seed: int):
        self.imu = np.random.default_rng([seed, 0])
        self.pressure = np.random.default_rng([seed, 1])
        self.detection = np.random.default_rng([seed, 2])


@dataclass(frozen=True)
class ImuSample:
    angular_velocity: np.ndarray  # rad/s, body frame
    linear_acceleration: np.ndarray  # m/s^2, body frame, specific force
    timestamp: float  # s


@dataclass(frozen=True)
class PressureSample:
    pressure: float  # Pa absolute
    timestamp: float  # s


@dataclass(frozen=True)
class BBox:
    center_x: float  # px
    center_y: float  # px
    width: float  # px
    height: float  # px

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Detection:
    bbox: BBox
    image_width: int
    image_height: int
    confidence: float
    timestamp: float


@dataclass(frozen=True)
class PinholeCamera:
    """Forward-looking camera on the body x axis; ours, not measured."""

    focal_px: float = 400.0
    image_width: int = 800
    image_height: int = 600

    def __post_init__(self):
        if self.focal_px <= 0:
            raise ValueError("focal_px must be positive")


@dataclass(frozen=True)
class DiverExtent:
    height: float = 1.7  # m
    width: float = 0.6  # m


def sample_imu(
    state: RigidBodyState,
    noise: NoiseSpec,
    rng: np.random.Generator,
    body_accel: np.ndarray | None = None,
    gravity: float = GRAVITY,
) -> ImuSample:
    """One IMU sample. body_accel is the model's dv/dt in the body frame."""
    gyro = state.angular_velocity + noise.gyro_bias + rng.normal(0.0, 1.0, 3) * noise.gyro_noise_std
    up_body = quat_rotate_inverse(state.orientation, np.array([0.0, 0.0, 1.0]))
    specific = gravity * up_body
    if body_accel is not None:
        specific = specific + body_accel
    accel = specific + rng.normal(0.0, 1.0, 3) * noise.accel_noise_std
    return ImuSample(angular_velocity=gyro, linear_acceleration=accel, timestamp=state.time)


def pressure_from_depth(
    depth: float,
    fluid_density: float,
    gravity: float = GRAVITY,
    atmospheric: float = ATMOSPHERIC_PA,
) -> float:
    return atmospheric + fluid_density * gravity * max(0.0, depth)


def sample_pressure(
    state: RigidBodyState,
    fluid_density: float,
    noise: NoiseSpec,
    rng: np.random.Generator,
    gravity: float = GRAVITY,
) -> PressureSample:
    p = pressure_from_depth(state.depth, fluid_density, gravity)
    p += float(rng.normal(0.0, 1.0)) * noise.pressure_noise_std
    return PressureSample(pressure=p, timestamp=state.time)


def depth_from_pressure(
    sample: PressureSample,
    fluid_density: float,
    gravity: float = GRAVITY,
    atmospheric: float = ATMOSPHERIC_PA,
) -> float:
    """Hydrostatic inverse; slightly negative at the surface with noise."""
    if fluid_density <= 0:
        raise ValueError("fluid_density must be positive")
    return (sample.pressure - atmospheric) / (fluid_density * gravity)


def project_diver(
    state: RigidBodyState,
    diver_position: np.ndarray,
    camera: PinholeCamera,
    extent: DiverExtent = DiverExtent(),
    rng: np.random.Generator | None = None,
    dropout_prob: float = 0.0,
) -> Detection | None:
    """Project the diver's bounding volume; None if out of view or dropped."""
    rel = quat_rotate_inverse(state.orientation, np.asarray(diver_position) - state.position)
    forward = float(rel[0])
    if forward <= 0.05:
        return None

    f = camera.focal_px
    # image u right / v down; body y is left and body z is up
    cx = camera.image_width / 2.0
    cy = camera.image_height / 2.0
    u = cx - f * float(rel[1]) / forward
    v = cy - f * float(rel[2]) / forward
    w_px = f * extent.width / forward
    h_px = f * extent.height / forward

    left = max(0.0, u - w_px / 2.0)
    right = min(float(camera.image_width), u + w_px / 2.0)
    top = max(0.0, v - h_px / 2.0)
    bottom = min(float(camera.image_height), v + h_px / 2.0)
    if right - left <= 0.0 or bottom - top <= 0.0:
        return None

    if rng is not None and dropout_prob > 0.0 and float(rng.random()) < dropout_prob:
        return None

    bbox = BBox(
        center_x=(left + right) / 2.0,
        center_y=(top + bottom) / 2.0,
        width=right - left,
        height=bottom - top,
    )
    return Detection(
        bbox=bbox,
        image_width=camera.image_width,
        image_height=camera.image_height,
        confidence=1.0,
        timestamp=state.time,
    )
