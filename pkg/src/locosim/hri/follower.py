"""PID diver following on detection bounding boxes.

Yaw and pitch drive the box toward the image center; thrust regulates the
box's area fraction toward a target, using size as a stereo-free distance
proxy. Without detections the follower pauses, then falls back to a slow
yaw scan once the loss threshold passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..pilot import Command, PidGains, PidState, deadband_compensate, pid_step
from ..sensors import Detection

LOSS_THRESHOLD = 2.0  # s without a detection before searching
SEARCH_YAW = 0.2
TARGET_AREA_FRACTION = 0.05


@dataclass(frozen=True)
class FollowerGains:
    yaw: PidGains = field(default_factory=lambda: PidGains(kp=2.0, ki=0.2, kd=0.6))
    pitch: PidGains = field(default_factory=lambda: PidGains(kp=1.5, ki=0.1, kd=0.4))
    thrust: PidGains = field(default_factory=lambda: PidGains(kp=6.0, ki=1.2, kd=1.0, integral_limit=0.3))
    target_area_fraction: float = TARGET_AREA_FRACTION
    loss_threshold: float = LOSS_THRESHOLD
    search_yaw: float = SEARCH_YAW


@dataclass(frozen=True)
class DiverFollowState:
    yaw_pid: PidState = field(default_factory=PidState)
    pitch_pid: PidState = field(default_factory=PidState)
    thrust_pid: PidState = field(default_factory=PidState)
    last_detection_time: float | None = None
    time_since_detection: float | None = None
    mode: str = "idle"  # idle | tracking | searching


def diver_follow_step(
    state: DiverFollowState,
    det: Detection | None,
    gains: FollowerGains,
    dt: float,
) -> tuple[DiverFollowState, Command]:
    """One follower update at the detection cadence."""
    if dt <= 0:
        raise ValueError("dt must be positive")

    if det is None:
        if state.mode == "idle":
            return state, Command()
        since = (state.time_since_detection or 0.0) + dt
        if since > gains.loss_threshold:
            new = replace(state, mode="searching", time_since_detection=since)
            return new, Command(yaw=gains.search_yaw, timestamp=det.timestamp if det else 0.0)
        return replace(state, time_since_detection=since), Command()

    # normalized errors: positive yaw error means the diver is left of
    # center (image u < W/2), matching the nose-left yaw convention
    e_yaw = (det.image_width / 2.0 - det.bbox.center_x) / det.image_width
    e_pitch = (det.image_height / 2.0 - det.bbox.center_y) / det.image_height
    area_fraction = det.bbox.area / (det.image_width * det.image_height)
    e_thrust = gains.target_area_fraction - area_fraction

    yaw_out, yaw_pid = pid_step(gains.yaw, e_yaw, dt, state.yaw_pid)
    pitch_out, pitch_pid = pid_step(gains.pitch, e_pitch, dt, state.pitch_pid)
    thrust_out, thrust_pid = pid_step(gains.thrust, e_thrust, dt, state.thrust_pid)

    cmd = Command(
        thrust=deadband_compensate(thrust_out),
        pitch=deadband_compensate(pitch_out),
        yaw=deadband_compensate(yaw_out),
        timestamp=det.timestamp,
    )
    new = DiverFollowState(
        yaw_pid=yaw_pid,
        pitch_pid=pitch_pid,
        thrust_pid=thrust_pid,
        last_detection_time=det.timestamp,
        time_since_detection=0.0,
        mode="tracking",
    )
    return new, cmd
