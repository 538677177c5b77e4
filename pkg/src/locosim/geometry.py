"""Quaternion and frame helpers shared across the stack.

Conventions (used everywhere, do not mix in others):

* World frame: x north, y west, z up (right-handed).
* Body frame:  x forward, y left, z up (right-handed).
* Quaternions are [w, x, y, z], unit norm, and rotate body -> world.
* Euler angles (roll, pitch, yaw):
    - yaw   positive = nose left  (right-handed about +z),
    - pitch positive = nose up    (right-handed about -y),
    - roll  positive = right side down (right-handed about +x).
  Composition is R = Rz(yaw) @ Ry(-pitch) @ Rx(roll).
"""

from __future__ import annotations

import math

import numpy as np

QUAT_IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = math.sqrt(float(q @ q))
    if n == 0.0 or not math.isfinite(n):
        raise ValueError("cannot normalize zero or non-finite quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b (apply b first, then a, for body->world chains)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate a body-frame vector into the world frame."""
    w, x, y, z = q
    vx, vy, vz = v
    # v + 2*w*(u x v) + 2*(u x (u x v)) with u = quaternion vector part,
    # expanded to scalars: this sits on the per-step hot path.
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return np.array(
        [
            vx + w * tx + y * tz - z * ty,
            vy + w * ty + z * tx - x * tz,
            vz + w * tz + x * ty - y * tx,
        ]
    )


def quat_rotate_inverse(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate a world-frame vector into the body frame."""
    return quat_rotate(quat_conjugate(q), v)


def quat_from_rotvec(rv: np.ndarray) -> np.ndarray:
    """Quaternion for a rotation vector (axis * angle, radians)."""
    angle = math.sqrt(float(rv @ rv))
    if angle < 1e-12:
        # second-order small-angle expansion keeps this smooth through zero
        half = 0.5 * rv
        return quat_normalize(np.array([1.0, half[0], half[1], half[2]]))
    axis = rv / angle
    s = math.sin(0.5 * angle)
    return np.array([math.cos(0.5 * angle), s * axis[0], s * axis[1], s * axis[2]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix (body -> world) for a unit quaternion."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_euler(roll: float, pitch: float, yaw: float) -> np.ndarray:
    qz = quat_from_rotvec(np.array([0.0, 0.0, yaw]))
    qy = quat_from_rotvec(np.array([0.0, -pitch, 0.0]))
    qx = quat_from_rotvec(np.array([roll, 0.0, 0.0]))
    return quat_multiply(quat_multiply(qz, qy), qx)


def quat_to_euler(q: np.ndarray) -> tuple[float, float, float]:
    """(roll, pitch, yaw) per the module conventions; pitch in [-pi/2, pi/2]."""
    m = quat_to_matrix(q)
    pitch = math.asin(max(-1.0, min(1.0, m[2, 0])))
    yaw = math.atan2(m[1, 0], m[0, 0])
    roll = math.atan2(m[2, 1], m[2, 2])
    return roll, pitch, yaw


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3-vector cross product without np.cross overhead (hot path)."""
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )
