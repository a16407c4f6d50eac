"""Minimal SO(3)/SE(3) helpers shared by the dynamics, arm, and planner code.

Rigid transforms are plain 4x4 numpy arrays; rotations are 3x3 matrices.
Everything here is small and allocation-light because some callers sit in
simulation inner loops.
"""

from __future__ import annotations

import math

import numpy as np

XHAT = np.array([1.0, 0.0, 0.0])
YHAT = np.array([0.0, 1.0, 0.0])
ZHAT = np.array([0.0, 0.0, 1.0])


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a unit axis."""
    ax = np.asarray(axis, dtype=float)
    n = np.linalg.norm(ax)
    if abs(n - 1.0) > 1e-9:
        ax = ax / n
    k = skew(ax)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def rotvec_to_matrix(rv: np.ndarray) -> np.ndarray:
    angle = float(np.linalg.norm(rv))
    if angle < 1e-12:
        return np.eye(3)
    return rotation_about(rv / angle, angle)


def matrix_to_rotvec(r: np.ndarray) -> np.ndarray:
    """Log map of SO(3); returns angle*axis."""
    tr = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    angle = math.acos(tr)
    if angle < 1e-12:
        return np.zeros(3)
    if abs(angle - math.pi) < 1e-6:
        # near pi: extract axis from the symmetric part
        a = (r + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(a), 0.0))
        # fix signs using the largest component
        i = int(np.argmax(axis))
        if axis[i] > 0:
            axis[(i + 1) % 3] = a[i, (i + 1) % 3] / axis[i]
            axis[(i + 2) % 3] = a[i, (i + 2) % 3] / axis[i]
        return angle * unit(axis)
    v = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return v * (angle / (2.0 * math.sin(angle)))


def geodesic_angle(r_a: np.ndarray, r_b: np.ndarray) -> float:
    """Angle of the relative rotation between two orientations."""
    tr = np.clip((np.trace(r_a.T @ r_b) - 1.0) / 2.0, -1.0, 1.0)
    return math.acos(tr)


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    if r.shape != (3, 3):
        return False
    if not np.all(np.isfinite(r)):
        return False
    return (
        np.abs(r @ r.T - np.eye(3)).max() <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


def transform(r: np.ndarray | None = None, p: np.ndarray | None = None) -> np.ndarray:
    t = np.eye(4)
    if r is not None:
        t[:3, :3] = r
    if p is not None:
        t[:3, 3] = p
    return t


def rot_of(t: np.ndarray) -> np.ndarray:
    return t[:3, :3]


def pos_of(t: np.ndarray) -> np.ndarray:
    return t[:3, 3]


def invert_transform(t: np.ndarray) -> np.ndarray:
    r = t[:3, :3]
    out = np.eye(4)
    out[:3, :3] = r.T
    out[:3, 3] = -r.T @ t[:3, 3]
    return out


def pose_error(t_current: np.ndarray, t_desired: np.ndarray) -> np.ndarray:
    """Twist-style error (angular; linear) taking current toward desired, world frame."""
    rot_err = matrix_to_rotvec(rot_of(t_desired) @ rot_of(t_current).T)
    lin_err = pos_of(t_desired) - pos_of(t_current)
    return np.concatenate([rot_err, lin_err])


def quat_wxyz_from_matrix(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) from a rotation matrix (Shepperd's method)."""
    m00, m01, m02 = r[0]
    m10, m11, m12 = r[1]
    m20, m21, m22 = r[2]
    tr = m00 + m11 + m22
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s])
    elif m00 >= m11 and m00 >= m22:
        s = math.sqrt(1.0 + m00 - m11 - m22) * 2.0
        q = np.array([(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s])
    elif m11 >= m22:
        s = math.sqrt(1.0 + m11 - m00 - m22) * 2.0
        q = np.array([(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s])
    else:
        s = math.sqrt(1.0 + m22 - m00 - m11) * 2.0
        q = np.array([(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s])
    return q / np.linalg.norm(q)
