"""Serial-chain arm: forward kinematics, geometric Jacobian, and
damped-least-squares differential inverse kinematics.

The model is a configurable revolute chain.  ``default_arm()`` returns a
7-joint chain with alternating axes and link offsets giving roughly one
metre of reach; its velocity limits are deliberately loose (50 rad/s) so
that high-speed throw releases are kinematically feasible.  Spatial tasks
want at least 6 joints; shorter chains are fine for planar tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .transforms import (
    ZHAT,
    pose_error,
    rotation_about,
    transform,
)


@dataclass(frozen=True)
class Joint:
    axis: np.ndarray  # unit rotation axis in the joint's own frame
    parent_offset: np.ndarray  # 4x4 transform from the parent frame to this joint

    def __post_init__(self):
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float))
        object.__setattr__(self, "parent_offset", np.asarray(self.parent_offset, dtype=float))
        n = np.linalg.norm(self.axis)
        if abs(n - 1.0) > 1e-9:
            object.__setattr__(self, "axis", self.axis / n)
        if self.parent_offset.shape != (4, 4):
            raise ValueError("parent_offset must be a 4x4 rigid transform")


@dataclass(frozen=True)
class ArmModel:
    joints: tuple
    position_limits: np.ndarray  # (n, 2) [lower, upper] rad
    velocity_limits: np.ndarray  # (n,) symmetric rad/s
    ee_offset: np.ndarray = field(default_factory=lambda: np.eye(4))

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(
            self, "position_limits", np.asarray(self.position_limits, dtype=float)
        )
        object.__setattr__(
            self, "velocity_limits", np.asarray(self.velocity_limits, dtype=float)
        )
        object.__setattr__(self, "ee_offset", np.asarray(self.ee_offset, dtype=float))
        n = len(self.joints)
        if self.position_limits.shape != (n, 2):
            raise ValueError("position_limits must be (n_joints, 2)")
        if self.velocity_limits.shape != (n,):
            raise ValueError("velocity_limits must be (n_joints,)")
        if not np.all(np.isfinite(self.position_limits)) or not np.all(
            np.isfinite(self.velocity_limits)
        ):
            raise ValueError("limits must be finite")
        if not np.all(self.position_limits[:, 0] < self.position_limits[:, 1]):
            raise ValueError("lower position limits must be below upper limits")
        if not np.all(self.velocity_limits > 0):
            raise ValueError("velocity limits must be positive")

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    def to_dict(self) -> dict:
        return {
            "joints": [
                {
                    "axis": [float(a) for a in j.axis],
                    "offset": [float(v) for v in j.parent_offset[:3, 3]],
                }
                for j in self.joints
            ],
            "position_limits": self.position_limits.tolist(),
            "velocity_limits": self.velocity_limits.tolist(),
            "ee_offset": [float(v) for v in self.ee_offset[:3, 3]],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArmModel":
        joints = tuple(
            Joint(axis=np.array(j["axis"]), parent_offset=transform(p=np.array(j["offset"])))
            for j in data["joints"]
        )
        return cls(
            joints=joints,
            position_limits=np.array(data["position_limits"]),
            velocity_limits=np.array(data["velocity_limits"]),
            ee_offset=transform(p=np.array(data["ee_offset"])),
        )


@dataclass
class ArmState:
    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.qdot = np.asarray(self.qdot, dtype=float)
        if self.q.shape != self.qdot.shape:
            raise ValueError("q and qdot must have the same length")

    def limit_violations(self, model: ArmModel) -> dict:
        """Joint limit violations (reported, never silently clamped)."""
        lower, upper = model.position_limits[:, 0], model.position_limits[:, 1]
        pos = np.maximum(lower - self.q, 0.0) + np.maximum(self.q - upper, 0.0)
        vel = np.maximum(np.abs(self.qdot) - model.velocity_limits, 0.0)
        return {
            "position": pos,
            "velocity": vel,
            "any": bool(np.any(pos > 0) or np.any(vel > 0)),
        }


def _check_q(model: ArmModel, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n_joints,):
        raise ValueError(f"expected {model.n_joints} joint values, got shape {q.shape}")
    return q


def joint_frames(model: ArmModel, q: np.ndarray):
    """World origin and world axis of every joint, plus the ee transform."""
    q = _check_q(model, q)
    t = np.eye(4)
    origins = np.empty((model.n_joints, 3))
    axes = np.empty((model.n_joints, 3))
    for i, joint in enumerate(model.joints):
        t = t @ joint.parent_offset
        origins[i] = t[:3, 3]
        axes[i] = t[:3, :3] @ joint.axis
        rot = np.eye(4)
        rot[:3, :3] = rotation_about(joint.axis, float(q[i]))
        t = t @ rot
    return origins, axes, t @ model.ee_offset


def forward_kinematics(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """World pose (4x4) of the gripper frame."""
    _, _, t_ee = joint_frames(model, q)
    return t_ee


def jacobian(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian mapping qdot to world spatial velocity (angular; linear)."""
    origins, axes, t_ee = joint_frames(model, q)
    p_ee = t_ee[:3, 3]
    jac = np.zeros((6, model.n_joints))
    for i in range(model.n_joints):
        jac[:3, i] = axes[i]
        jac[3:, i] = np.cross(axes[i], p_ee - origins[i])
    return jac


def twist_gradient(model: ArmModel, q: np.ndarray, qdot: np.ndarray) -> np.ndarray:
    """d(J(q) qdot)/dq, a 6 x n matrix, computed from the chain geometry.

    Rotating joint j sweeps every downstream frame about its world axis,
    so all the partials reduce to cross products with that axis.
    """
    qdot = np.asarray(qdot, dtype=float)
    origins, axes, t_ee = joint_frames(model, q)
    p_ee = t_ee[:3, 3]
    n = model.n_joints
    grad = np.zeros((6, n))
    for j in range(n):
        zj = axes[j]
        dpe = np.cross(zj, p_ee - origins[j])
        dw = np.zeros(3)
        dv = np.zeros(3)
        for i in range(n):
            if qdot[i] == 0.0:
                continue
            lever = p_ee - origins[i]
            if i >= j:
                dzi = np.cross(zj, axes[i])
                dpi = np.cross(zj, origins[i] - origins[j])
                dw += qdot[i] * dzi
                dv += qdot[i] * (np.cross(dzi, lever) + np.cross(axes[i], dpe - dpi))
            else:
                dv += qdot[i] * np.cross(axes[i], dpe)
        grad[:3, j] = dw
        grad[3:, j] = dv
    return grad


def differential_ik_step(
    model: ArmModel,
    state: ArmState,
    desired_pose: np.ndarray,
    dt: float,
    gain: float = 1.0,
    damping: float = 1e-2,
) -> np.ndarray:
    """Damped-least-squares joint velocity command toward a desired pose.

    The command is uniformly scaled so no joint exceeds its velocity
    limit; the damping keeps the solve well-posed at singularities.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    current = forward_kinematics(model, state.q)
    err = pose_error(current, desired_pose)
    v_des = gain * err / dt
    jac = jacobian(model, state.q)
    a = jac @ jac.T + (damping**2) * np.eye(6)
    qdot = jac.T @ np.linalg.solve(a, v_des)
    over = np.abs(qdot) / model.velocity_limits
    worst = float(np.max(over)) if over.size else 0.0
    if worst > 1.0:
        qdot = qdot / worst
    return qdot


@dataclass
class IKResult:
    q: np.ndarray
    converged: bool
    iterations: int
    position_error: float
    rotation_error: float
    reason: str = ""


def solve_ik(
    model: ArmModel,
    target_pose: np.ndarray,
    q0: np.ndarray,
    dt: float = 1e-2,
    pos_tol: float = 1e-4,
    rot_tol: float = 1e-3,
    max_iterations: int = 2000,
    plateau_steps: int = 100,
    plateau_decrease: float = 1e-6,
) -> IKResult:
    """Iterated differential IK; flags unreachable targets via error plateau."""
    q = _check_q(model, q0).copy()
    best = math.inf
    stalled = 0
    for it in range(max_iterations):
        current = forward_kinematics(model, q)
        err = pose_error(current, target_pose)
        rot_err = float(np.linalg.norm(err[:3]))
        pos_err = float(np.linalg.norm(err[3:]))
        if pos_err < pos_tol and rot_err < rot_tol:
            return IKResult(q, True, it, pos_err, rot_err)
        total = pos_err + rot_err
        if total < best - plateau_decrease:
            best = total
            stalled = 0
        else:
            stalled += 1
            if stalled >= plateau_steps:
                return IKResult(q, False, it, pos_err, rot_err, reason="error plateau")
        qdot = differential_ik_step(model, ArmState(q, np.zeros_like(q)), target_pose, dt)
        q = q + qdot * dt
    current = forward_kinematics(model, q)
    err = pose_error(current, target_pose)
    return IKResult(
        q,
        False,
        max_iterations,
        float(np.linalg.norm(err[3:])),
        float(np.linalg.norm(err[:3])),
        reason="max iterations",
    )


def default_arm() -> ArmModel:
    """7-joint chain with alternating z/y axes, roughly IIWA-like offsets."""
    lift = [0.36, 0.0, 0.42, 0.0, 0.40, 0.0, 0.126]
    axes = [ZHAT, np.array([0.0, 1.0, 0.0])] * 3 + [ZHAT]
    joints = tuple(
        Joint(axis=axes[i], parent_offset=transform(p=np.array([0.0, 0.0, lift[i]])))
        for i in range(7)
    )
    position_limits = np.array(
        [
            [-2.967, 2.967],
            [-2.094, 2.094],
            [-2.967, 2.967],
            [-2.094, 2.094],
            [-2.967, 2.967],
            [-2.094, 2.094],
            [-3.054, 3.054],
        ]
    )
    velocity_limits = np.full(7, 50.0)
    return ArmModel(
        joints=joints,
        position_limits=position_limits,
        velocity_limits=velocity_limits,
        ee_offset=transform(p=np.array([0.0, 0.0, 0.1])),
    )
