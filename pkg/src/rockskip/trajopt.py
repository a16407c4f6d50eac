"""Kinematic trajectory optimization for the throw.

The throw is a clamped B-spline in joint space plus a free duration T.
The solver minimizes T + L (L = joint-space path length through the
control polygon) subject to position boxes at the load/release/follow-
through poses, a geodesic orientation bound and a componentwise linear
velocity box at release, and joint limits:

  * position limits are bounds on the control points (the spline lies in
    their convex hull, so the whole trajectory is feasible by construction);
  * velocity limits are linear constraints on the derivative control
    points, valid for all t for the same reason.

The constrained problem is solved with an augmented-Lagrangian outer loop
around a bound-constrained quasi-Newton inner solve (L-BFGS-B).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline
from scipy.optimize import minimize

from .arm import ArmModel, forward_kinematics, jacobian, solve_ik, twist_gradient
from .skip_dynamics import RockState
from .transforms import (
    geodesic_angle,
    matrix_to_rotvec,
    pos_of,
    rot_of,
    rotation_about,
    transform,
)


class InfeasibleGeometryError(ValueError):
    """Raised when a release point cannot be reached by the arm."""


@dataclass
class ThrowProblem:
    """Constraint data for one throw (positions in m, angles in rad)."""

    p0_des: np.ndarray  # 4x4 load-up pose (position box only)
    pr_des: np.ndarray  # 4x4 release pose (position box + orientation bound)
    pf_des: np.ndarray  # 4x4 follow-through pose (position box only)
    pdot_r_des: np.ndarray  # desired release linear velocity (3,)
    eps_p: float = 0.05
    eps_theta: float = 0.05
    eps_v: float = 0.2
    release_fraction: float = 0.8
    # optional bound on the release angular velocity transverse to
    # release_spin_axis: spin about the rock normal is free (it is the
    # stable skipping spin), wobble is bounded
    omega_transverse_max: float | None = 0.25
    release_spin_axis: np.ndarray | None = None

    def __post_init__(self):
        self.p0_des = np.asarray(self.p0_des, dtype=float)
        self.pr_des = np.asarray(self.pr_des, dtype=float)
        self.pf_des = np.asarray(self.pf_des, dtype=float)
        self.pdot_r_des = np.asarray(self.pdot_r_des, dtype=float)
        if self.release_spin_axis is not None:
            axis = np.asarray(self.release_spin_axis, dtype=float)
            self.release_spin_axis = axis / np.linalg.norm(axis)
        elif self.omega_transverse_max is not None:
            self.release_spin_axis = np.array([0.0, 0.0, 1.0])
        if min(self.eps_p, self.eps_theta, self.eps_v) <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.release_fraction < 1.0:
            raise ValueError("release_fraction must lie in (0, 1)")

    @property
    def transverse_projector(self) -> np.ndarray | None:
        if self.omega_transverse_max is None:
            return None
        axis = self.release_spin_axis
        return np.eye(3) - np.outer(axis, axis)

    def to_dict(self) -> dict:
        return {
            "p0_des": self.p0_des.tolist(),
            "pr_des": self.pr_des.tolist(),
            "pf_des": self.pf_des.tolist(),
            "pdot_r_des": self.pdot_r_des.tolist(),
            "eps_p": self.eps_p,
            "eps_theta": self.eps_theta,
            "eps_v": self.eps_v,
            "release_fraction": self.release_fraction,
            "omega_transverse_max": self.omega_transverse_max,
            "release_spin_axis": None
            if self.release_spin_axis is None
            else self.release_spin_axis.tolist(),
        }


def clamped_knots(n_ctrl: int, degree: int) -> np.ndarray:
    """Clamped uniform knot vector on [0, 1]."""
    n_internal = n_ctrl - degree - 1
    if n_internal < 0:
        raise ValueError("need at least degree + 1 control points")
    internal = np.linspace(0.0, 1.0, n_internal + 2)[1:-1]
    return np.concatenate([np.zeros(degree + 1), internal, np.ones(degree + 1)])


def basis_matrix(s: np.ndarray, knots: np.ndarray, degree: int) -> np.ndarray:
    """Rows of B-spline basis values at normalized parameters s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    # clip to the half-open domain so s=1 evaluates the final span
    s = np.clip(s, 0.0, 1.0 - 1e-12)
    return BSpline.design_matrix(s, knots, degree).toarray()


def derivative_operator(knots: np.ndarray, degree: int, n_ctrl: int) -> np.ndarray:
    """Matrix W with derivative control points D = W @ P (in s-domain)."""
    w = np.zeros((n_ctrl - 1, n_ctrl))
    for j in range(n_ctrl - 1):
        span = knots[j + degree + 1] - knots[j + 1]
        coeff = degree / span
        w[j, j] = -coeff
        w[j, j + 1] = coeff
    return w


@dataclass
class ThrowTrajectory:
    control_points: np.ndarray  # (n_ctrl, dof)
    spline_degree: int
    duration: float
    release_fraction: float
    knots: np.ndarray = field(default=None)

    def __post_init__(self):
        self.control_points = np.asarray(self.control_points, dtype=float)
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.knots is None:
            self.knots = clamped_knots(len(self.control_points), self.spline_degree)
        self._spline = BSpline(self.knots, self.control_points, self.spline_degree)
        self._dspline = self._spline.derivative()

    @property
    def n_ctrl(self) -> int:
        return len(self.control_points)

    @property
    def dof(self) -> int:
        return self.control_points.shape[1]

    @property
    def release_time(self) -> float:
        return self.release_fraction * self.duration

    @property
    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.control_points, axis=0), axis=1)))

    def to_dict(self) -> dict:
        return {
            "control_points": self.control_points.tolist(),
            "spline_degree": self.spline_degree,
            "duration": self.duration,
            "release_fraction": self.release_fraction,
            "knots": self.knots.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThrowTrajectory":
        return cls(
            control_points=np.array(data["control_points"]),
            spline_degree=int(data["spline_degree"]),
            duration=float(data["duration"]),
            release_fraction=float(data["release_fraction"]),
            knots=np.array(data["knots"]),
        )


def evaluate(traj: ThrowTrajectory, t: float):
    """Joint position and velocity of the spline at time t in [0, T]."""
    if t < -1e-12 or t > traj.duration + 1e-12:
        raise ValueError(f"t={t} outside [0, {traj.duration}]")
    s = min(max(t / traj.duration, 0.0), 1.0 - 1e-12)
    q = traj._spline(s)
    qdot = traj._dspline(s) / traj.duration
    return q, qdot


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    max_constraint_violation: float
    objective: float
    residuals: dict = field(default_factory=dict)
    merit_stages: list = field(default_factory=list)  # (start, end) AL values
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "max_constraint_violation": self.max_constraint_violation,
            "objective": self.objective,
            "residuals": self.residuals,
            "message": self.message,
        }


@dataclass
class SolveOptions:
    n_ctrl: int = 10
    degree: int = 4
    feasibility_tol: float = 1e-5
    max_outer: int = 40
    max_inner: int = 150
    mu0: float = 50.0
    mu_growth: float = 8.0
    mu_max: float = 1e8
    t_min: float = 0.02
    t_max: float = 10.0
    constraint_margin: float = 1e-4  # boxes shrunk by this before solving
    velocity_margin: float = 1e-3  # rad/s shaved off the joint velocity limits


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


def default_grasp_offset() -> np.ndarray:
    """Gripper frame -> rock frame for the antipodal flat-face grasp.

    The fingers close along the gripper y axis, so the rock's cylinder
    axis maps onto it; the rock center sits at the gripper-frame origin
    (on the closing line between the fingertips).
    """
    r_g = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
    return transform(r=r_g)


def release_ee_orientation(attack_angle: float, grasp_offset: np.ndarray) -> np.ndarray:
    """EE orientation that pitches the grasped rock nose-up for +x travel."""
    r_rock = rotation_about(np.array([0.0, 1.0, 0.0]), -attack_angle)
    return r_rock @ rot_of(grasp_offset).T


def build_problem(
    scene,
    load_pose: np.ndarray,
    desired_speed: float,
    release_height: float,
    arm: ArmModel,
    *,
    attack_angle: float = math.radians(10.0),
    swing_radius: float = 0.7,
    follow_through_angle: float = 0.6,
    grasp_offset: np.ndarray | None = None,
    eps_p: float = 0.05,
    eps_theta: float = 0.05,
    eps_v: float = 0.2,
    release_fraction: float = 0.8,
    omega_transverse_max: float | None = 0.25,
) -> ThrowProblem:
    """Construct the Eq.-style throw problem for a radial swing toward +x.

    The release point sits at bearing -y on the swing circle so that the
    tangential velocity points along +x; the follow-through continues the
    sweep past the release.
    """
    if desired_speed < 0:
        raise ValueError("desired speed must be non-negative")
    water_height = getattr(scene, "water_surface_height", 0.0)
    if release_height <= water_height:
        raise ValueError("release height must be above the water surface")
    if grasp_offset is None:
        grasp_offset = default_grasp_offset()

    r_ee = release_ee_orientation(attack_angle, grasp_offset)
    rock_target = np.array([0.0, -swing_radius, release_height])
    p_r = transform(r=r_ee, p=rock_target - r_ee @ pos_of(grasp_offset))

    # follow-through: continue the sweep (counterclockwise about +z)
    rz = rotation_about(np.array([0.0, 0.0, 1.0]), follow_through_angle)
    p_f = transform(r=rz @ r_ee, p=rz @ pos_of(p_r))

    ik = solve_ik(arm, p_r, q0=_release_seed(arm))
    if not ik.converged:
        raise InfeasibleGeometryError(
            f"release point {rock_target} unreachable "
            f"(residual {ik.position_error:.4f} m / {ik.rotation_error:.4f} rad)"
        )

    return ThrowProblem(
        p0_des=np.asarray(load_pose, dtype=float),
        pr_des=p_r,
        pf_des=p_f,
        pdot_r_des=np.array([desired_speed, 0.0, 0.0]),
        eps_p=eps_p,
        eps_theta=eps_theta,
        eps_v=eps_v,
        release_fraction=release_fraction,
        omega_transverse_max=omega_transverse_max,
        release_spin_axis=r_ee @ rot_of(grasp_offset) @ np.array([0.0, 0.0, 1.0]),
    )


def _release_seed(arm: ArmModel) -> np.ndarray:
    """A bent-elbow seed posture facing -y, used to start IK solves."""
    seed = np.zeros(arm.n_joints)
    if arm.n_joints >= 4:
        seed[0] = -math.pi / 2
        seed[1] = 0.9
        seed[3] = 1.2
        seed[5 % arm.n_joints] = -0.6
    return seed


# ---------------------------------------------------------------------------
# augmented-Lagrangian solve
# ---------------------------------------------------------------------------


class _ConstraintSet:
    """Inequality residuals g(x) <= 0 and their Jacobian for the AL solver."""

    def __init__(self, problem: ThrowProblem, arm: ArmModel, options: SolveOptions):
        self.problem = problem
        self.arm = arm
        self.options = options
        self.dof = arm.n_joints
        self.n_ctrl = options.n_ctrl
        self.knots = clamped_knots(options.n_ctrl, options.degree)
        self.w = derivative_operator(self.knots, options.degree, options.n_ctrl)
        s_r = problem.release_fraction
        self.b0 = basis_matrix([0.0], self.knots, options.degree)[0]
        self.br = basis_matrix([s_r], self.knots, options.degree)[0]
        self.b1 = basis_matrix([1.0], self.knots, options.degree)[0]
        dknots = self.knots[1:-1]
        self.dbr = (
            basis_matrix([s_r], dknots, options.degree - 1)[0] @ self.w
        )
        self.labels = self._build_labels()
        self._vel_values, self._vel_jac = self._velocity_limit_block()

    def _velocity_limit_block(self):
        """Constant-Jacobian rows: +-(W P)_{jk} - T (vmax_k - margin) <= 0."""
        dof, n_ctrl = self.dof, self.n_ctrl
        n_x = n_ctrl * dof + 1
        vmax = self.arm.velocity_limits - self.options.velocity_margin
        rows = []
        for j in range(n_ctrl - 1):
            for k in range(dof):
                row = np.zeros(n_x)
                col = np.zeros((n_ctrl, dof))
                col[:, k] = self.w[j]
                row[: n_ctrl * dof] = col.reshape(-1)
                row[-1] = -vmax[k]
                rows.append(row)
                neg = -row
                neg[-1] = -vmax[k]
                rows.append(neg)
        jac = np.vstack(rows)
        return None, jac

    def _build_labels(self):
        labels = []
        for name in ("start", "final", "release_pos"):
            for axis in "xyz":
                labels += [f"{name}_{axis}_hi", f"{name}_{axis}_lo"]
        labels.append("release_rot")
        for axis in "xyz":
            labels += [f"release_vel_{axis}_hi", f"release_vel_{axis}_lo"]
        if self.problem.omega_transverse_max is not None:
            for axis in "xyz":
                labels += [f"release_spin_{axis}_hi", f"release_spin_{axis}_lo"]
        n_d = (self.n_ctrl - 1) * self.dof
        labels += [f"qdot_limit_{k}" for k in range(2 * n_d)]
        return labels

    def unpack(self, x: np.ndarray):
        p = x[:-1].reshape(self.n_ctrl, self.dof)
        t = float(x[-1])
        return p, t

    def evaluate(self, x: np.ndarray):
        """Returns (g, dg/dx) with g <= 0 feasible."""
        problem, arm = self.problem, self.arm
        margin = self.options.constraint_margin
        p, t = self.unpack(x)
        n_x = x.size
        dof, n_ctrl = self.dof, self.n_ctrl

        q0 = self.b0 @ p
        qr = self.br @ p
        q1 = self.b1 @ p
        qdot_r = (self.dbr @ p) / t

        values = []
        rows = []

        def add(value, grad):
            values.append(value)
            rows.append(grad)

        def pos_box(q, b_row, pose_des, eps_vec):
            t_ee = forward_kinematics(arm, q)
            jac = jacobian(arm, q)
            pos = pos_of(t_ee)
            des = pos_of(pose_des)
            for axis in range(3):
                grad_q = jac[3 + axis]  # d pos_axis / dq
                grad_x = np.zeros(n_x)
                grad_x[: n_ctrl * dof] = np.outer(b_row, grad_q).reshape(-1)
                err = pos[axis] - des[axis]
                lim = eps_vec[axis] - margin
                add(err - lim, grad_x)
                add(-err - lim, -grad_x)
            return t_ee, jac

        pos_box(q0, self.b0, problem.p0_des, [problem.eps_p] * 3)
        pos_box(q1, self.b1, problem.pf_des, [problem.eps_p] * 3)
        t_r, jac_r = pos_box(
            qr,
            self.br,
            problem.pr_des,
            [problem.eps_p, problem.eps_p, problem.eps_p / 4.0],
        )

        # release orientation: geodesic angle to the desired rotation
        r_cur = rot_of(t_r)
        r_des = rot_of(problem.pr_des)
        rel = r_des @ r_cur.T
        angle = geodesic_angle(r_cur, r_des)
        if angle > 1e-9:
            axis_w = matrix_to_rotvec(rel) / angle
            dangle_dq = -(axis_w @ jac_r[:3])
        else:
            dangle_dq = np.zeros(dof)
        grad_x = np.zeros(n_x)
        grad_x[: n_ctrl * dof] = np.outer(self.br, dangle_dq).reshape(-1)
        add(angle - (problem.eps_theta - margin), grad_x)

        # release linear velocity box (componentwise, per the formulation)
        tw_grad = twist_gradient(arm, qr, qdot_r)  # 6 x dof
        vel = jac_r[3:] @ qdot_r
        for axis in range(3):
            dv_dq = tw_grad[3 + axis]
            dv_dqdot = jac_r[3 + axis]
            grad_p = (
                np.outer(self.br, dv_dq) + np.outer(self.dbr / t, dv_dqdot)
            ).reshape(-1)
            grad_x = np.zeros(n_x)
            grad_x[: n_ctrl * dof] = grad_p
            grad_x[-1] = -np.dot(dv_dqdot, qdot_r) / t
            err = vel[axis] - problem.pdot_r_des[axis]
            lim = problem.eps_v - margin
            add(err - lim, grad_x)
            add(-err - lim, -grad_x)

        # optional bound on the release spin transverse to the rock normal
        proj = problem.transverse_projector
        if proj is not None:
            omega_t = proj @ (jac_r[:3] @ qdot_r)
            dwt_dq = proj @ tw_grad[:3]
            dwt_dqdot = proj @ jac_r[:3]
            for axis in range(3):
                grad_p = (
                    np.outer(self.br, dwt_dq[axis])
                    + np.outer(self.dbr / t, dwt_dqdot[axis])
                ).reshape(-1)
                grad_x = np.zeros(n_x)
                grad_x[: n_ctrl * dof] = grad_p
                grad_x[-1] = -np.dot(dwt_dqdot[axis], qdot_r) / t
                lim = problem.omega_transverse_max - margin
                add(omega_t[axis] - lim, grad_x)
                add(-omega_t[axis] - lim, -grad_x)

        # velocity limits on derivative control points: |W P| <= T * vmax
        # (linear, constant Jacobian, precomputed)
        vel_values = self._vel_jac @ x
        return np.concatenate([values, vel_values]), np.vstack(
            [np.vstack(rows), self._vel_jac]
        )


def _objective(x, n_ctrl, dof, smooth=1e-10):
    p = x[:-1].reshape(n_ctrl, dof)
    t = x[-1]
    diffs = np.diff(p, axis=0)
    seg = np.sqrt(np.sum(diffs**2, axis=1) + smooth**2)
    f = t + float(np.sum(seg))
    grad = np.zeros_like(x)
    grad_p = np.zeros_like(p)
    unit = diffs / seg[:, None]
    grad_p[:-1] -= unit
    grad_p[1:] += unit
    grad[: n_ctrl * dof] = grad_p.reshape(-1)
    grad[-1] = 1.0
    return f, grad


def initial_guess(problem: ThrowProblem, arm: ArmModel, options: SolveOptions):
    """Joint-space interpolation through IK solutions at the constraint poses,
    with the duration set from the swing arc length and the desired speed."""
    q0_ik = solve_ik(arm, problem.p0_des, q0=_release_seed(arm))
    qr_ik = solve_ik(arm, problem.pr_des, q0=q0_ik.q)
    qf_ik = solve_ik(arm, problem.pf_des, q0=qr_ik.q)
    s_r = problem.release_fraction
    s_vals = np.linspace(0.0, 1.0, options.n_ctrl)
    p = np.empty((options.n_ctrl, arm.n_joints))
    for i, s in enumerate(s_vals):
        if s <= s_r:
            lam = s / s_r
            p[i] = (1 - lam) * q0_ik.q + lam * qr_ik.q
        else:
            lam = (s - s_r) / (1.0 - s_r)
            p[i] = (1 - lam) * qr_ik.q + lam * qf_ik.q
    arc = float(
        np.linalg.norm(pos_of(problem.pr_des) - pos_of(problem.p0_des))
        + np.linalg.norm(pos_of(problem.pf_des) - pos_of(problem.pr_des))
    )
    speed = max(float(np.linalg.norm(problem.pdot_r_des)), 0.5)
    t0 = float(np.clip(2.0 * arc / speed, 4 * options.t_min, options.t_max / 2))
    lower = arm.position_limits[:, 0]
    upper = arm.position_limits[:, 1]
    p = np.clip(p, lower, upper)
    return np.concatenate([p.reshape(-1), [t0]])


def solve(
    problem: ThrowProblem,
    arm: ArmModel,
    x0: np.ndarray | None = None,
    options: SolveOptions | None = None,
):
    """Augmented-Lagrangian solve; returns (ThrowTrajectory, SolveReport)."""
    options = options or SolveOptions()
    cons = _ConstraintSet(problem, arm, options)
    n_ctrl, dof = options.n_ctrl, arm.n_joints
    if x0 is None:
        x = initial_guess(problem, arm, options)
    else:
        x = np.asarray(x0, dtype=float).copy()

    bounds = []
    for _ in range(n_ctrl):
        for k in range(dof):
            bounds.append((arm.position_limits[k, 0], arm.position_limits[k, 1]))
    bounds.append((options.t_min, options.t_max))

    g, _ = cons.evaluate(x)
    lam = np.zeros_like(g)
    mu = options.mu0
    merit_stages = []
    violation = float(np.max(g, initial=0.0))
    converged = False
    outer_done = 0

    for outer in range(options.max_outer):
        outer_done = outer + 1
        best = {"phi": math.inf, "x": x}

        def al_fun(xk, lam=lam, mu=mu, best=best):
            f, grad_f = _objective(xk, n_ctrl, dof)
            g_k, jac_k = cons.evaluate(xk)
            act = np.maximum(0.0, lam + mu * g_k)
            phi = f + float(np.sum(act**2 - lam**2)) / (2.0 * mu)
            if phi < best["phi"]:
                best["phi"] = phi
                best["x"] = xk.copy()
            grad = grad_f + jac_k.T @ act
            return phi, grad

        phi_start = al_fun(x)[0]
        minimize(
            al_fun,
            x,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": options.max_inner, "ftol": 1e-12, "gtol": 1e-10},
        )
        # the line search can terminate abnormally on this C^1 function;
        # keep the best iterate seen, which also keeps stages monotone
        x = best["x"]
        merit_stages.append((float(phi_start), float(best["phi"])))

        g, _ = cons.evaluate(x)
        new_violation = float(np.max(g, initial=0.0))
        if new_violation <= options.feasibility_tol:
            converged = True
            break
        lam = np.maximum(0.0, lam + mu * g)
        if new_violation > 0.25 * violation:
            mu = min(mu * options.mu_growth, options.mu_max)
        violation = new_violation

    p, t = cons.unpack(x)
    traj = ThrowTrajectory(
        control_points=p,
        spline_degree=options.degree,
        duration=t,
        release_fraction=problem.release_fraction,
        knots=cons.knots,
    )
    g, _ = cons.evaluate(x)
    residuals = {}
    for label, value in zip(cons.labels, g):
        group = label.rsplit("_", 1)[0] if label.rsplit("_", 1)[-1] in ("hi", "lo") else label
        residuals[group] = max(residuals.get(group, -math.inf), float(value))
    worst = {k: v for k, v in sorted(residuals.items(), key=lambda kv: -kv[1])[:8]}
    f, _ = _objective(x, n_ctrl, dof)
    report = SolveReport(
        converged=converged,
        iterations=outer_done,
        max_constraint_violation=float(np.max(g, initial=0.0)),
        objective=float(f),
        residuals=worst,
        merit_stages=merit_stages,
        message="feasible" if converged else "constraint violation above tolerance",
    )
    return traj, report


# ---------------------------------------------------------------------------
# independent verification and release handoff
# ---------------------------------------------------------------------------


def check_trajectory(
    problem: ThrowProblem,
    arm: ArmModel,
    traj: ThrowTrajectory,
    n_samples: int = 200,
    slack: float = 1e-9,
) -> dict:
    """Standalone FK/Jacobian validation of every constraint in the problem.

    Shares nothing with the solver beyond the trajectory definition itself;
    returns per-constraint margins (negative = satisfied) and a verdict.
    """
    t_release = traj.release_time
    q0, _ = evaluate(traj, 0.0)
    qr, qdot_r = evaluate(traj, t_release)
    q1, _ = evaluate(traj, traj.duration)

    out = {}
    p0 = pos_of(forward_kinematics(arm, q0))
    out["start_pos"] = float(np.max(np.abs(p0 - pos_of(problem.p0_des)) - problem.eps_p))
    p1 = pos_of(forward_kinematics(arm, q1))
    out["final_pos"] = float(np.max(np.abs(p1 - pos_of(problem.pf_des)) - problem.eps_p))

    t_r = forward_kinematics(arm, qr)
    pr = pos_of(t_r)
    eps_r = np.array([problem.eps_p, problem.eps_p, problem.eps_p / 4.0])
    out["release_pos"] = float(np.max(np.abs(pr - pos_of(problem.pr_des)) - eps_r))
    out["release_rot"] = float(
        geodesic_angle(rot_of(t_r), rot_of(problem.pr_des)) - problem.eps_theta
    )
    jac = jacobian(arm, qr)
    vel = jac[3:] @ qdot_r
    out["release_vel"] = float(np.max(np.abs(vel - problem.pdot_r_des) - problem.eps_v))
    if problem.omega_transverse_max is not None:
        omega_t = problem.transverse_projector @ (jac[:3] @ qdot_r)
        out["release_spin_transverse"] = float(
            np.max(np.abs(omega_t) - problem.omega_transverse_max)
        )

    times = np.linspace(0.0, traj.duration, n_samples)
    worst_pos = -math.inf
    worst_vel = -math.inf
    for t in times:
        q, qdot = evaluate(traj, t)
        worst_pos = max(
            worst_pos,
            float(np.max(arm.position_limits[:, 0] - q)),
            float(np.max(q - arm.position_limits[:, 1])),
        )
        worst_vel = max(worst_vel, float(np.max(np.abs(qdot) - arm.velocity_limits)))
    out["joint_position_limits"] = worst_pos
    out["joint_velocity_limits"] = worst_vel
    out["passes"] = all(v <= slack for k, v in out.items() if k != "passes")
    return out


def release_state(
    traj: ThrowTrajectory, arm: ArmModel, grasp_offset: np.ndarray | None = None
) -> RockState:
    """Rock pose/twist at the release instant, seeding the flight simulator."""
    if grasp_offset is None:
        grasp_offset = default_grasp_offset()
    qr, qdot_r = evaluate(traj, traj.release_time)
    t_ee = forward_kinematics(arm, qr)
    jac = jacobian(arm, qr)
    omega = jac[:3] @ qdot_r
    v_ee = jac[3:] @ qdot_r
    t_rock = t_ee @ grasp_offset
    lever = rot_of(t_ee) @ pos_of(grasp_offset)
    return RockState(
        position=pos_of(t_rock),
        orientation=rot_of(t_rock),
        linear_velocity=v_ee + np.cross(omega, lever),
        angular_velocity=omega,
    )


def trajectory_to_json(traj: ThrowTrajectory, report: SolveReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(
            {"trajectory": traj.to_dict(), "report": report.to_dict()},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def trajectory_from_json(path) -> ThrowTrajectory:
    with open(path) as fh:
        data = json.load(fh)
    return ThrowTrajectory.from_dict(data["trajectory"])
