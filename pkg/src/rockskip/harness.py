"""Experiment harness: reference-table runs, sweeps, damping calibration,
the full pick-drag-load-throw pipeline rehearsal, and plot-data export."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .trajopt import evaluate as evaluate_trajectory

from .arm import ArmState, differential_ik_step, forward_kinematics
from .config import ExperimentConfig, Mode, config_to_dict
from .flight import SimResult, simulate_throw, write_summary_json, write_trajectory_csv
from .planner import (
    PlannerState,
    ThrowPlanner,
    WorldSnapshot,
    write_planner_trace,
)
from .skip_dynamics import RockState, WaterModel
from .trajopt import (
    SolveReport,
    ThrowTrajectory,
    build_problem,
    default_grasp_offset,
    release_ee_orientation,
    release_state,
    solve,
)
from .transforms import invert_transform, pos_of, rotation_about, YHAT

TABLE2_TARGETS = ((14.4, 4), (12.6, 3), (9.9, 0))
TABLE2_HEIGHT = 0.5


class CalibrationFailedError(RuntimeError):
    """No damping value reproduces the reference skip counts within one."""


class OptimizerFailedError(RuntimeError):
    """Throw optimization did not converge; diagnostics attached."""

    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


class GraspFailedError(RuntimeError):
    """Gripper closed too far from the rock for a valid grasp."""


# ---------------------------------------------------------------------------
# DirectRelease
# ---------------------------------------------------------------------------


def direct_release_state(
    speed: float, height: float, attack_angle: float, spin: float = 0.0
) -> RockState:
    """Release state for DirectRelease mode: horizontal velocity along +x,
    rock pitched nose-up by the attack angle, optional spin about its normal."""
    orientation = rotation_about(YHAT, -attack_angle)
    normal = orientation[:, 2]
    return RockState(
        position=np.array([0.0, 0.0, height]),
        orientation=orientation,
        linear_velocity=np.array([speed, 0.0, 0.0]),
        angular_velocity=spin * normal,
    )


def run_direct(config: ExperimentConfig, velocity: float, height: float) -> SimResult:
    state = direct_release_state(
        velocity, height, config.release.attack_angle, config.release.spin
    )
    return simulate_throw(state, config.rock, config.water_model(), config.sim)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    desired_velocity: float
    achieved_velocity: float
    release_height: float
    skip_count: int
    total_range: float
    outcome: str
    reference_skips: int | None = None

    def to_dict(self) -> dict:
        return {
            "desired_velocity": self.desired_velocity,
            "achieved_velocity": self.achieved_velocity,
            "release_height": self.release_height,
            "skip_count": self.skip_count,
            "total_range": self.total_range,
            "outcome": self.outcome,
            "reference_skips": self.reference_skips,
        }


@dataclass
class SweepResult:
    rows: list
    results: list = field(default_factory=list)  # SimResult per row, same order

    def sort(self):
        order = sorted(
            range(len(self.rows)),
            key=lambda i: (self.rows[i].desired_velocity, self.rows[i].release_height),
        )
        self.rows = [self.rows[i] for i in order]
        if self.results:
            self.results = [self.results[i] for i in order]
        return self


SUMMARY_COLUMNS = [
    "desired_velocity",
    "achieved_velocity",
    "release_height",
    "skip_count",
    "total_range",
    "outcome",
    "reference_skips",
]


def write_summary_csv(sweep: SweepResult, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in sweep.rows:
            d = row.to_dict()
            cells = []
            for col in SUMMARY_COLUMNS:
                v = d[col]
                if v is None:
                    cells.append("")
                elif isinstance(v, float):
                    cells.append(repr(v))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


def read_summary_csv(path) -> SweepResult:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            cells = line.rstrip("\n").split(",")
            record = dict(zip(header, cells))
            rows.append(
                SweepRow(
                    desired_velocity=float(record["desired_velocity"]),
                    achieved_velocity=float(record["achieved_velocity"]),
                    release_height=float(record["release_height"]),
                    skip_count=int(record["skip_count"]),
                    total_range=float(record["total_range"]),
                    outcome=record["outcome"],
                    reference_skips=None
                    if record["reference_skips"] == ""
                    else int(record["reference_skips"]),
                )
            )
    return SweepResult(rows=rows)


def run_table2(config: ExperimentConfig) -> SweepResult:
    """Reference-table reproduction: three DirectRelease runs at 0.5 m."""
    config.water_model()  # fail fast with the calibration pointer if unset
    rows = []
    results = []
    for speed, reference in TABLE2_TARGETS:
        result = run_direct(config, speed, TABLE2_HEIGHT)
        rows.append(
            SweepRow(
                desired_velocity=speed,
                achieved_velocity=speed,
                release_height=TABLE2_HEIGHT,
                skip_count=result.skip_count,
                total_range=result.total_range,
                outcome=result.outcome.value,
                reference_skips=reference,
            )
        )
        results.append(result)
    return SweepResult(rows=rows, results=results).sort()


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Grid over configured velocities and heights, merged in key order."""
    rows = []
    results = []
    for velocity in config.sweep.velocities:
        for height in config.sweep.heights:
            if config.mode is Mode.FULL_PIPELINE:
                run = rehearse_pipeline(config, velocity, height)
                result = run.sim_result
                achieved = run.achieved_velocity
            else:
                result = run_direct(config, velocity, height)
                achieved = velocity
            rows.append(
                SweepRow(
                    desired_velocity=velocity,
                    achieved_velocity=achieved,
                    release_height=height,
                    skip_count=result.skip_count,
                    total_range=result.total_range,
                    outcome=result.outcome.value,
                )
            )
            results.append(result)
    return SweepResult(rows=rows, results=results).sort()


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------


def _mismatch(config: ExperimentConfig, damping: float, targets) -> tuple:
    water = WaterModel(
        density=config.water_density,
        drag_coefficient=config.water_drag_coefficient,
        damping_coefficient=damping,
        surface_height=config.water_surface_height,
    )
    counts = []
    for speed, _ in targets:
        state = direct_release_state(
            speed, TABLE2_HEIGHT, config.release.attack_angle, config.release.spin
        )
        result = simulate_throw(state, config.rock, water, config.sim)
        counts.append(result.skip_count)
    mismatch = sum(abs(c - t) for c, (_, t) in zip(counts, targets))
    return mismatch, tuple(counts)


@dataclass
class CalibrationResult:
    damping: float
    residual: int
    counts: tuple
    plateau: tuple  # (lo, hi) damping interval achieving the best residual
    table: list  # evaluated (damping, counts, mismatch) rows

    def to_dict(self) -> dict:
        return {
            "damping": self.damping,
            "residual": self.residual,
            "counts": list(self.counts),
            "plateau": list(self.plateau),
            "table": [
                {"damping": d, "counts": list(c), "mismatch": m} for d, c, m in self.table
            ],
        }


def calibrate(
    config: ExperimentConfig,
    targets=TABLE2_TARGETS,
    d_max: float = 4.0,
    grid_step: float = 0.25,
    resolution: float = 1e-3,
) -> CalibrationResult:
    """Grid-plus-bisection search for the damping coefficient.

    Finds the best skip-count mismatch on a coarse grid, bisects the edges
    of the best-mismatch plateau around it down to `resolution`, and
    returns the plateau midpoint.  Fails when the best total mismatch
    exceeds one, attaching the full evaluation table.
    """
    if not targets:
        raise ValueError("calibration targets must be nonempty")
    grid = [round(i * grid_step, 10) for i in range(int(d_max / grid_step) + 1)]
    table = []
    for d in grid:
        mismatch, counts = _mismatch(config, d, targets)
        table.append((d, counts, mismatch))
    best_mismatch = min(m for _, _, m in table)
    if best_mismatch > 1:
        raise CalibrationFailedError(
            "no damping value reaches total skip-count mismatch <= 1; "
            f"best is {best_mismatch}; table: {table}"
        )
    best_idx = min(range(len(table)), key=lambda i: table[i][2])

    def is_best(d):
        mismatch, counts = _mismatch(config, d, targets)
        table.append((d, counts, mismatch))
        return mismatch == best_mismatch

    # contiguous grid plateau around the best cell
    lo_idx = best_idx
    while lo_idx > 0 and table[lo_idx - 1][2] == best_mismatch:
        lo_idx -= 1
    hi_idx = best_idx
    while hi_idx + 1 < len(grid) and table[hi_idx + 1][2] == best_mismatch:
        hi_idx += 1

    # bisect the plateau edges
    lo = grid[lo_idx]
    if lo_idx > 0:
        outside, inside = grid[lo_idx - 1], grid[lo_idx]
        while inside - outside > resolution:
            mid = 0.5 * (inside + outside)
            if is_best(mid):
                inside = mid
            else:
                outside = mid
        lo = inside
    hi = grid[hi_idx]
    if hi_idx + 1 < len(grid):
        inside, outside = grid[hi_idx], grid[hi_idx + 1]
        while outside - inside > resolution:
            mid = 0.5 * (inside + outside)
            if is_best(mid):
                inside = mid
            else:
                outside = mid
        hi = inside

    damping = 0.5 * (lo + hi)
    residual, counts = _mismatch(config, damping, targets)
    table.append((damping, counts, residual))
    if residual > 1:
        # midpoint fell in a hole between plateau fragments; fall back to
        # the best evaluated point
        damping, counts, residual = min(table, key=lambda row: (row[2], row[0]))
    return CalibrationResult(
        damping=damping,
        residual=residual,
        counts=counts,
        plateau=(lo, hi),
        table=sorted(table, key=lambda row: row[0]),
    )


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------


@dataclass
class PipelineRun:
    planner: ThrowPlanner
    trajectory: ThrowTrajectory
    report: SolveReport
    release: RockState
    sim_result: SimResult
    achieved_velocity: float


def rehearse_pipeline(
    config: ExperimentConfig,
    desired_velocity: float,
    desired_height: float,
    ik_dt: float = 1e-2,
) -> PipelineRun:
    """Kinematic end-to-end rehearsal of drag, pick, load, throw, fly.

    Differential IK tracks the planner keyframes; the rock is kinematically
    repositioned to the edge when the drag completes and rigidly attached
    to the gripper once the close command executes; the throw comes from
    the trajectory optimizer and hands its release state to the flight
    simulator.
    """
    arm = config.arm
    scene = config.scene
    grasp_offset = default_grasp_offset()
    release_rot = release_ee_orientation(config.release.attack_angle, grasp_offset)
    planner = ThrowPlanner(
        scene,
        release_rot,
        load_radius=config.throw.load_radius,
        load_height=config.throw.load_height,
    )

    q = np.zeros(arm.n_joints)
    if arm.n_joints >= 4:  # face the table side to start
        q[0] = math.pi / 2
        q[1] = 0.7
        q[3] = 1.1
    t = 0.0
    rock_pose = np.eye(4)
    rock_pose[:3, 3] = scene.rock_start_position
    attached = None  # ee->rock transform once grasped
    closed = False

    while planner.state not in (PlannerState.THROW, PlannerState.TERMINAL):
        target = planner.commanded_pose(t)
        qdot = differential_ik_step(arm, ArmState(q, np.zeros_like(q)), target, ik_dt)
        q = q + qdot * ik_dt
        t += ik_dt
        ee = forward_kinematics(arm, q)
        if (
            planner.state is PlannerState.PICK_UP
            and not closed
            and t >= planner.gripper_close_time()
        ):
            closed = True
            gap = np.linalg.norm(pos_of(ee) - pos_of(rock_pose))
            if gap > 0.02:
                raise GraspFailedError(
                    f"gripper closed {gap * 1e3:.1f} mm from the rock center"
                )
            attached = invert_transform(ee) @ rock_pose
        if attached is not None:
            rock_pose = ee @ attached
        before = planner.state
        planner.advance(WorldSnapshot(time=t, ee_pose=ee))
        planner.record(t, target)
        if before is PlannerState.DRAG_TO_EDGE and planner.state is PlannerState.PICK_UP:
            # drag complete: the rock now sits at the edge (kinematic drag)
            rock_pose = np.eye(4)
            rock_pose[:3, 3] = scene.rock_edge_position

    problem = build_problem(
        scene,
        planner.load_pose,
        desired_velocity,
        desired_height,
        arm,
        attack_angle=config.release.attack_angle,
        swing_radius=config.throw.swing_radius,
        follow_through_angle=config.throw.follow_through_angle,
        grasp_offset=grasp_offset,
        eps_p=config.throw.eps_p,
        eps_theta=config.throw.eps_theta,
        eps_v=config.throw.eps_v,
        release_fraction=config.throw.release_fraction,
        omega_transverse_max=config.throw.omega_transverse_max,
    )
    trajectory, report = solve(problem, arm)
    if not report.converged:
        raise OptimizerFailedError(
            f"throw optimization failed (violation "
            f"{report.max_constraint_violation:.3g}): {report.residuals}",
            report,
        )
    rock = release_state(trajectory, arm, attached if attached is not None else grasp_offset)
    t += trajectory.release_time
    q_release, _ = evaluate_trajectory(trajectory, trajectory.release_time)
    planner.advance(
        WorldSnapshot(time=t, ee_pose=forward_kinematics(arm, q_release), release_executed=True)
    )
    planner.record(t, None)

    sim_result = simulate_throw(rock, config.rock, config.water_model(), config.sim)
    return PipelineRun(
        planner=planner,
        trajectory=trajectory,
        report=report,
        release=rock,
        sim_result=sim_result,
        achieved_velocity=float(rock.linear_velocity[0]),
    )


def run_full_pipeline(
    config: ExperimentConfig, desired_velocity: float, desired_height: float
):
    """End-to-end run; returns the optimized trajectory and the flight result."""
    run = rehearse_pipeline(config, desired_velocity, desired_height)
    return run.trajectory, run.sim_result


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_plots(sweep: SweepResult, config: ExperimentConfig, directory) -> list:
    """Write per-throw trajectory CSVs and the plot-ready summary table."""
    if not sweep.rows:
        raise ValueError("cannot export an empty sweep")
    os.makedirs(directory, exist_ok=True)
    written = []
    water = config.water_model()
    for row, result in zip(sweep.rows, sweep.results):
        name = f"trajectory_v{row.desired_velocity:g}_h{row.release_height:g}.csv"
        path = os.path.join(directory, name)
        write_trajectory_csv(result, config.rock, water, path)
        written.append(path)
        summary_path = os.path.join(
            directory, f"summary_v{row.desired_velocity:g}_h{row.release_height:g}.json"
        )
        write_summary_json(result, summary_path)
        written.append(summary_path)
    table_path = os.path.join(directory, "summary.csv")
    write_summary_csv(sweep, table_path)
    written.append(table_path)
    return written


def save_run_outputs(
    config: ExperimentConfig,
    result: SimResult,
    directory,
    stem: str,
    planner: ThrowPlanner | None = None,
) -> dict:
    os.makedirs(directory, exist_ok=True)
    paths = {}
    traj_path = os.path.join(directory, f"{stem}_trajectory.csv")
    write_trajectory_csv(result, config.rock, config.water_model(), traj_path)
    paths["trajectory"] = traj_path
    summary_path = os.path.join(directory, f"{stem}_summary.json")
    write_summary_json(result, summary_path)
    paths["summary"] = summary_path
    if planner is not None:
        trace_path = os.path.join(directory, f"{stem}_planner_trace.csv")
        write_planner_trace(planner, trace_path)
        paths["planner_trace"] = trace_path
    return paths


def sweep_manifest(config: ExperimentConfig, sweep: SweepResult) -> dict:
    return {
        "config": config_to_dict(config),
        "rows": [row.to_dict() for row in sweep.rows],
    }


def write_sweep_json(config: ExperimentConfig, sweep: SweepResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(sweep_manifest(config, sweep), fh, indent=2, sort_keys=True)
        fh.write("\n")
