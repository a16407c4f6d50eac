"""Five-state throw planner: drag the rock to the table edge, pick it up
with an antipodal flat-face grasp, move to the load-up pose, throw, stop.

The planner owns the end-effector keyframes for the first three states and
their completion predicates; the throw itself is produced by the
trajectory optimizer and only its release event is tracked here.  Grasping
is kinematic: once the close command executes at a valid grasp pose the
rock is treated as rigidly attached to the gripper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .transforms import matrix_to_rotvec, pose_error, rotation_about, rotvec_to_matrix, transform

ZAXIS = np.array([0.0, 0.0, 1.0])


class PlannerState(Enum):
    DRAG_TO_EDGE = "drag_to_edge"
    PICK_UP = "pick_up"
    LOAD_UP = "load_up"
    THROW = "throw"
    TERMINAL = "terminal"


STATE_ORDER = [
    PlannerState.DRAG_TO_EDGE,
    PlannerState.PICK_UP,
    PlannerState.LOAD_UP,
    PlannerState.THROW,
    PlannerState.TERMINAL,
]


class PlannerStallError(RuntimeError):
    """A state's completion predicate stayed unsatisfied past its timeout."""


@dataclass
class TaskScene:
    table_height: float = 0.25
    rock_thickness: float = 0.015
    table_edge_position: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.55, 0.25])
    )
    rock_start_position: np.ndarray | None = None
    water_surface_height: float = 0.0

    def __post_init__(self):
        self.table_edge_position = np.asarray(self.table_edge_position, dtype=float)
        if self.rock_start_position is None:
            self.rock_start_position = np.array(
                [0.0, 0.75, self.table_height + 0.5 * self.rock_thickness]
            )
        self.rock_start_position = np.asarray(self.rock_start_position, dtype=float)
        expected_z = self.table_height + 0.5 * self.rock_thickness
        if abs(self.rock_start_position[2] - expected_z) > 1e-3:
            raise ValueError(
                f"rock_start_position z={self.rock_start_position[2]} should sit on "
                f"the table at {expected_z}"
            )

    @property
    def rock_edge_position(self) -> np.ndarray:
        """Rock center once dragged to the table edge."""
        return np.array(
            [
                self.table_edge_position[0],
                self.table_edge_position[1],
                self.table_height + 0.5 * self.rock_thickness,
            ]
        )


@dataclass
class Keyframe:
    time: float
    pose: np.ndarray


@dataclass
class GripperCommand:
    time: float
    action: str  # "close" | "open"


def _press_orientation() -> np.ndarray:
    """Top-down pressing orientation (approach axis pointing down)."""
    return np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])


def _grasp_orientation() -> np.ndarray:
    """Sideways grasp: finger-closing axis vertical, approach along +y."""
    return np.array([[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])


def plan_drag_keyframes(
    scene: TaskScene,
    keyframe_dt: float = 0.5,
    approach_clearance: float = 0.15,
    press_clearance: float = 0.005,
    edge_tolerance: float = 5e-3,
    n_drag_segments: int = 4,
) -> list:
    """Approach above the rock, descend to press height, drag to the edge.

    Returns an empty plan when the rock already sits at the edge.
    """
    start = scene.rock_start_position
    goal = scene.rock_edge_position
    if np.linalg.norm((goal - start)[:2]) < edge_tolerance:
        return []
    press_z = scene.table_height + scene.rock_thickness + press_clearance
    orientation = _press_orientation()
    frames = []
    t = keyframe_dt
    frames.append(
        Keyframe(t, transform(r=orientation, p=start + [0, 0, approach_clearance]))
    )
    t += keyframe_dt
    frames.append(Keyframe(t, transform(r=orientation, p=[start[0], start[1], press_z])))
    for k in range(1, n_drag_segments + 1):
        lam = k / n_drag_segments
        p = (1 - lam) * start[:2] + lam * goal[:2]
        t += keyframe_dt
        frames.append(Keyframe(t, transform(r=orientation, p=[p[0], p[1], press_z])))
    return frames


def plan_pick_keyframes(
    scene: TaskScene,
    keyframe_dt: float = 0.5,
    backoff: float = 0.10,
    lift_height: float = 0.15,
):
    """Grasp the rock's flat faces at the edge, close, and lift.

    The approach is horizontal (from the robot side of the edge) so the
    fingers straddle the top and bottom faces; the close command sits
    strictly between the grasp and lift keyframes.
    """
    rock = scene.rock_edge_position
    orientation = _grasp_orientation()
    approach_dir = orientation[:, 2]  # world direction the hand points
    frames = [
        Keyframe(keyframe_dt, transform(r=orientation, p=rock - backoff * approach_dir)),
        Keyframe(2 * keyframe_dt, transform(r=orientation, p=rock)),
        # dwell at the grasp pose while the fingers close
        Keyframe(3 * keyframe_dt, transform(r=orientation, p=rock)),
        Keyframe(4 * keyframe_dt, transform(r=orientation, p=rock + [0, 0, lift_height])),
    ]
    commands = [GripperCommand(2 * keyframe_dt + 0.5 * keyframe_dt, "close")]
    return frames, commands


def plan_load_pose(
    scene: TaskScene,
    release_ee_rotation: np.ndarray,
    load_radius: float = 0.69,
    load_height: float = 0.55,
    release_bearing: float = -math.pi / 2.0,
) -> np.ndarray:
    """Load-up pose on the far side of the workspace from the water (+x).

    The orientation co-rotates the release orientation back along the
    swing so the throw is a near-pure radial sweep.
    """
    load_bearing = math.pi  # pointing along -x, away from the water
    position = np.array(
        [load_radius * math.cos(load_bearing), load_radius * math.sin(load_bearing), load_height]
    )
    rotation = rotation_about(ZAXIS, load_bearing - release_bearing) @ release_ee_rotation
    return transform(r=rotation, p=position)


def plan_load_keyframes(
    start_pose: np.ndarray,
    load_pose: np.ndarray,
    keyframe_dt: float = 0.5,
    n_segments: int = 4,
) -> list:
    """Straight-line position, interpolated-rotation path to the load pose."""
    p0, p1 = start_pose[:3, 3], load_pose[:3, 3]
    r0 = start_pose[:3, :3]
    rel = matrix_to_rotvec(load_pose[:3, :3] @ r0.T)
    frames = []
    for k in range(1, n_segments + 1):
        lam = k / n_segments
        rot = rotvec_to_matrix(lam * rel) @ r0
        frames.append(Keyframe(k * keyframe_dt, transform(r=rot, p=(1 - lam) * p0 + lam * p1)))
    return frames


@dataclass
class WorldSnapshot:
    time: float
    ee_pose: np.ndarray
    release_executed: bool = False


class ThrowPlanner:
    """Sequences the five states and serves end-effector commands.

    ``advance`` applies the active state's completion predicate;
    ``commanded_pose`` interpolates the active keyframes (and returns None
    in THROW, whose commands come from the optimized trajectory, and in
    TERMINAL, where the arm is no longer commanded).
    """

    def __init__(
        self,
        scene: TaskScene,
        release_ee_rotation: np.ndarray,
        keyframe_dt: float = 0.5,
        pos_tol: float = 0.01,
        rot_tol: float = 0.05,
        stall_timeout: float = 5.0,
        load_radius: float = 0.69,
        load_height: float = 0.55,
        lift_height: float = 0.15,
    ):
        self.scene = scene
        self.pos_tol = pos_tol
        self.rot_tol = rot_tol
        self.stall_timeout = stall_timeout
        self.state = PlannerState.DRAG_TO_EDGE
        self.entry_time = 0.0
        self.drag_keyframes = plan_drag_keyframes(scene, keyframe_dt)
        self.pick_keyframes, self.gripper_commands = plan_pick_keyframes(
            scene, keyframe_dt, lift_height=lift_height
        )
        self.load_pose = plan_load_pose(scene, release_ee_rotation, load_radius, load_height)
        lift_pose = self.pick_keyframes[-1].pose
        self.load_keyframes = plan_load_keyframes(lift_pose, self.load_pose, keyframe_dt)
        self.trace = []
        self.state_history = [self.state]

    def _active_keyframes(self):
        if self.state is PlannerState.DRAG_TO_EDGE:
            return self.drag_keyframes
        if self.state is PlannerState.PICK_UP:
            return self.pick_keyframes
        if self.state is PlannerState.LOAD_UP:
            return self.load_keyframes
        return []

    def commanded_pose(self, time: float) -> np.ndarray | None:
        """Interpolated end-effector target at absolute time, or None."""
        frames = self._active_keyframes()
        if not frames:
            return None
        t_rel = time - self.entry_time
        if t_rel <= frames[0].time:
            return frames[0].pose
        for prev, nxt in zip(frames, frames[1:]):
            if t_rel <= nxt.time:
                lam = (t_rel - prev.time) / (nxt.time - prev.time)
                pose = nxt.pose.copy()
                pose[:3, 3] = (1 - lam) * prev.pose[:3, 3] + lam * nxt.pose[:3, 3]
                return pose
        return frames[-1].pose

    def gripper_close_time(self) -> float:
        """Absolute time of the close command (valid once in PICK_UP)."""
        return self.entry_time + self.gripper_commands[0].time

    def record(self, time: float, commanded: np.ndarray | None):
        pose = commanded
        self.trace.append(
            {
                "time": time,
                "state": self.state.value,
                "x": None if pose is None else float(pose[0, 3]),
                "y": None if pose is None else float(pose[1, 3]),
                "z": None if pose is None else float(pose[2, 3]),
            }
        )

    def _complete(self, snapshot: WorldSnapshot) -> bool:
        frames = self._active_keyframes()
        if self.state is PlannerState.THROW:
            return snapshot.release_executed
        if not frames:
            return True
        if snapshot.time - self.entry_time < frames[-1].time:
            return False
        err = pose_error(snapshot.ee_pose, frames[-1].pose)
        return (
            np.linalg.norm(err[3:]) < self.pos_tol
            and np.linalg.norm(err[:3]) < self.rot_tol
        )

    def advance(self, snapshot: WorldSnapshot) -> PlannerState:
        """Transition when the active state's completion predicate holds."""
        if self.state is PlannerState.TERMINAL:
            return self.state
        if self._complete(snapshot):
            idx = STATE_ORDER.index(self.state)
            self.state = STATE_ORDER[idx + 1]
            self.entry_time = snapshot.time
            self.state_history.append(self.state)
            return self.state
        frames = self._active_keyframes()
        plan_end = frames[-1].time if frames else 0.0
        if snapshot.time - self.entry_time > plan_end + self.stall_timeout:
            raise PlannerStallError(
                f"{self.state.value} incomplete {self.stall_timeout}s past its plan"
            )
        return self.state


def write_planner_trace(planner: ThrowPlanner, path) -> None:
    with open(path, "w") as fh:
        fh.write("time,state,x,y,z\n")
        for row in planner.trace:
            vals = [
                repr(row["time"]),
                row["state"],
                "" if row["x"] is None else repr(row["x"]),
                "" if row["y"] is None else repr(row["y"]),
                "" if row["z"] is None else repr(row["z"]),
            ]
            fh.write(",".join(vals) + "\n")
