"""Ballistic + water-contact propagation of the rock, with skip counting.

The rock is integrated with a classical explicit RK4 scheme at a coarse
flight step, switching to a fine contact step whenever the bottom face is
wetted (and for the approach step that would first wet it, so contact
onset is resolved at the fine step).  The water force is applied at the
center of mass with zero torque, so angular velocity is constant and the
orientation simply rotates with it.

A skip is one contact episode that ends with the rock airborne and moving
upward.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .skip_dynamics import (
    RockGeometry,
    RockState,
    WaterModel,
)
from .transforms import quat_wxyz_from_matrix, rotvec_to_matrix


class SimulationDivergedError(RuntimeError):
    """Raised when the integrator produces a non-finite state."""


class Outcome(str, Enum):
    SKIPPED = "skipped"
    SANK = "sank"
    FLEW_OUT = "flew_out"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class SimConfig:
    # sink_depth_threshold is the center depth below the surface at which the
    # rock counts as sunk; the default (half the reference rock's thickness)
    # means "fully submerged: top face at the waterline".
    dt_flight: float = 1e-3
    dt_contact: float = 1e-4
    gravity: tuple[float, float, float] = (0.0, 0.0, -9.81)
    max_sim_time: float = 20.0
    sink_depth_threshold: float = 0.0075
    x_extent: float = 200.0
    record_samples: bool = True

    def __post_init__(self):
        if not (0.0 < self.dt_contact <= self.dt_flight):
            raise ValueError("require 0 < dt_contact <= dt_flight")
        if self.sink_depth_threshold <= 0.0:
            raise ValueError("sink_depth_threshold must be positive")


@dataclass
class SkipEvent:
    index: int
    entry_time: float
    exit_time: float
    entry_position: np.ndarray
    exit_position: np.ndarray
    entry_speed: float
    exit_speed: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "entry_time": self.entry_time,
            "exit_time": self.exit_time,
            "entry_position": [float(x) for x in self.entry_position],
            "exit_position": [float(x) for x in self.exit_position],
            "entry_speed": self.entry_speed,
            "exit_speed": self.exit_speed,
        }


@dataclass
class SimResult:
    samples: list  # time-ordered list of (t, RockState)
    skip_events: list
    outcome: Outcome
    total_range: float
    params: dict = field(default_factory=dict)

    @property
    def skip_count(self) -> int:
        return len(self.skip_events)


def count_skips(result: SimResult) -> int:
    return len(result.skip_events)


# ---------------------------------------------------------------------------
# scalar force core (shared by step() and simulate_throw())
# ---------------------------------------------------------------------------


def _face_constants(orientation: np.ndarray, thickness: float):
    """Orientation-derived scalars used by the contact force."""
    nx, ny, nz = float(orientation[0, 2]), float(orientation[1, 2]), float(orientation[2, 2])
    if nz < 0.0:
        nx, ny, nz = -nx, -ny, -nz
    sin_tilt = math.sqrt(max(0.0, 1.0 - nz * nz))
    bottom_dz = -0.5 * thickness * nz
    return nx, ny, nz, sin_tilt, bottom_dz


def _make_accel(geom: RockGeometry, water: WaterModel, config: SimConfig, face):
    """Closure computing acceleration for a fixed rock orientation."""
    nx, ny, nz, sin_tilt, bottom_dz = face
    radius = geom.radius
    full_area = math.pi * radius * radius
    rho_cd = water.density * water.drag_coefficient
    damp = water.damping_coefficient
    surf = water.surface_height
    inv_m = 1.0 / geom.mass
    gx, gy, gz = config.gravity
    half_pi = math.pi / 2.0

    def accel(pz, vx, vy, vz):
        # wetted area of the bottom face
        depth = surf - (pz + bottom_dz)
        if sin_tilt < 1e-12:
            area = full_area if depth >= 0.0 else 0.0
        else:
            d = depth / sin_tilt
            if d <= -radius:
                area = 0.0
            elif d >= radius:
                area = full_area
            else:
                area = radius * radius * math.acos(-d / radius) + d * math.sqrt(
                    radius * radius - d * d
                )
        if area <= 0.0:
            return gx, gy, gz
        speed_sq = vx * vx + vy * vy + vz * vz
        fx = -damp * vx
        fy = -damp * vy
        fz = -damp * vz
        if speed_sq > 0.0:
            speed = math.sqrt(speed_sq)
            beta = half_pi - math.acos(min(1.0, max(-1.0, -vz / speed)))
            h_norm = math.hypot(vx, vy)
            if h_norm > 1e-12:
                dot = (nx * vx + ny * vy) / h_norm
            else:
                h2 = math.hypot(nx, ny)
                dot = h2 if h2 > 1e-12 else 0.0
            alpha = math.acos(min(1.0, max(-1.0, dot))) - half_pi
            planing = math.sin(beta + alpha)
            if planing > 0.0:
                mag = rho_cd * area * speed_sq * planing
                fx += mag * nx
                fy += mag * ny
                fz += mag * nz
        return gx + fx * inv_m, gy + fy * inv_m, gz + fz * inv_m

    return accel


def _wetted(pz, face, geom: RockGeometry, water: WaterModel) -> bool:
    nx, ny, nz, sin_tilt, bottom_dz = face
    depth = water.surface_height - (pz + bottom_dz)
    if sin_tilt < 1e-12:
        return depth >= 0.0
    return depth / sin_tilt > -geom.radius


def _rk4(accel, px, py, pz, vx, vy, vz, dt):
    ax1, ay1, az1 = accel(pz, vx, vy, vz)
    h = 0.5 * dt
    vx2, vy2, vz2 = vx + h * ax1, vy + h * ay1, vz + h * az1
    ax2, ay2, az2 = accel(pz + h * vz, vx2, vy2, vz2)
    vx3, vy3, vz3 = vx + h * ax2, vy + h * ay2, vz + h * az2
    ax3, ay3, az3 = accel(pz + h * vz2, vx3, vy3, vz3)
    vx4, vy4, vz4 = vx + dt * ax3, vy + dt * ay3, vz + dt * az3
    ax4, ay4, az4 = accel(pz + dt * vz3, vx4, vy4, vz4)
    s = dt / 6.0
    return (
        px + s * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4),
        py + s * (vy + 2.0 * vy2 + 2.0 * vy3 + vy4),
        pz + s * (vz + 2.0 * vz2 + 2.0 * vz3 + vz4),
        vx + s * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4),
        vy + s * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4),
        vz + s * (az1 + 2.0 * az2 + 2.0 * az3 + az4),
    )


def _advance_orientation(orientation: np.ndarray, omega: np.ndarray, dt: float) -> np.ndarray:
    if omega[0] == 0.0 and omega[1] == 0.0 and omega[2] == 0.0:
        return orientation
    return rotvec_to_matrix(omega * dt) @ orientation


def step(
    state: RockState,
    geom: RockGeometry,
    water: WaterModel,
    config: SimConfig,
    dt: float,
) -> RockState:
    """One explicit RK4 step under gravity plus the water contact force.

    The contact force is evaluated with the step-start orientation; the
    orientation itself is advanced by the (constant) angular velocity.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    face = _face_constants(state.orientation, geom.thickness)
    accel = _make_accel(geom, water, config, face)
    px, py, pz = (float(u) for u in state.position)
    vx, vy, vz = (float(u) for u in state.linear_velocity)
    out = _rk4(accel, px, py, pz, vx, vy, vz, dt)
    if not all(math.isfinite(u) for u in out):
        raise SimulationDivergedError(f"non-finite state after step of dt={dt}")
    orientation = _advance_orientation(state.orientation, state.angular_velocity, dt)
    return RockState(
        position=np.array(out[:3]),
        orientation=orientation,
        linear_velocity=np.array(out[3:]),
        angular_velocity=state.angular_velocity.copy(),
    )


def simulate_throw(
    initial: RockState,
    geom: RockGeometry,
    water: WaterModel,
    config: SimConfig,
) -> SimResult:
    """Run a release to its outcome, collecting samples and skip events."""
    if initial.position[2] <= water.surface_height:
        raise ValueError("initial position must be above the water surface")

    spinning = bool(np.any(initial.angular_velocity != 0.0))
    orientation = initial.orientation.copy()
    omega = initial.angular_velocity.copy()
    face = _face_constants(orientation, geom.thickness)
    accel = _make_accel(geom, water, config, face)

    px, py, pz = (float(u) for u in initial.position)
    vx, vy, vz = (float(u) for u in initial.linear_velocity)
    x0 = px
    t = 0.0

    samples = []

    def record():
        if config.record_samples:
            samples.append(
                (
                    t,
                    RockState(
                        position=np.array([px, py, pz]),
                        orientation=orientation.copy(),
                        linear_velocity=np.array([vx, vy, vz]),
                        angular_velocity=omega.copy(),
                    ),
                )
            )

    record()

    skip_events = []
    in_contact = False
    entry = None  # (time, position, speed) of current episode
    outcome = Outcome.TIMED_OUT

    while True:
        if t >= config.max_sim_time:
            outcome = Outcome.TIMED_OUT
            break
        if in_contact:
            dt = config.dt_contact
            nxt = _rk4(accel, px, py, pz, vx, vy, vz, dt)
        else:
            dt = config.dt_flight
            nxt = _rk4(accel, px, py, pz, vx, vy, vz, dt)
            if _wetted(nxt[2], face, geom, water):
                # resolve the approach at the contact step
                dt = config.dt_contact
                nxt = _rk4(accel, px, py, pz, vx, vy, vz, dt)
        px, py, pz, vx, vy, vz = nxt
        t += dt
        if not (math.isfinite(px) and math.isfinite(pz) and math.isfinite(vx) and math.isfinite(vz)):
            raise SimulationDivergedError(f"non-finite state at t={t:.6f}")
        if spinning:
            orientation = _advance_orientation(orientation, omega, dt)
            face = _face_constants(orientation, geom.thickness)
            accel = _make_accel(geom, water, config, face)

        wet = _wetted(pz, face, geom, water)
        if wet and not in_contact:
            entry = (t, np.array([px, py, pz]), math.sqrt(vx * vx + vy * vy + vz * vz))
            in_contact = True
        elif in_contact and not wet:
            if vz > 0.0:
                skip_events.append(
                    SkipEvent(
                        index=len(skip_events),
                        entry_time=entry[0],
                        exit_time=t,
                        entry_position=entry[1],
                        exit_position=np.array([px, py, pz]),
                        entry_speed=entry[2],
                        exit_speed=math.sqrt(vx * vx + vy * vy + vz * vz),
                    )
                )
            in_contact = False
            entry = None
        record()

        if water.surface_height - pz > config.sink_depth_threshold:
            outcome = Outcome.SANK
            break
        if px > config.x_extent:
            outcome = Outcome.FLEW_OUT
            break

    if outcome in (Outcome.SANK, Outcome.TIMED_OUT) and skip_events:
        outcome = Outcome.SKIPPED

    params = {
        "rock": {"radius": geom.radius, "thickness": geom.thickness, "mass": geom.mass},
        "water": {
            "density": water.density,
            "drag_coefficient": water.drag_coefficient,
            "damping_coefficient": water.damping_coefficient,
            "surface_height": water.surface_height,
        },
        "sim": {
            "dt_flight": config.dt_flight,
            "dt_contact": config.dt_contact,
            "gravity": list(config.gravity),
            "max_sim_time": config.max_sim_time,
            "sink_depth_threshold": config.sink_depth_threshold,
            "x_extent": config.x_extent,
        },
        "initial": {
            "position": [float(u) for u in initial.position],
            "orientation_quat_wxyz": [float(u) for u in quat_wxyz_from_matrix(initial.orientation)],
            "linear_velocity": [float(u) for u in initial.linear_velocity],
            "angular_velocity": [float(u) for u in initial.angular_velocity],
        },
    }
    return SimResult(
        samples=samples,
        skip_events=skip_events,
        outcome=outcome,
        total_range=px - x0,
        params=params,
    )


# ---------------------------------------------------------------------------
# trajectory / summary I/O
# ---------------------------------------------------------------------------

TRAJECTORY_COLUMNS = "t,x,y,z,vx,vy,vz,qw,qx,qy,qz,wetted_area,in_contact"


def write_trajectory_csv(result: SimResult, geom: RockGeometry, water: WaterModel, path) -> None:
    from .skip_dynamics import compute_wetted_area

    with open(path, "w") as fh:
        fh.write(TRAJECTORY_COLUMNS + "\n")
        for t, st in result.samples:
            q = quat_wxyz_from_matrix(st.orientation)
            area = compute_wetted_area(st, geom, water)
            row = [t, *st.position, *st.linear_velocity, *q, area, int(area > 0.0)]
            fh.write(",".join(repr(float(v)) if not isinstance(v, int) else str(v) for v in row))
            fh.write("\n")


def read_trajectory_csv(path) -> list[dict]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = line.strip().split(",")
            rows.append({k: float(v) for k, v in zip(header, vals)})
    return rows


def summary_dict(result: SimResult) -> dict:
    return {
        "outcome": result.outcome.value,
        "skip_count": result.skip_count,
        "total_range": result.total_range,
        "skip_events": [ev.to_dict() for ev in result.skip_events],
        "params": result.params,
    }


def write_summary_json(result: SimResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary_dict(result), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
