"""Hydrodynamic skip-force model for a flat cylindrical rock on water.

The contact force on a partially wetted rock is a planing lift along the
rock's upward face normal,

    F_lift = rho * C_D * S_wet * |V|^2 * sin(beta + alpha) * n_hat,

clamped at zero (no suction), plus a linear damping force -D*V for
frictional losses.  ``alpha`` is the attack angle of the rock's face
relative to the water surface (positive when the leading edge, in the
direction of travel, is tilted up, i.e. the face normal leans backward);
``beta`` is the angle of the velocity vector below the horizontal.

All functions are pure and operate on value types, so they are safe to
call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .transforms import is_rotation

_HORIZONTAL_TOL = 1e-12


class DegenerateVelocityError(ValueError):
    """Raised when an angle is requested for a zero velocity vector."""


@dataclass(frozen=True)
class RockGeometry:
    """Flat cylindrical rock (hockey-puck shape)."""

    radius: float = 0.035
    thickness: float = 0.015
    mass: float = 0.25

    def __post_init__(self):
        if self.radius <= 0 or self.thickness <= 0 or self.mass <= 0:
            raise ValueError("rock radius, thickness and mass must be positive")

    @property
    def face_area(self) -> float:
        return math.pi * self.radius**2

    @property
    def inertia_tensor(self) -> np.ndarray:
        """Body-frame inertia of a solid cylinder, axis along body z."""
        m, r, h = self.mass, self.radius, self.thickness
        i_perp = m * (3.0 * r**2 + h**2) / 12.0
        i_axis = 0.5 * m * r**2
        return np.diag([i_perp, i_perp, i_axis])


@dataclass(frozen=True)
class WaterModel:
    """Fluid parameters for the planing-lift and damping forces."""

    density: float = 1000.0
    drag_coefficient: float = 0.5
    damping_coefficient: float = 0.0
    surface_height: float = 0.0

    def __post_init__(self):
        if self.density <= 0 or self.drag_coefficient <= 0:
            raise ValueError("density and drag_coefficient must be positive")
        if self.damping_coefficient < 0:
            raise ValueError("damping_coefficient must be non-negative")


@dataclass
class RockState:
    """Pose and twist of the rock (world frame, orientation as 3x3 matrix)."""

    position: np.ndarray
    orientation: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.orientation = np.asarray(self.orientation, dtype=float)
        self.linear_velocity = np.asarray(self.linear_velocity, dtype=float)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float)
        if self.position.shape != (3,) or self.linear_velocity.shape != (3,):
            raise ValueError("position and linear_velocity must be 3-vectors")
        if self.angular_velocity.shape != (3,):
            raise ValueError("angular_velocity must be a 3-vector")
        if not is_rotation(self.orientation):
            raise ValueError("orientation must be a proper rotation matrix")

    @property
    def body_normal(self) -> np.ndarray:
        """Body +z axis in world coordinates."""
        return self.orientation[:, 2].copy()

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.linear_velocity))


@dataclass(frozen=True)
class ImpactState:
    """Derived contact quantities at one instant."""

    wetted_area: float
    alpha: float
    beta: float
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    in_contact: bool = False


def rock_normal(state: RockState) -> np.ndarray:
    """Upward-facing unit normal of the rock's faces.

    The two faces of the cylinder are equivalent; the force model uses
    whichever normal points up.
    """
    n = state.body_normal
    return -n if n[2] < 0.0 else n


def compute_alpha(state: RockState) -> float:
    """Attack angle between the rock's face plane and the water plane.

    Positive when the leading edge (in the direction of horizontal travel)
    is tilted up; zero when the normal is vertical.  For near-vertical
    motion the tilt azimuth of the normal itself substitutes for the
    direction of travel, so the angle degrades gracefully to minus the
    total tilt.
    """
    n = rock_normal(state)
    h = np.array([state.linear_velocity[0], state.linear_velocity[1], 0.0])
    h_norm = np.linalg.norm(h)
    if h_norm < _HORIZONTAL_TOL:
        h = np.array([n[0], n[1], 0.0])
        h_norm = np.linalg.norm(h)
        if h_norm < _HORIZONTAL_TOL:
            return 0.0
    dot = float(np.clip(np.dot(n, h / h_norm), -1.0, 1.0))
    return math.acos(dot) - math.pi / 2.0


def compute_beta(velocity: np.ndarray) -> float:
    """Angle of the velocity below the horizontal; positive moving down."""
    v = np.asarray(velocity, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed == 0.0:
        raise DegenerateVelocityError("beta is undefined for zero velocity")
    ratio = float(np.clip(-v[2] / speed, -1.0, 1.0))
    return math.pi / 2.0 - math.acos(ratio)


def _submerged_disk_area(center_depth: float, sin_tilt: float, radius: float) -> float:
    """Area of the part of a tilted disk lying at or below depth zero.

    ``center_depth`` is (surface height - disk center z); positive means the
    center is below the surface.  ``sin_tilt`` is the sine of the angle
    between the disk normal and vertical.
    """
    if sin_tilt < 1e-12:
        return math.pi * radius**2 if center_depth >= 0.0 else 0.0
    # signed distance (in-plane) from the disk center to the waterline chord
    d = center_depth / sin_tilt
    if d <= -radius:
        return 0.0
    if d >= radius:
        return math.pi * radius**2
    return radius**2 * math.acos(-d / radius) + d * math.sqrt(radius**2 - d**2)


def compute_wetted_area(state: RockState, geom: RockGeometry, water: WaterModel) -> float:
    """Area of the rock's bottom face lying at or below the water surface."""
    n = rock_normal(state)
    bottom_center_z = state.position[2] - 0.5 * geom.thickness * n[2]
    sin_tilt = math.sqrt(max(0.0, 1.0 - n[2] ** 2))
    return _submerged_disk_area(water.surface_height - bottom_center_z, sin_tilt, geom.radius)


def compute_impact_state(state: RockState, geom: RockGeometry, water: WaterModel) -> ImpactState:
    """Bundle the contact quantities needed by the force model."""
    s_wet = compute_wetted_area(state, geom, water)
    n = rock_normal(state)
    speed = state.speed
    if speed > 0.0:
        beta = compute_beta(state.linear_velocity)
        alpha = compute_alpha(state)
    else:
        beta = 0.0
        alpha = compute_alpha(state)
    return ImpactState(wetted_area=s_wet, alpha=alpha, beta=beta, normal=n, in_contact=s_wet > 0.0)


def compute_lift_force(state: RockState, impact: ImpactState, water: WaterModel) -> np.ndarray:
    """Planing lift along the upward rock normal; zero when not in contact.

    The sin(beta + alpha) factor is clamped at zero: the model never
    produces suction.
    """
    if not impact.in_contact or impact.wetted_area <= 0.0:
        return np.zeros(3)
    speed = state.speed
    if speed == 0.0:
        return np.zeros(3)
    planing = max(0.0, math.sin(impact.beta + impact.alpha))
    magnitude = (
        water.density * water.drag_coefficient * impact.wetted_area * speed**2 * planing
    )
    return magnitude * impact.normal


def compute_damping_force(velocity: np.ndarray, water: WaterModel) -> np.ndarray:
    """Frictional loss force, -D*V; always anti-parallel to the velocity."""
    return -water.damping_coefficient * np.asarray(velocity, dtype=float)


def compute_total_impact_force(state: RockState, geom: RockGeometry, water: WaterModel) -> np.ndarray:
    """Total water force on the rock: lift plus damping while wetted, else zero."""
    impact = compute_impact_state(state, geom, water)
    if not impact.in_contact:
        return np.zeros(3)
    return compute_lift_force(state, impact, water) + compute_damping_force(
        state.linear_velocity, water
    )
