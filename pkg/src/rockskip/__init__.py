"""Rock-skipping simulation and throw-planning toolkit."""

from .skip_dynamics import (
    DegenerateVelocityError,
    ImpactState,
    RockGeometry,
    RockState,
    WaterModel,
    compute_alpha,
    compute_beta,
    compute_damping_force,
    compute_impact_state,
    compute_lift_force,
    compute_total_impact_force,
    compute_wetted_area,
    rock_normal,
)
from .flight import (
    Outcome,
    SimConfig,
    SimResult,
    SimulationDivergedError,
    SkipEvent,
    count_skips,
    simulate_throw,
    step,
)

__all__ = [
    "DegenerateVelocityError",
    "ImpactState",
    "Outcome",
    "RockGeometry",
    "RockState",
    "SimConfig",
    "SimResult",
    "SimulationDivergedError",
    "SkipEvent",
    "WaterModel",
    "compute_alpha",
    "compute_beta",
    "compute_damping_force",
    "compute_impact_state",
    "compute_lift_force",
    "compute_total_impact_force",
    "compute_wetted_area",
    "count_skips",
    "rock_normal",
    "simulate_throw",
    "step",
]

__version__ = "0.1.0"
