"""Experiment configuration: dataclass sections mirroring the module types,
with YAML load/save.  Defaults reproduce the reference desk-scale setup
(rock 0.035/0.015 m, 0.25 kg; table 0.25 m; water at 0 m)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import yaml

from .arm import ArmModel, default_arm
from .flight import SimConfig
from .planner import TaskScene
from .skip_dynamics import RockGeometry, WaterModel

# Damping produced by `rockskip calibrate` at default settings (attack angle
# 10 deg, sink threshold half a rock thickness) against the reference skip
# counts {14.4 m/s: 4, 12.6 m/s: 3, 9.9 m/s: 0}.
CALIBRATED_DAMPING = 1.02685546875


class MissingCalibrationError(RuntimeError):
    """Damping coefficient unset; run `rockskip calibrate` first."""


class Mode(str, Enum):
    DIRECT_RELEASE = "direct_release"
    FULL_PIPELINE = "full_pipeline"


@dataclass
class ReleaseConfig:
    """DirectRelease seeding: nose-up attack angle, optional normal spin."""

    height: float = 0.5
    attack_angle: float = math.radians(10.0)
    spin: float = 0.0  # rad/s about the rock normal


@dataclass
class ThrowConfig:
    """Throw-optimization tolerances and swing geometry."""

    eps_p: float = 0.05
    eps_theta: float = 0.05
    eps_v: float = 0.2
    release_fraction: float = 0.8
    omega_transverse_max: float | None = 0.25
    swing_radius: float = 0.7
    follow_through_angle: float = 0.6
    load_radius: float = 0.69
    load_height: float = 0.55


@dataclass
class SweepConfig:
    velocities: list = field(default_factory=lambda: [8.0 + 0.5 * i for i in range(17)])
    heights: list = field(default_factory=lambda: [0.5, 0.75, 1.0])


@dataclass
class ExperimentConfig:
    rock: RockGeometry = field(default_factory=RockGeometry)
    water_density: float = 1000.0
    water_drag_coefficient: float = 0.5
    water_damping_coefficient: float | None = CALIBRATED_DAMPING
    water_surface_height: float = 0.0
    sim: SimConfig = field(default_factory=SimConfig)
    scene: TaskScene = field(default_factory=TaskScene)
    arm: ArmModel = field(default_factory=default_arm)
    release: ReleaseConfig = field(default_factory=ReleaseConfig)
    throw: ThrowConfig = field(default_factory=ThrowConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    mode: Mode = Mode.DIRECT_RELEASE
    output_dir: str = "out"
    seed: int = 0

    def water_model(self) -> WaterModel:
        if self.water_damping_coefficient is None:
            raise MissingCalibrationError(
                "damping_coefficient is not calibrated; run `rockskip calibrate` "
                "and set water.damping_coefficient in the config"
            )
        return WaterModel(
            density=self.water_density,
            drag_coefficient=self.water_drag_coefficient,
            damping_coefficient=self.water_damping_coefficient,
            surface_height=self.water_surface_height,
        )


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "rock": {
            "radius": config.rock.radius,
            "thickness": config.rock.thickness,
            "mass": config.rock.mass,
        },
        "water": {
            "density": config.water_density,
            "drag_coefficient": config.water_drag_coefficient,
            "damping_coefficient": config.water_damping_coefficient,
            "surface_height": config.water_surface_height,
        },
        "sim": {
            "dt_flight": config.sim.dt_flight,
            "dt_contact": config.sim.dt_contact,
            "gravity": list(config.sim.gravity),
            "max_sim_time": config.sim.max_sim_time,
            "sink_depth_threshold": config.sim.sink_depth_threshold,
            "x_extent": config.sim.x_extent,
        },
        "scene": {
            "table_height": config.scene.table_height,
            "rock_thickness": config.scene.rock_thickness,
            "table_edge_position": [float(v) for v in config.scene.table_edge_position],
            "rock_start_position": [float(v) for v in config.scene.rock_start_position],
            "water_surface_height": config.scene.water_surface_height,
        },
        "arm": config.arm.to_dict(),
        "release": {
            "height": config.release.height,
            "attack_angle": config.release.attack_angle,
            "spin": config.release.spin,
        },
        "throw": {
            "eps_p": config.throw.eps_p,
            "eps_theta": config.throw.eps_theta,
            "eps_v": config.throw.eps_v,
            "release_fraction": config.throw.release_fraction,
            "omega_transverse_max": config.throw.omega_transverse_max,
            "swing_radius": config.throw.swing_radius,
            "follow_through_angle": config.throw.follow_through_angle,
            "load_radius": config.throw.load_radius,
            "load_height": config.throw.load_height,
        },
        "sweep": {
            "velocities": list(config.sweep.velocities),
            "heights": list(config.sweep.heights),
        },
        "mode": config.mode.value,
        "output_dir": config.output_dir,
        "seed": config.seed,
    }


def config_from_dict(data: dict) -> ExperimentConfig:
    config = ExperimentConfig()
    if "rock" in data:
        config.rock = RockGeometry(**data["rock"])
    water = data.get("water", {})
    config.water_density = water.get("density", config.water_density)
    config.water_drag_coefficient = water.get(
        "drag_coefficient", config.water_drag_coefficient
    )
    if "damping_coefficient" in water:
        config.water_damping_coefficient = water["damping_coefficient"]
    config.water_surface_height = water.get("surface_height", config.water_surface_height)
    if "sim" in data:
        sim = dict(data["sim"])
        if "gravity" in sim:
            sim["gravity"] = tuple(sim["gravity"])
        config.sim = SimConfig(**sim)
    if "scene" in data:
        scene = dict(data["scene"])
        for key in ("table_edge_position", "rock_start_position"):
            if key in scene:
                scene[key] = np.array(scene[key])
        config.scene = TaskScene(**scene)
    if "arm" in data:
        config.arm = ArmModel.from_dict(data["arm"])
    if "release" in data:
        config.release = ReleaseConfig(**data["release"])
    if "throw" in data:
        config.throw = ThrowConfig(**data["throw"])
    if "sweep" in data:
        config.sweep = SweepConfig(**data["sweep"])
    if "mode" in data:
        config.mode = Mode(data["mode"])
    config.output_dir = data.get("output_dir", config.output_dir)
    config.seed = data.get("seed", config.seed)
    return config


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return config_from_dict(data)


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=True)
