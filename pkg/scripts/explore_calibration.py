"""Scratch exploration of the (attack angle, damping) parameter space.

Used during development to choose the shipped attack-angle default and to
sanity-check the calibration landscape before freezing tests.
"""

import math
import sys
import time

import numpy as np

from rockskip import RockGeometry, RockState, SimConfig, WaterModel, simulate_throw
from rockskip.transforms import rotation_about, YHAT


def release_state(speed, height, attack):
    orientation = rotation_about(YHAT, -attack)
    return RockState(
        position=np.array([0.0, 0.0, height]),
        orientation=orientation,
        linear_velocity=np.array([speed, 0.0, 0.0]),
        angular_velocity=np.zeros(3),
    )


def run(speed, height, attack, damping):
    geom = RockGeometry()
    water = WaterModel(damping_coefficient=damping)
    config = SimConfig(record_samples=False)
    res = simulate_throw(release_state(speed, height, attack), geom, water, config)
    return res


if __name__ == "__main__":
    t0 = time.time()
    res = run(14.4, 0.5, 0.0, 0.0)
    print(f"flat, D=0: skips={res.skip_count} outcome={res.outcome.value} range={res.total_range:.2f} ({time.time()-t0:.2f}s)")

    for attack_deg in (5.0, 10.0, 15.0, 20.0):
        attack = math.radians(attack_deg)
        print(f"--- attack {attack_deg:.0f} deg ---")
        for damping in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
            row = []
            for speed in (14.4, 12.6, 9.9):
                res = run(speed, 0.5, attack, damping)
                row.append(f"{speed}->{res.skip_count}({res.outcome.value[:2]},{res.total_range:.1f}m)")
            print(f"D={damping:5.2f}: " + "  ".join(row))
    print(f"total {time.time()-t0:.1f}s")
