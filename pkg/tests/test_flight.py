"""Flight-simulator checks: analytic projectile oracle, energy behavior,
contact episodes, determinism, and trajectory I/O round-trips."""

import math

import numpy as np
import pytest

from rockskip import (
    Outcome,
    RockGeometry,
    RockState,
    SimConfig,
    SimulationDivergedError,
    WaterModel,
    count_skips,
    simulate_throw,
    step,
)
from rockskip.flight import (
    read_summary_json,
    read_trajectory_csv,
    summary_dict,
    write_summary_json,
    write_trajectory_csv,
)
from rockskip.transforms import YHAT, rotation_about

from oracles import projectile_position, projectile_velocity

GEOM = RockGeometry()
WATER = WaterModel(damping_coefficient=1.0)
GRAVITY = np.array([0.0, 0.0, -9.81])


def release(speed=14.4, height=0.5, attack=math.radians(10.0), omega=(0, 0, 0)):
    return RockState(
        position=np.array([0.0, 0.0, height]),
        orientation=rotation_about(YHAT, -attack),
        linear_velocity=np.array([speed, 0.0, 0.0]),
        angular_velocity=np.asarray(omega, dtype=float),
    )


class TestStep:
    def test_free_fall_matches_half_g_t_squared(self):
        state = RockState(np.array([0, 0, 10.0]), np.eye(3), np.zeros(3), np.zeros(3))
        dt = 1e-3
        out = step(state, GEOM, WATER, SimConfig(), dt)
        assert out.position[2] == pytest.approx(10.0 - 0.5 * 9.81 * dt**2, abs=1e-12)

    def test_airborne_flight_matches_projectile_oracle(self):
        config = SimConfig()
        state = RockState(np.array([0, 0, 30.0]), np.eye(3), np.array([10.0, 0, 0]), np.zeros(3))
        t = 0.0
        for _ in range(1000):
            state = step(state, GEOM, WATER, config, config.dt_flight)
            t += config.dt_flight
        expected = projectile_position([0, 0, 30.0], [10.0, 0, 0], GRAVITY, t)
        assert np.linalg.norm(state.position - expected) < 1e-6
        expected_v = projectile_velocity([10.0, 0, 0], GRAVITY, t)
        assert np.linalg.norm(state.linear_velocity - expected_v) < 1e-9

    def test_pure_damping_contact_drains_kinetic_energy(self):
        # submerged flat rock moving horizontally: lift = 0, damping only
        state = RockState(
            np.array([0, 0, 0.0]), np.eye(3), np.array([5.0, 0, 0]), np.zeros(3)
        )
        out = step(state, GEOM, WATER, SimConfig(), 1e-4)
        ke0 = 0.5 * GEOM.mass * state.speed**2
        # remove the gravity work to isolate the damping effect
        ke1 = 0.5 * GEOM.mass * (out.linear_velocity[0] ** 2 + out.linear_velocity[1] ** 2)
        assert ke1 < 0.5 * GEOM.mass * 25.0
        assert ke1 < ke0

    def test_rejects_nonpositive_dt(self):
        state = release()
        with pytest.raises(ValueError):
            step(state, GEOM, WATER, SimConfig(), 0.0)

    def test_diverged_state_raises(self):
        state = RockState(np.array([0, 0, 1.0]), np.eye(3), np.array([1e200, 0, 0]), np.zeros(3))
        absurd = WaterModel(damping_coefficient=1e300)
        sub = RockState(np.array([0, 0, -0.001]), np.eye(3), np.array([1e200, 0, 0]), np.zeros(3))
        with pytest.raises(SimulationDivergedError):
            for _ in range(50):
                sub = step(sub, GEOM, absurd, SimConfig(), 1.0)

    def test_spin_advances_orientation(self):
        state = release(omega=(0, 0, 2.0))
        out = step(state, GEOM, WATER, SimConfig(), 0.1)
        rel = out.orientation @ state.orientation.T
        angle = math.acos(np.clip((np.trace(rel) - 1) / 2, -1, 1))
        assert angle == pytest.approx(0.2, abs=1e-9)
        assert np.allclose(out.angular_velocity, state.angular_velocity)


class TestEnergyAndConvergence:
    def test_vacuum_energy_conserved_over_two_seconds(self):
        # airborne throughout: water force identically zero
        config = SimConfig()
        state = RockState(np.array([0, 0, 40.0]), np.eye(3), np.array([5.0, 0, 2.0]), np.zeros(3))

        def energy(s):
            return 0.5 * GEOM.mass * s.speed**2 + GEOM.mass * 9.81 * s.position[2]

        e0 = energy(state)
        for _ in range(2000):
            state = step(state, GEOM, WATER, config, config.dt_flight)
        assert abs(energy(state) - e0) / e0 < 1e-6
        assert state.position[2] > 0.5  # stayed airborne

    def test_halving_steps_changes_range_below_one_percent(self):
        for speed in (14.4, 12.6, 9.9):
            r1 = simulate_throw(
                release(speed), GEOM, WATER, SimConfig(record_samples=False)
            )
            r2 = simulate_throw(
                release(speed),
                GEOM,
                WATER,
                SimConfig(dt_flight=5e-4, dt_contact=5e-5, record_samples=False),
            )
            assert abs(r2.total_range - r1.total_range) <= 0.01 * abs(r1.total_range)
            assert r1.skip_count == r2.skip_count

    def test_horizontal_kinetic_energy_never_increases_during_contact(self):
        result = simulate_throw(release(14.4), GEOM, WATER, SimConfig())
        from rockskip import compute_wetted_area

        prev_hke = None
        for _, st in result.samples:
            wet = compute_wetted_area(st, GEOM, WATER) > 0.0
            hke = st.linear_velocity[0] ** 2 + st.linear_velocity[1] ** 2
            if wet and prev_hke is not None:
                assert hke <= prev_hke * (1 + 1e-12)
            prev_hke = hke if wet else None


class TestSimulateThrow:
    def test_requires_airborne_start(self):
        sunk = RockState(np.array([0, 0, -0.1]), np.eye(3), np.array([5.0, 0, 0]), np.zeros(3))
        with pytest.raises(ValueError):
            simulate_throw(sunk, GEOM, WATER, SimConfig())

    def test_table_row_14_4_gives_four_skips(self):
        result = simulate_throw(release(14.4), GEOM, WATER, SimConfig())
        assert count_skips(result) == 4
        assert result.outcome is Outcome.SKIPPED

    def test_table_row_12_6_gives_three_skips(self):
        result = simulate_throw(release(12.6), GEOM, WATER, SimConfig())
        assert count_skips(result) == 3

    def test_table_row_9_9_sinks_without_skipping(self):
        result = simulate_throw(release(9.9), GEOM, WATER, SimConfig())
        assert count_skips(result) == 0
        assert result.outcome is Outcome.SANK

    def test_straight_down_plunge_no_skips(self):
        state = RockState(
            np.array([0, 0, 0.5]), np.eye(3), np.array([0.0, 0, -20.0]), np.zeros(3)
        )
        result = simulate_throw(state, GEOM, WATER, SimConfig())
        assert count_skips(result) == 0
        assert result.outcome is Outcome.SANK

    def test_samples_strictly_increasing(self):
        result = simulate_throw(release(12.6), GEOM, WATER, SimConfig())
        times = [t for t, _ in result.samples]
        assert all(t1 > t0 for t0, t1 in zip(times, times[1:]))

    def test_skip_events_well_formed(self):
        result = simulate_throw(release(14.4), GEOM, WATER, SimConfig())
        for i, ev in enumerate(result.skip_events):
            assert ev.index == i
            assert ev.exit_time > ev.entry_time
            assert ev.exit_position[2] >= WATER.surface_height - 1e-9

    def test_deterministic_bitwise(self):
        r1 = simulate_throw(release(14.4), GEOM, WATER, SimConfig())
        r2 = simulate_throw(release(14.4), GEOM, WATER, SimConfig())
        assert r1.total_range == r2.total_range
        assert len(r1.samples) == len(r2.samples)
        for (t1, s1), (t2, s2) in zip(r1.samples[::100], r2.samples[::100]):
            assert t1 == t2
            assert np.array_equal(s1.position, s2.position)
            assert np.array_equal(s1.linear_velocity, s2.linear_velocity)

    def test_skip_count_monotone_in_release_speed(self):
        counts = []
        for i in range(17):
            speed = 8.0 + 0.5 * i
            result = simulate_throw(
                release(speed), GEOM, WATER, SimConfig(record_samples=False)
            )
            counts.append(result.skip_count)
        assert counts == sorted(counts)

    def test_flew_out_outcome(self):
        config = SimConfig(x_extent=3.0, record_samples=False)
        result = simulate_throw(release(14.4), GEOM, WATER, config)
        assert result.outcome is Outcome.FLEW_OUT

    def test_timeout_outcome(self):
        config = SimConfig(max_sim_time=0.05, record_samples=False)
        result = simulate_throw(release(14.4), GEOM, WATER, config)
        assert result.outcome is Outcome.TIMED_OUT


class TestTrajectoryIO:
    def test_csv_round_trip(self, tmp_path):
        result = simulate_throw(release(12.6), GEOM, WATER, SimConfig())
        path = tmp_path / "traj.csv"
        write_trajectory_csv(result, GEOM, WATER, path)
        rows = read_trajectory_csv(path)
        assert len(rows) == len(result.samples)
        t0, s0 = result.samples[0]
        assert rows[0]["t"] == t0
        assert rows[0]["x"] == s0.position[0]
        assert rows[0]["qw"] == pytest.approx(1.0 - 0.0, abs=0.01)  # near-flat release
        t_last, s_last = result.samples[-1]
        assert rows[-1]["z"] == s_last.position[2]
        assert set(rows[0]) == {
            "t", "x", "y", "z", "vx", "vy", "vz",
            "qw", "qx", "qy", "qz", "wetted_area", "in_contact",
        }

    def test_summary_round_trip(self, tmp_path):
        result = simulate_throw(release(14.4), GEOM, WATER, SimConfig())
        path = tmp_path / "summary.json"
        write_summary_json(result, path)
        loaded = read_summary_json(path)
        assert loaded == summary_dict(result)
        assert loaded["outcome"] == "skipped"
        assert loaded["skip_count"] == 4
        assert loaded["params"]["water"]["damping_coefficient"] == 1.0
