"""Force-model oracles: analytic angle cases, Monte-Carlo wetted area,
direct-arithmetic lift/damping, and the model invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rockskip import (
    DegenerateVelocityError,
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
from rockskip.transforms import XHAT, YHAT, ZHAT, rotation_about

from oracles import qmc_wetted_area

RADIUS = 0.035
GEOM = RockGeometry(radius=RADIUS, thickness=0.015, mass=0.25)
WATER = WaterModel(density=1000.0, drag_coefficient=0.5, damping_coefficient=0.5)


def make_state(position, orientation=None, velocity=(1.0, 0.0, 0.0), omega=(0.0, 0.0, 0.0)):
    return RockState(
        position=np.asarray(position, dtype=float),
        orientation=np.eye(3) if orientation is None else orientation,
        linear_velocity=np.asarray(velocity, dtype=float),
        angular_velocity=np.asarray(omega, dtype=float),
    )


def pitched(attack):
    """Orientation of a rock pitched nose-up by `attack` for +x travel."""
    return rotation_about(YHAT, -attack)


# ---------------------------------------------------------------------------
# geometry / validation
# ---------------------------------------------------------------------------


class TestTypes:
    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            RockGeometry(radius=-1.0)
        with pytest.raises(ValueError):
            RockGeometry(mass=0.0)

    def test_inertia_is_solid_cylinder(self):
        inertia = GEOM.inertia_tensor
        m, r, h = GEOM.mass, GEOM.radius, GEOM.thickness
        assert inertia[2, 2] == pytest.approx(0.5 * m * r**2)
        assert inertia[0, 0] == pytest.approx(m * (3 * r**2 + h**2) / 12.0)
        assert inertia[0, 0] == inertia[1, 1]

    def test_water_validation(self):
        with pytest.raises(ValueError):
            WaterModel(density=0.0)
        with pytest.raises(ValueError):
            WaterModel(damping_coefficient=-0.1)

    def test_state_rejects_improper_rotation(self):
        bad = np.eye(3)
        bad[0, 0] = -1.0  # det = -1
        with pytest.raises(ValueError):
            make_state([0, 0, 1], orientation=bad)

    def test_normal_is_unit_and_upward(self):
        state = make_state([0, 0, 1], orientation=rotation_about(XHAT, 2.5))
        n = rock_normal(state)
        assert np.linalg.norm(n) == pytest.approx(1.0)
        assert n[2] >= 0.0


# ---------------------------------------------------------------------------
# alpha
# ---------------------------------------------------------------------------


class TestAlpha:
    def test_flat_rock_is_zero(self):
        state = make_state([0, 0, 1], velocity=(10, 0, 0))
        assert compute_alpha(state) == pytest.approx(0.0, abs=1e-12)

    def test_nose_up_ten_degrees_positive(self):
        # leading edge (+x travel) tilted up: normal leans backward
        state = make_state([0, 0, 1], orientation=pitched(math.radians(10)), velocity=(10, 0, 0))
        assert compute_alpha(state) == pytest.approx(0.17453, abs=1e-5)

    def test_nose_down_ten_degrees_negative(self):
        state = make_state([0, 0, 1], orientation=pitched(-math.radians(10)), velocity=(10, 0, 0))
        assert compute_alpha(state) == pytest.approx(-0.17453, abs=1e-5)

    def test_magnitude_matches_acos_formula(self):
        # |alpha| = |acos(n.h) - pi/2| for the horizontal travel axis h
        rng = np.random.default_rng(7)
        for _ in range(100):
            tilt = rng.uniform(-1.2, 1.2)
            state = make_state([0, 0, 1], orientation=pitched(tilt), velocity=(5, 0, 0))
            n = rock_normal(state)
            expected = abs(math.acos(np.clip(np.dot(n, XHAT), -1, 1)) - math.pi / 2)
            assert abs(compute_alpha(state)) == pytest.approx(expected, abs=1e-10)

    def test_zero_iff_normal_vertical_for_in_plane_tilts(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            tilt = rng.uniform(-1.0, 1.0)
            state = make_state([0, 0, 1], orientation=pitched(tilt), velocity=(8, 0, 0))
            alpha = compute_alpha(state)
            if abs(tilt) < 1e-9:
                assert abs(alpha) < 1e-9
            else:
                assert abs(alpha) > 1e-9

    def test_generalizes_to_velocity_azimuth(self):
        # same pitch relative to travel, different world azimuth
        base = make_state([0, 0, 1], orientation=pitched(0.2), velocity=(6, 0, 0))
        rz = rotation_about(ZHAT, 1.1)
        rotated = make_state(
            [0, 0, 1], orientation=rz @ pitched(0.2), velocity=rz @ np.array([6.0, 0, 0])
        )
        assert compute_alpha(rotated) == pytest.approx(compute_alpha(base), abs=1e-12)

    def test_vertical_drop_uses_tilt_azimuth(self):
        state = make_state([0, 0, 1], orientation=pitched(0.3), velocity=(0, 0, -5.0))
        # straight-down motion: alpha falls back to minus the total tilt
        assert compute_alpha(state) == pytest.approx(-0.3, abs=1e-12)


# ---------------------------------------------------------------------------
# beta
# ---------------------------------------------------------------------------


class TestBeta:
    def test_horizontal(self):
        assert compute_beta(np.array([10.0, 0, 0])) == pytest.approx(0.0)

    def test_forty_five_down(self):
        assert compute_beta(np.array([10.0, 0, -10.0])) == pytest.approx(math.pi / 4)

    def test_straight_down(self):
        assert compute_beta(np.array([0.0, 0, -5.0])) == pytest.approx(math.pi / 2)

    def test_upward_negative(self):
        assert compute_beta(np.array([10.0, 0, 10.0])) == pytest.approx(-math.pi / 4)

    def test_zero_velocity_degenerate(self):
        with pytest.raises(DegenerateVelocityError):
            compute_beta(np.zeros(3))

    @given(
        vx=st.floats(-50, 50),
        vy=st.floats(-50, 50),
        vz=st.floats(-50, 50),
        azimuth=st.floats(0, 2 * math.pi),
    )
    @settings(max_examples=200, deadline=None)
    def test_invariant_under_z_rotation(self, vx, vy, vz, azimuth):
        v = np.array([vx, vy, vz])
        if np.linalg.norm(v) < 1e-6:
            return
        rotated = rotation_about(ZHAT, azimuth) @ v
        assert compute_beta(rotated) == pytest.approx(compute_beta(v), abs=1e-9)


# ---------------------------------------------------------------------------
# wetted area
# ---------------------------------------------------------------------------


def monte_carlo_wetted_area(state, geom, water, n_samples, seed=0):
    """Brute-force oracle: uniform samples over the bottom face disk."""
    rng = np.random.default_rng(seed)
    n = rock_normal(state)
    center = state.position - 0.5 * geom.thickness * n
    # in-plane orthonormal basis
    helper = XHAT if abs(n[0]) < 0.9 else YHAT
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    radii = geom.radius * np.sqrt(rng.uniform(0, 1, n_samples))
    angles = rng.uniform(0, 2 * math.pi, n_samples)
    pts_z = (
        center[2]
        + radii * np.cos(angles) * e1[2]
        + radii * np.sin(angles) * e2[2]
    )
    frac = np.mean(pts_z <= water.surface_height)
    return frac * geom.face_area


class TestWettedArea:
    def test_fully_submerged_face(self):
        state = make_state([0, 0, -0.01 + 0.5 * GEOM.thickness])
        assert compute_wetted_area(state, GEOM, WATER) == pytest.approx(math.pi * RADIUS**2)

    def test_half_submerged_tilted_face_through_center(self):
        # waterline through the bottom-face center, face tilted
        orientation = pitched(0.4)
        n = orientation[:, 2]
        position = 0.5 * GEOM.thickness * n  # bottom-face center at origin
        state = make_state(position, orientation=orientation, velocity=(1, 0, 0))
        assert compute_wetted_area(state, GEOM, WATER) == pytest.approx(
            math.pi * RADIUS**2 / 2, rel=1e-9
        )

    def test_dry_face(self):
        state = make_state([0, 0, 0.5])
        assert compute_wetted_area(state, GEOM, WATER) == 0.0

    def test_chord_at_half_radius_matches_segment_area(self):
        # waterline chord at in-plane distance r/2 from the face center,
        # once with the center wetted and once with it dry
        tilt = 0.5
        orientation = pitched(tilt)
        n = orientation[:, 2]
        d = 0.5 * RADIUS
        for sign in (+1.0, -1.0):
            position = 0.5 * GEOM.thickness * n - sign * np.array([0, 0, d * math.sin(tilt)])
            state = make_state(position, orientation=orientation, velocity=(1, 0, 0))
            got = compute_wetted_area(state, GEOM, WATER)
            sd = sign * d
            segment = RADIUS**2 * math.acos(-sd / RADIUS) + sd * math.sqrt(RADIUS**2 - d**2)
            assert got == pytest.approx(segment, rel=1e-9)
            qmc = qmc_wetted_area(state, GEOM, WATER, n_power=20, seed=42)
            assert got == pytest.approx(qmc, rel=1e-3)

    def test_monte_carlo_oracle_on_random_poses(self):
        # acceptance-grade check lives in test_acceptance; keep a quick version here
        rng = np.random.default_rng(11)
        for i in range(20):
            orientation = rotation_about(
                np.array([rng.normal(), rng.normal(), rng.normal()]), rng.uniform(0, math.pi)
            )
            z = rng.uniform(-0.05, 0.05)
            state = make_state([0, 0, z], orientation=orientation, velocity=(1, 0, 0))
            area = compute_wetted_area(state, GEOM, WATER)
            mc = monte_carlo_wetted_area(state, GEOM, WATER, 200_000, seed=i)
            assert area == pytest.approx(mc, abs=2e-3 * GEOM.face_area)

    @given(z=st.floats(-0.2, 0.2), tilt=st.floats(-1.5, 1.5))
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, z, tilt):
        state = make_state([0, 0, z], orientation=pitched(tilt), velocity=(1, 0, 0))
        area = compute_wetted_area(state, GEOM, WATER)
        assert 0.0 <= area <= math.pi * RADIUS**2 + 1e-15


# ---------------------------------------------------------------------------
# lift / damping / total force
# ---------------------------------------------------------------------------


class TestLift:
    def test_zero_wetted_area_gives_zero(self):
        state = make_state([0, 0, 0.5], velocity=(10, 0, -1))
        impact = compute_impact_state(state, GEOM, WATER)
        assert not impact.in_contact
        assert np.allclose(compute_lift_force(state, impact, WATER), 0.0)

    def test_table_case_arithmetic(self):
        # flat rock, fully wetted, V = (14.4, 0, -1.0): direct arithmetic oracle
        state = make_state([0, 0, -0.005], velocity=(14.4, 0, -1.0))
        impact = compute_impact_state(state, GEOM, WATER)
        assert impact.in_contact
        assert impact.wetted_area == pytest.approx(math.pi * RADIUS**2)
        speed = math.sqrt(14.4**2 + 1.0)
        beta = math.asin(1.0 / speed)
        expected = 1000.0 * 0.5 * math.pi * RADIUS**2 * speed**2 * math.sin(beta)
        force = compute_lift_force(state, impact, WATER)
        assert force[0] == 0.0 and force[1] == 0.0
        assert force[2] == pytest.approx(expected, rel=1e-12)
        assert force[2] == pytest.approx(27.8, rel=0.01)  # ~= 27.76 N

    def test_aligned_plane_clamps_to_zero(self):
        # rock plane parallel to velocity: beta + alpha = 0 exactly
        tilt = 0.15
        state = make_state(
            [0, 0, -0.002],
            orientation=pitched(-tilt),
            velocity=(10 * math.cos(tilt), 0, -10 * math.sin(tilt)),
        )
        impact = compute_impact_state(state, GEOM, WATER)
        assert impact.in_contact
        assert impact.beta + impact.alpha == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(compute_lift_force(state, impact, WATER), 0.0)

    def test_never_suction(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            state = make_state(
                [0, 0, rng.uniform(-0.03, 0.01)],
                orientation=pitched(rng.uniform(-1.0, 1.0)),
                velocity=rng.normal(0, 8, 3),
            )
            impact = compute_impact_state(state, GEOM, WATER)
            force = compute_lift_force(state, impact, WATER)
            assert np.dot(force, impact.normal) >= 0.0

    def test_scaling_linear_in_density_cd_area_quadratic_in_speed(self):
        state = make_state([0, 0, -0.005], velocity=(9.0, 0, -2.0))
        impact = compute_impact_state(state, GEOM, WATER)
        base = compute_lift_force(state, impact, WATER)

        water2 = WaterModel(density=2000.0, drag_coefficient=0.5, damping_coefficient=0.5)
        assert np.allclose(compute_lift_force(state, impact, water2), 2.0 * base)

        water3 = WaterModel(density=1000.0, drag_coefficient=1.5, damping_coefficient=0.5)
        assert np.allclose(compute_lift_force(state, impact, water3), 3.0 * base)

        import dataclasses

        half_area = dataclasses.replace(impact, wetted_area=impact.wetted_area / 2)
        assert np.allclose(compute_lift_force(state, half_area, WATER), 0.5 * base)

        fast = make_state([0, 0, -0.005], velocity=(18.0, 0, -4.0))
        impact_fast = compute_impact_state(fast, GEOM, WATER)
        assert np.allclose(compute_lift_force(fast, impact_fast, WATER), 4.0 * base)


class TestDamping:
    def test_zero_velocity(self):
        assert np.allclose(compute_damping_force(np.zeros(3), WATER), 0.0)

    def test_direct_arithmetic(self):
        water = WaterModel(damping_coefficient=0.5)
        force = compute_damping_force(np.array([10.0, 0.0, -2.0]), water)
        assert np.allclose(force, [-5.0, 0.0, 1.0])

    def test_zero_coefficient(self):
        water = WaterModel(damping_coefficient=0.0)
        assert np.allclose(compute_damping_force(np.array([37.0, -1.0, 4.0]), water), 0.0)

    @given(vx=st.floats(-30, 30), vy=st.floats(-30, 30), vz=st.floats(-30, 30))
    @settings(max_examples=200, deadline=None)
    def test_never_adds_energy(self, vx, vy, vz):
        v = np.array([vx, vy, vz])
        assert np.dot(compute_damping_force(v, WATER), v) <= 0.0


class TestTotalForce:
    def test_airborne_zero(self):
        state = make_state([0, 0, 1.0], velocity=(14, 0, -3))
        assert np.allclose(compute_total_impact_force(state, GEOM, WATER), 0.0)

    def test_contact_is_vector_sum(self):
        state = make_state([0, 0, -0.005], velocity=(12.0, 0.5, -2.0))
        impact = compute_impact_state(state, GEOM, WATER)
        expected = compute_lift_force(state, impact, WATER) + compute_damping_force(
            state.linear_velocity, WATER
        )
        assert np.allclose(compute_total_impact_force(state, GEOM, WATER), expected)

    def test_flat_horizontal_touch_is_damping_only(self):
        state = make_state([0, 0, -0.001], velocity=(10.0, 0, 0.0))
        impact = compute_impact_state(state, GEOM, WATER)
        assert impact.beta == pytest.approx(0.0)
        assert impact.alpha == pytest.approx(0.0)
        force = compute_total_impact_force(state, GEOM, WATER)
        assert np.allclose(force, compute_damping_force(state.linear_velocity, WATER))

    def test_in_contact_iff_positive_area(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            state = make_state(
                [0, 0, rng.uniform(-0.02, 0.04)],
                orientation=pitched(rng.uniform(-0.8, 0.8)),
                velocity=(5, 0, -1),
            )
            impact = compute_impact_state(state, GEOM, WATER)
            assert impact.in_contact == (impact.wetted_area > 0.0)
