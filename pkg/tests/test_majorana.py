"""
Tests for Majorana constellations: polynomial roots, stereographic projection,
round trips and rotation equivariance.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.group_core import HalfInt, Su2Element, adjoint_rotation, exp_vec, random_su2
from src.representations.majorana import (
    NORTH_POLE,
    SOUTH_POLE,
    Constellation,
    SpherePoint,
    constellation_distance,
    constellation_to_state,
    pole_counts,
    random_constellation,
    rotate_constellation,
    sphere_to_stereographic,
    state_to_constellation,
    stereographic_to_sphere,
    write_constellation_svg,
)
from src.representations.schwinger_basis import SpinState, fidelity


@pytest.fixture
def rng():
    return np.random.default_rng(3)


class TestStereographic:

    def test_poles(self):
        assert stereographic_to_sphere(0j) == NORTH_POLE
        assert stereographic_to_sphere(None) == SOUTH_POLE
        assert stereographic_to_sphere(complex(math.inf, 0.0)) == SOUTH_POLE
        assert sphere_to_stereographic(NORTH_POLE) == 0j
        assert math.isinf(sphere_to_stereographic(SOUTH_POLE).real)

    @pytest.mark.parametrize("angle", [0.0, 0.7, 2.5, -1.9])
    def test_unit_circle_is_equator(self, angle):
        point = stereographic_to_sphere(complex(math.cos(angle), math.sin(angle)))
        assert abs(point.z) < 1e-14
        assert abs(point.x - math.cos(angle)) < 1e-14
        assert abs(point.y - math.sin(angle)) < 1e-14

    @pytest.mark.parametrize("zeta", [0.3 - 0.2j, 2.0 + 0j, -4.0 + 7.0j, 50.0 + 20.0j])
    def test_inverse(self, zeta):
        back = sphere_to_stereographic(stereographic_to_sphere(zeta))
        assert abs(back - zeta) <= 1e-10 * max(1.0, abs(zeta))

    def test_outside_disk_goes_south(self):
        point = stereographic_to_sphere(2.0 + 0j)
        assert abs(point.x - 0.8) < 1e-14
        assert abs(point.z + 0.6) < 1e-14

    def test_rejects_non_unit_point(self):
        with pytest.raises(ValueError):
            SpherePoint(1.0, 1.0, 0.0)


class TestConstellation:

    @pytest.mark.parametrize("two_j", [1, 2, 5])
    def test_highest_state_sits_at_north_pole(self, two_j):
        c = state_to_constellation(SpinState.basis(HalfInt(two_j), HalfInt(two_j)))
        assert pole_counts(c) == (two_j, 0)

    @pytest.mark.parametrize("two_j", [1, 2, 5])
    def test_lowest_state_sits_at_south_pole(self, two_j):
        c = state_to_constellation(SpinState.basis(HalfInt(two_j), HalfInt(-two_j)))
        assert pole_counts(c) == (0, two_j)
        assert c.finite_roots == ()

    def test_middle_state_splits_between_poles(self):
        c = state_to_constellation(SpinState.basis(HalfInt(4), HalfInt(0)))
        assert pole_counts(c) == (2, 2)

    def test_spin_half_is_bloch_point(self, rng):
        g = random_su2(rng)
        state = SpinState.basis(HalfInt(1), HalfInt(1)).rotated(g)
        (point,) = state_to_constellation(state).sphere_points()
        expected = adjoint_rotation(g) @ np.array([0.0, 0.0, 1.0])
        assert np.allclose(point.vector, expected, atol=1e-12)

    def test_coherent_state_is_degenerate(self, rng):
        g = random_su2(rng)
        state = SpinState.basis(HalfInt(4), HalfInt(4)).rotated(g)
        expected = adjoint_rotation(g) @ np.array([0.0, 0.0, 1.0])
        for point in state_to_constellation(state).sphere_points():
            # a fourfold root is only resolved to about eps^(1/4)
            assert np.allclose(point.vector, expected, atol=1e-3)

    def test_zero_state_rejected(self):
        with pytest.raises(ValueError):
            state_to_constellation(SpinState(HalfInt(2), np.zeros(3)))

    def test_empty_constellation(self):
        state = constellation_to_state(Constellation(0))
        assert state.j == HalfInt(0)
        assert np.allclose(state.coeffs, [1.0])

    def test_north_pole_points_give_highest_state(self):
        state = constellation_to_state(Constellation(3, (0j, 0j, 0j)))
        assert np.allclose(state.coeffs, [1.0, 0.0, 0.0, 0.0])

    def test_point_count_validated(self):
        with pytest.raises(ValueError):
            Constellation(3, (0j,), 1)

    @pytest.mark.parametrize("two_j", [1, 3, 6, 12])
    def test_round_trip_from_constellation(self, rng, two_j):
        c = random_constellation(two_j, rng)
        back = state_to_constellation(constellation_to_state(c))
        assert constellation_distance(c, back) < 1e-8

    @pytest.mark.parametrize("two_j", [2, 5, 8])
    def test_round_trip_from_state(self, rng, two_j):
        state = SpinState.random(HalfInt(two_j), rng)
        back = constellation_to_state(state_to_constellation(state))
        assert abs(fidelity(state, back) - 1.0) < 1e-10

    def test_phase_convention(self, rng):
        state = constellation_to_state(random_constellation(4, rng))
        assert abs(state.norm - 1.0) < 1e-14
        assert state.coeffs[0].imag == 0.0
        assert state.coeffs[0].real > 0.0

    def test_dict_round_trip(self, rng):
        c = random_constellation(5, rng)
        restored = Constellation.from_dict(c.to_dict())
        assert constellation_distance(c, restored) == 0.0

    def test_distance_needs_same_size(self, rng):
        with pytest.raises(ValueError):
            constellation_distance(random_constellation(2, rng), random_constellation(3, rng))


class TestRotation:

    def test_identity_leaves_points(self, rng):
        c = random_constellation(4, rng)
        assert constellation_distance(rotate_constellation(Su2Element.identity(), c), c) < 1e-14

    def test_z_rotation_is_a_phase(self):
        theta = 0.9
        c = Constellation(4, (0j, 1.5 + 0.5j, -0.2j), 1)
        rotated = rotate_constellation(exp_vec(np.array([0.0, 0.0, theta])), c)
        assert pole_counts(rotated) == pole_counts(c)
        for before, after in zip(c.finite_roots, rotated.finite_roots):
            assert abs(after - np.exp(1j * theta) * before) < 1e-14

    @pytest.mark.parametrize("two_j", [1, 4, 8])
    def test_equivariance(self, rng, two_j):
        state = SpinState.random(HalfInt(two_j), rng)
        g = random_su2(rng)
        moved = rotate_constellation(g, state_to_constellation(state))
        direct = state_to_constellation(state.rotated(g))
        assert constellation_distance(moved, direct) < 1e-8

    def test_south_pole_moves_off(self):
        c = Constellation(2, (), 2)
        rotated = rotate_constellation(exp_vec(np.array([math.pi / 2, 0.0, 0.0])), c)
        assert pole_counts(rotated)[1] == 0
        for point in rotated.sphere_points():
            assert abs(point.z) < 1e-12


class TestSvg:

    def test_writes_file(self, tmp_path, rng):
        path = tmp_path / "constellation.svg"
        write_constellation_svg(random_constellation(3, rng), str(path))
        assert path.read_text(encoding="utf-8").lstrip().startswith("<?xml")
