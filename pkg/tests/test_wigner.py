"""
Tests for Wigner matrices, spin matrices and generator actions.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.group_core import (
    PAULI,
    EulerAngles,
    HalfInt,
    compose,
    exact_haar_grid,
    random_su2,
    su2_from_euler,
    su2_to_euler,
)
from src.core.wigner import (
    LEFT,
    RIGHT,
    big_D,
    casimir_action,
    character,
    check_adjoint_relation,
    generator_derivative,
    generator_fd_residual,
    little_d,
    matrix_exponential_D,
    mixed_derivative_residual,
    orthogonality_residual,
    spin_matrices,
    wigner_matrix,
)
from src.utils.errors import LabelError


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class TestLittleD:

    def test_spin_half(self):
        beta = 0.9
        c, s = math.cos(beta / 2), math.sin(beta / 2)
        assert np.allclose(little_d(HalfInt(1), beta), [[c, -s], [s, c]], atol=1e-15)

    def test_spin_one_center(self):
        beta = 1.234
        assert abs(little_d(HalfInt(2), beta)[1, 1] - math.cos(beta)) < 1e-14

    def test_identity_at_zero(self):
        assert np.allclose(little_d(HalfInt(5), 0.0), np.eye(6), atol=1e-15)

    @pytest.mark.parametrize("two_j", [40, 80, 120])
    def test_large_j_stays_orthogonal(self, two_j):
        d = little_d(HalfInt(two_j), 1.3)
        assert np.max(np.abs(d @ d.T - np.eye(two_j + 1))) < 1e-12

    @pytest.mark.parametrize("two_j", [20, 22, 60])
    def test_both_sides_of_the_switch_match_expm(self, two_j):
        j = HalfInt(two_j)
        expected = matrix_exponential_D(j, EulerAngles(0.0, 2.2, 0.0))
        assert np.max(np.abs(little_d(j, 2.2) - expected)) < 1e-10

    def test_negative_label(self):
        with pytest.raises(LabelError):
            little_d(HalfInt(-1), 0.3)


class TestBigD:

    @pytest.mark.parametrize("two_j", [0, 1, 2, 3, 4])
    def test_matches_matrix_exponential(self, two_j):
        e = EulerAngles(0.7, 1.9, 3.1)
        j = HalfInt(two_j)
        assert np.allclose(big_D(j, e).entries, matrix_exponential_D(j, e), atol=1e-12)

    def test_element_form_matches_euler_form(self, rng):
        g = random_su2(rng)
        j = HalfInt(3)
        assert np.allclose(wigner_matrix(j, g).entries, big_D(j, su2_to_euler(g)).entries, atol=1e-12)

    def test_spin_half_is_defining_matrix(self, rng):
        g = random_su2(rng)
        assert np.allclose(wigner_matrix(HalfInt(1), g).entries, g.matrix(), atol=1e-15)

    def test_homomorphism(self, rng):
        a, b = random_su2(rng), random_su2(rng)
        j = HalfInt(4)
        product = wigner_matrix(j, a).entries @ wigner_matrix(j, b).entries
        assert np.allclose(wigner_matrix(j, compose(a, b)).entries, product, atol=1e-12)

    @pytest.mark.parametrize("two_j", [1, 6, 21])
    def test_unitary(self, rng, two_j):
        assert wigner_matrix(HalfInt(two_j), random_su2(rng)).unitarity_residual() < 1e-11

    @pytest.mark.parametrize("two_j", [80, 120])
    def test_large_j_unitary(self, rng, two_j):
        assert wigner_matrix(HalfInt(two_j), random_su2(rng)).unitarity_residual() < 1e-12

    @pytest.mark.parametrize("two_j", [21, 120])
    def test_large_j_element_form_matches_euler_form(self, rng, two_j):
        g = random_su2(rng)
        j = HalfInt(two_j)
        assert np.max(np.abs(wigner_matrix(j, g).entries - big_D(j, su2_to_euler(g)).entries)) < 1e-10

    def test_large_j_homomorphism(self, rng):
        a, b = random_su2(rng), random_su2(rng)
        j = HalfInt(80)
        product = wigner_matrix(j, a).entries @ wigner_matrix(j, b).entries
        assert np.max(np.abs(wigner_matrix(j, compose(a, b)).entries - product)) < 1e-10

    def test_large_j_at_the_poles(self):
        j = HalfInt(41)
        for e in (EulerAngles(0.4, 0.0, 1.0), EulerAngles(0.4, math.pi, 1.0)):
            assert np.max(np.abs(wigner_matrix(j, su2_from_euler(e)).entries - big_D(j, e).entries)) < 1e-10

    def test_character(self):
        theta = 1.7
        g = su2_from_euler(EulerAngles(0.0, 0.0, theta))
        for two_j in range(5):
            expected = math.sin((two_j + 1) * theta / 2) / math.sin(theta / 2)
            assert abs(character(HalfInt(two_j), g) - expected) < 1e-12

    def test_orthogonality_on_exact_grid(self):
        assert orthogonality_residual(3, exact_haar_grid(3)) < 1e-13


class TestSpinMatrices:

    def test_spin_half_is_half_pauli(self):
        spins = spin_matrices(HalfInt(1))
        for r in range(3):
            assert np.allclose(spins.as_list[r], PAULI[r] / 2)

    def test_spin_zero(self):
        spins = spin_matrices(HalfInt(0))
        for op in spins.as_list:
            assert np.allclose(op, 0.0)

    @pytest.mark.parametrize("two_j", [1, 2, 3, 8])
    def test_algebra(self, two_j):
        spins = spin_matrices(HalfInt(two_j))
        assert spins.commutator_residual() < 1e-13
        assert spins.casimir_residual() < 1e-12
        assert np.allclose(np.diag(spins.J3), [two_j / 2 - k for k in range(two_j + 1)])


class TestGeneratorActions:

    @pytest.mark.parametrize("side", [LEFT, RIGHT])
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_finite_difference_agrees(self, rng, side, r):
        g = random_su2(rng)
        assert generator_fd_residual(HalfInt(3), side, r, g) < 1e-7

    def test_j3_eigenvalues(self, rng):
        g = random_su2(rng)
        j = HalfInt(2)
        d = wigner_matrix(j, g).entries
        m = np.array([1.0, 0.0, -1.0])
        assert np.allclose(generator_derivative(j, LEFT, 3, g), -m[:, None] * d, atol=1e-14)
        assert np.allclose(generator_derivative(j, RIGHT, 3, g), d * m[None, :], atol=1e-14)

    @pytest.mark.parametrize("side", [LEFT, RIGHT])
    def test_casimir(self, rng, side):
        g = random_su2(rng)
        j = HalfInt(3)
        expected = j.value * (j.value + 1) * wigner_matrix(j, g).entries
        assert np.max(np.abs(casimir_action(j, side, g) - expected)) < 1e-5

    def test_left_and_right_commute(self, rng):
        assert mixed_derivative_residual(HalfInt(2), random_su2(rng), 1, 3) < 1e-5

    def test_adjoint_relation(self, rng):
        assert check_adjoint_relation(HalfInt(2), random_su2(rng)) < 1e-7

    def test_bad_side(self, rng):
        with pytest.raises(ValueError):
            generator_derivative(HalfInt(1), "middle", 1, random_su2(rng))
