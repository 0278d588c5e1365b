"""
Tests for the Schwinger carrier space: Y_jm basis, coherent states, ladder
relations, spin states, the Bargmann picture and the SO(3) restriction.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.group_core import (
    EulerAngles,
    GroupTag,
    HalfInt,
    exact_haar_grid,
    random_su2,
    random_su2_batch,
    su2_to_euler,
)
from src.representations import schwinger_basis
from src.representations.schwinger_basis import (
    BargmannPoint,
    BargmannPolynomial,
    SpinState,
    Y_jm,
    Y_jm_element,
    Y_jm_from_coherent,
    Y_jm_from_D,
    bargmann_identity_defects,
    bargmann_inner_product,
    bargmann_quadrature,
    coherent_overlap,
    factorwise_selection_residual,
    fidelity,
    is_even_under_negation,
    ladder_fd_residual,
    left_ladder_coefficient,
    radial_moment_exact,
    radial_weight,
    radial_weight_normalization,
    radial_weight_normalization_numeric,
    right_annihilation_residual,
    rotation_covariance_residual,
    so3_Y,
    so3_Y_closed_form,
    u_jm,
    y_orthonormality_residual,
)
from src.utils.errors import LabelError

HALF = HalfInt(1)
ONE = HalfInt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


class TestMonomials:

    def test_trivial(self):
        assert u_jm(HalfInt(0), HalfInt(0), 0.3 + 0.1j, -2.0) == 1.0

    def test_spin_half_top(self):
        z1 = 0.4 - 0.7j
        assert abs(u_jm(HALF, HALF, z1, 1.3j) - z1) < 1e-15

    def test_spin_one_middle(self):
        a, b = 0.5 + 0.2j, -1.1 + 0.3j
        assert abs(u_jm(ONE, HalfInt(0), a, b) - a * b) < 1e-15

    def test_label_mismatch(self):
        with pytest.raises(LabelError):
            u_jm(ONE, HalfInt(1), 1.0, 1.0)
        with pytest.raises(LabelError):
            u_jm(HALF, HalfInt(3), 1.0, 1.0)

    def test_parity_under_negation(self):
        assert is_even_under_negation(ONE, HalfInt(0), 0.3, 0.8j)
        assert not is_even_under_negation(HALF, HALF, 0.3, 0.8j)


class TestBasisFunctions:

    def test_y00_is_one(self, rng):
        e = su2_to_euler(random_su2(rng))
        assert abs(Y_jm(HalfInt(0), HalfInt(0), e) - 1.0) < 1e-15

    def test_spin_half_closed_form(self):
        alpha, beta, gamma = 0.6, 1.2, 2.9
        expected = math.sqrt(2) * np.exp(0.5j * (alpha - gamma)) * math.sin(beta / 2)
        assert abs(Y_jm(HALF, HALF, EulerAngles(alpha, beta, gamma)) - expected) < 1e-14

    @pytest.mark.parametrize("two_j", [1, 2, 3, 4])
    def test_monomial_matches_d_matrix_form(self, rng, two_j):
        j = HalfInt(two_j)
        g = random_su2(rng)
        for two_m in range(-two_j, two_j + 1, 2):
            m = HalfInt(two_m)
            assert abs(Y_jm_element(j, m, g) - Y_jm_from_D(j, m, g)) < 1e-12

    @pytest.mark.parametrize("two_j", [1, 2, 3])
    def test_coherent_state_form(self, rng, two_j):
        j = HalfInt(two_j)
        e = su2_to_euler(random_su2(rng))
        for two_m in range(-two_j, two_j + 1, 2):
            m = HalfInt(two_m)
            assert abs(Y_jm(j, m, e) - Y_jm_from_coherent(j, m, e)) < 1e-12

    def test_orthonormal_on_exact_grid(self):
        assert y_orthonormality_residual(4, exact_haar_grid(4)) < 1e-12

    def test_factorwise_selection(self):
        assert factorwise_selection_residual(3, exact_haar_grid(3)) < 1e-12


class TestCoherentOverlap:

    def test_trivial(self):
        assert abs(coherent_overlap(HalfInt(0), HalfInt(0), 0.4, 1.0) - 1.0) < 1e-15

    def test_spin_half(self):
        alpha, beta = 0.8, 2.1
        expected = np.exp(-0.5j * alpha) * math.cos(beta / 2)
        assert abs(coherent_overlap(HALF, HALF, alpha, beta) - expected) < 1e-14

    def test_unit_norm(self):
        j = HalfInt(5)
        total = sum(abs(coherent_overlap(j, HalfInt(two_m), 1.3, 0.7)) ** 2 for two_m in range(-5, 6, 2))
        assert abs(total - 1.0) < 1e-13


class TestLadder:

    def test_coefficients(self):
        assert left_ladder_coefficient(HALF, HALF) == -1.0
        assert abs(left_ladder_coefficient(ONE, HalfInt(0)) + math.sqrt(2)) < 1e-15
        assert left_ladder_coefficient(HalfInt(3), HalfInt(-3)) == 0.0

    @pytest.mark.parametrize("two_j,two_m", [(1, 1), (2, 0), (3, -1), (3, -3)])
    def test_finite_difference(self, rng, two_j, two_m):
        g = random_su2(rng)
        assert ladder_fd_residual(HalfInt(two_j), HalfInt(two_m), g) < 1e-7

    def test_trivial_is_annihilated_exactly(self, rng):
        assert right_annihilation_residual(HalfInt(0), HalfInt(0), random_su2(rng)) == 0.0

    @pytest.mark.parametrize("two_j,two_m,tolerance", [(1, 1, 1e-8), (4, 0, 1e-7)])
    def test_right_raising_annihilates(self, rng, two_j, two_m, tolerance):
        for g in random_su2_batch(rng, 20):
            assert right_annihilation_residual(HalfInt(two_j), HalfInt(two_m), g) <= tolerance


class TestSpinState:

    def test_basis(self):
        state = SpinState.basis(ONE, HalfInt(-2))
        assert np.array_equal(state.coeffs, [0, 0, 1])

    def test_wrong_length(self):
        with pytest.raises(LabelError):
            SpinState(ONE, np.ones(2))

    def test_dict_round_trip(self, rng):
        state = SpinState.random(HalfInt(3), rng)
        restored = SpinState.from_dict(state.to_dict())
        assert restored.j == state.j
        assert np.allclose(restored.coeffs, state.coeffs, atol=0)

    def test_malformed_dict(self):
        with pytest.raises(ValueError):
            SpinState.from_dict({"coeffs": []})

    def test_rotation_preserves_norm(self, rng):
        state = SpinState.random(HalfInt(4), rng)
        assert abs(state.rotated(random_su2(rng)).norm - 1.0) < 1e-12

    def test_rotation_is_left_translation(self, rng):
        state = SpinState.random(HalfInt(3), rng)
        g = random_su2(rng)
        assert rotation_covariance_residual(state, g, random_su2_batch(rng, 10)) < 1e-11

    def test_fidelity_ignores_phase(self, rng):
        state = SpinState.random(ONE, rng)
        shifted = SpinState(ONE, np.exp(0.9j) * 3.0 * state.coeffs)
        assert abs(fidelity(state, shifted) - 1.0) < 1e-14

    def test_fidelity_label_mismatch(self, rng):
        with pytest.raises(LabelError):
            fidelity(SpinState.random(ONE, rng), SpinState.random(HALF, rng))


class TestBargmann:

    def test_constant_norm(self):
        one = BargmannPolynomial.constant()
        assert abs(bargmann_inner_product(one, one) - 1.0) < 1e-15

    def test_monomials_orthonormal(self):
        labels = [(two_j, two_m) for two_j in range(5) for two_m in range(-two_j, two_j + 1, 2)]
        for a in labels:
            for b in labels:
                value = bargmann_inner_product(BargmannPolynomial.u(HalfInt(a[0]), HalfInt(a[1])),
                                               BargmannPolynomial.u(HalfInt(b[0]), HalfInt(b[1])))
                assert abs(value - (1.0 if a == b else 0.0)) < 1e-13

    def test_quadrature_matches(self, rng):
        p = BargmannPolynomial.u(ONE, HalfInt(0)) + BargmannPolynomial.u(HALF, HALF).scaled(0.5j)
        q = BargmannPolynomial.u(ONE, HalfInt(0)).scaled(2.0) + BargmannPolynomial.constant(0.3)
        assert abs(bargmann_quadrature(p, q) - bargmann_inner_product(p, q)) < 1e-10

    def test_ladder_operators(self):
        j, m = HalfInt(3), HalfInt(1)
        u = BargmannPolynomial.u(j, m)
        raised = u.j_plus()
        # J+ u_jm = sqrt((j-m)(j+m+1)) u_{j,m+1}
        expected = BargmannPolynomial.u(j, HalfInt(3)).scaled(math.sqrt(1.0 * 3.0))
        assert set(raised.terms) == set(expected.terms)
        for key in expected.terms:
            assert abs(raised.terms[key] - expected.terms[key]) < 1e-14
        assert set(u.j_three().terms) == set(u.terms)
        assert abs(u.j_three().terms[(2, 1)] - 0.5 * u.terms[(2, 1)]) < 1e-15

    def test_lowering_at_bottom(self):
        assert BargmannPolynomial.u(ONE, HalfInt(-2)).j_minus().terms == {}

    def test_point_from_element(self, rng):
        g = random_su2(rng)
        point = BargmannPoint.from_element(g, 1.7)
        assert abs(point.rho_sq - 1.7 ** 2) < 1e-12

    def test_exact_identities(self):
        assert bargmann_identity_defects(12) == []

    def test_exact_identities_catch_a_wrong_moment(self, monkeypatch):
        monkeypatch.setattr(schwinger_basis, "radial_moment_exact", lambda degree: math.factorial(degree + 1) + 1)
        assert len(bargmann_identity_defects(3)) == 1 + 2 + 3 + 4

    @pytest.mark.parametrize("degree", [0, 1, 4, 11])
    def test_radial_moment_is_gamma(self, degree):
        assert radial_moment_exact(degree) == round(math.gamma(degree + 2))

    def test_radial_moment_degree(self):
        with pytest.raises(ValueError):
            radial_moment_exact(-1)


class TestRadialWeight:

    def test_values_at_origin(self):
        assert radial_weight(HalfInt(0), 0.0) == 1.0
        assert radial_weight(HalfInt(3), 0.0) == 0.0

    def test_negative_argument(self):
        with pytest.raises(ValueError):
            radial_weight(HALF, -1.0)

    @pytest.mark.parametrize("two_j", [0, 1, 2, 5])
    def test_normalization(self, two_j):
        assert radial_weight_normalization(HalfInt(two_j)) == 1.0
        assert abs(radial_weight_normalization_numeric(HalfInt(two_j)) - 1.0) < 1e-12


class TestSO3:

    def test_l_zero(self):
        assert abs(so3_Y(0, 0, EulerAngles(0.4, 1.0, 2.0, GroupTag.SO3)) - 1.0) < 1e-15

    @pytest.mark.parametrize("l,m", [(1, 1), (1, 0), (1, -1), (2, 1), (2, -2)])
    def test_matches_closed_form(self, l, m):
        e = EulerAngles(0.7, 1.1, 4.0, GroupTag.SO3)
        assert abs(so3_Y(l, m, e) - so3_Y_closed_form(l, m, e)) < 1e-12

    def test_half_integer_rejected(self):
        with pytest.raises(LabelError):
            so3_Y(HALF, HALF, EulerAngles(0.1, 0.2, 0.3, GroupTag.SO3))
        with pytest.raises(LabelError):
            so3_Y(1.5, 0.5, EulerAngles(0.1, 0.2, 0.3, GroupTag.SO3))

    def test_orthonormal_on_so3_grid(self):
        assert y_orthonormality_residual(4, exact_haar_grid(4, GroupTag.SO3)) < 1e-10
