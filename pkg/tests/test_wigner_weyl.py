"""
Tests for the Wigner-Weyl layer: momentum operators, regular representations,
commutants, Weyl symbols, trace pairings, covariance and Schur averaging.

Pairings that evaluate numeric symbols on a full Haar grid are marked slow.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.group_core import (
    HalfInt,
    Su2Element,
    compose,
    exact_haar_grid,
    haar_grid,
    inverse,
    random_su2,
    random_su2_batch,
)
from src.core.wigner import LEFT, RIGHT
from src.phase_space.wigner_weyl import (
    BlockSymbolOperator,
    FourierCoeffs,
    MomentumIndex,
    MomentumOperator,
    SymbolOption,
    WeylSymbol,
    basis_vector,
    block_scalar_residual,
    block_symbol,
    block_trace_pairing,
    character_partial_sum,
    commutant_operator,
    commutant_operator_quadrature,
    commutant_symbol,
    completeness_residual,
    covariance_check,
    exponential_grid,
    flat_index,
    fourier_roundtrip_residual,
    momentum_dimension,
    momentum_indices,
    plancherel_pairing,
    plancherel_quadrature,
    rank_one_operator,
    regular_matrix,
    schur_average,
    sr_dimension,
    sr_image,
    sr_representation,
    symbol_at,
    symbol_grid,
    symbol_trace_pairing,
    symbol_trace_terms,
    weyl_symbol,
)
from src.utils.errors import GridError, LabelError


@pytest.fixture
def rng():
    return np.random.default_rng(99)


@pytest.fixture(scope="module")
def xgrid():
    return exponential_grid()


def difference(a: MomentumOperator, b: MomentumOperator) -> float:
    return float(np.max(np.abs(a.matrix - b.matrix)))


class TestMomentumLabels:

    def test_dimensions(self):
        assert momentum_dimension(0) == 1
        assert momentum_dimension(2) == 14
        assert sr_dimension(2) == 6

    def test_flat_order(self):
        half = HalfInt(1)
        assert flat_index(MomentumIndex(HalfInt(0), HalfInt(0), HalfInt(0))) == 0
        assert flat_index(MomentumIndex(half, half, -half)) == 2
        assert flat_index(MomentumIndex(half, -half, half)) == 3
        labels = momentum_indices(3)
        assert [flat_index(label) for label in labels] == list(range(momentum_dimension(3)))

    def test_invalid_label(self):
        with pytest.raises(LabelError):
            MomentumIndex(HalfInt(2), HalfInt(1), HalfInt(0))

    def test_basis_vector_above_truncation(self):
        with pytest.raises(LabelError):
            basis_vector(MomentumIndex(HalfInt(2), HalfInt(0), HalfInt(0)), 1)

    def test_operator_shape_checked(self):
        with pytest.raises(ValueError):
            MomentumOperator(1, np.zeros((4, 4)))

    def test_truncation_mismatch(self):
        with pytest.raises(ValueError):
            MomentumOperator.identity(1) @ MomentumOperator.identity(2)

    def test_rank_one_needs_vector(self):
        with pytest.raises(ValueError):
            rank_one_operator(np.zeros(5), 1)


class TestRegularRepresentations:

    @pytest.mark.parametrize("side", [LEFT, RIGHT])
    def test_identity(self, side):
        op = regular_matrix(side, Su2Element.identity(), 3)
        assert difference(op, MomentumOperator.identity(3)) < 1e-14

    @pytest.mark.parametrize("side", [LEFT, RIGHT])
    def test_unitary_homomorphism(self, rng, side):
        g1, g2 = random_su2_batch(rng, 2)
        u1, u2 = regular_matrix(side, g1, 3), regular_matrix(side, g2, 3)
        assert difference(u1 @ u1.adjoint(), MomentumOperator.identity(3)) < 1e-12
        assert difference(u1 @ u2, regular_matrix(side, compose(g1, g2), 3)) < 1e-12

    def test_left_and_right_commute(self, rng):
        left = regular_matrix(LEFT, random_su2(rng), 3)
        right = regular_matrix(RIGHT, random_su2(rng), 3)
        assert difference(left @ right, right @ left) < 1e-12

    def test_truncated_trace_is_character_sum(self, rng):
        g1, g2 = random_su2_batch(rng, 2)
        product = regular_matrix(RIGHT, g1, 4) @ regular_matrix(RIGHT, g2, 4)
        expected = character_partial_sum(compose(g1, g2), 4)
        assert abs(product.trace() - expected) < 1e-10 * max(1.0, abs(expected))

    def test_bad_side(self):
        with pytest.raises(ValueError):
            regular_matrix("up", Su2Element.identity(), 1)


class TestFourierCoeffs:

    def test_roundtrip(self, rng):
        assert fourier_roundtrip_residual(FourierCoeffs.random(rng, 3)) < 1e-11

    def test_completeness(self, rng):
        f = FourierCoeffs.random(rng, 2)
        assert completeness_residual(f, random_su2_batch(rng, 3)) < 1e-10

    def test_plancherel(self, rng):
        f, h = FourierCoeffs.random(rng, 2), FourierCoeffs.random(rng, 2)
        expected = plancherel_pairing(f, h)
        assert abs(plancherel_quadrature(f, h, symbol_grid(2)) - expected) < 1e-10 * abs(expected)

    def test_block_count_checked(self):
        with pytest.raises(ValueError):
            FourierCoeffs(2, (np.ones((1, 1)), np.ones((2, 2))))

    def test_constant_function(self):
        f = FourierCoeffs.constant(2.5, 3)
        assert abs(f.value(Su2Element.identity()) - 2.5) < 1e-14


class TestCommutant:

    def test_closed_form_matches_quadrature(self, rng):
        f = FourierCoeffs.random(rng, 3)
        closed = commutant_operator(f)
        assert difference(closed, commutant_operator_quadrature(f, exact_haar_grid(3))) < 1e-10

    def test_matrix_elements(self, rng):
        f = FourierCoeffs.random(rng, 2)
        j = HalfInt(2)
        op = commutant_operator(f)
        row = MomentumIndex(j, HalfInt(0), HalfInt(2))
        col = MomentumIndex(j, HalfInt(0), HalfInt(-2))
        assert abs(op.element(row, col) - f.block(2)[0, 2] / math.sqrt(3)) < 1e-14
        other = MomentumIndex(j, HalfInt(2), HalfInt(-2))
        assert op.element(row, other) == 0

    def test_point_mass_is_right_translation(self, rng):
        g0 = random_su2(rng)
        op = commutant_operator(FourierCoeffs.point_mass(g0, 3))
        assert difference(op, regular_matrix(RIGHT, g0, 3)) < 1e-12

    def test_constant_projects_on_trivial_sector(self):
        op = commutant_operator(FourierCoeffs.constant(2.5, 2))
        expected = np.zeros((14, 14), dtype=complex)
        expected[0, 0] = 2.5
        assert np.allclose(op.matrix, expected, atol=1e-15)

    def test_commutes_with_left_translations(self, rng):
        a = commutant_operator(FourierCoeffs.random(rng, 3))
        for g in random_su2_batch(rng, 3):
            u = regular_matrix(LEFT, g, 3)
            assert difference(a @ u, u @ a) < 1e-10


class TestSymbols:

    def test_commutant_symbol_is_constant(self, rng, xgrid):
        f = FourierCoeffs.random(rng, 2)
        symbol = symbol_at(commutant_operator(f), random_su2_batch(rng, 4), xgrid=xgrid)
        assert symbol.g_dependence() < 1e-6
        for two_j, block in enumerate(symbol.blocks):
            expected = f.block(two_j).T / math.sqrt(two_j + 1)
            assert np.max(np.abs(block - expected)) < 1e-6

    def test_right_translation_symbol(self, rng, xgrid):
        g0 = random_su2(rng)
        symbol = symbol_at(regular_matrix(RIGHT, g0, 1), random_su2_batch(rng, 3), xgrid=xgrid)
        expected = sr_representation(g0, 1)
        packed = block_symbol(symbol).packed()
        assert np.max(np.abs(packed - expected[None, :, :])) < 1e-6

    def test_numeric_matches_closed_form_option_one(self, rng, xgrid):
        f = FourierCoeffs.random(rng, 1)
        grid = haar_grid(2, 2, 3)
        numeric = weyl_symbol(commutant_operator(f), grid=grid, option=SymbolOption.I, xgrid=xgrid)
        closed = commutant_symbol(f, grid, SymbolOption.I)
        assert numeric.max_difference(closed) < 1e-6

    def test_zero_operator(self, xgrid):
        symbol = weyl_symbol(MomentumOperator.zero(1), xgrid=xgrid)
        assert max(float(np.max(np.abs(block))) for block in symbol.blocks) == 0.0
        assert symbol_trace_pairing(symbol, symbol) == 0
        assert symbol.accuracy_warning is None

    def test_coarse_grid_is_flagged(self, xgrid):
        symbol = weyl_symbol(MomentumOperator.zero(2), grid=haar_grid(1, 1, 1), xgrid=xgrid)
        assert symbol.accuracy_warning

    def test_symbol_dict(self, rng):
        f = FourierCoeffs.random(rng, 1)
        data = commutant_symbol(f, haar_grid(1, 2, 1)).to_dict()
        assert data["option"] == "II"
        assert len(data["nodes"]) == 2
        assert set(data["nodes"][0]["blocks"]) == {"0", "1/2"}


class TestTracePairing:

    @pytest.mark.parametrize("option", list(SymbolOption))
    def test_closed_form_pairing_is_plancherel(self, rng, option):
        grid = symbol_grid(2)
        f, h = FourierCoeffs.random(rng, 2), FourierCoeffs.random(rng, 2)
        expected = plancherel_pairing(f, h)
        paired = symbol_trace_pairing(commutant_symbol(f, grid, option), commutant_symbol(h, grid, option))
        assert abs(paired - expected) < 1e-8 * abs(expected)
        operator_trace = (commutant_operator(f) @ commutant_operator(h)).trace()
        assert abs(operator_trace - expected) < 1e-10 * abs(expected)

    def test_dropping_dimension_weights_changes_result(self, rng):
        grid = symbol_grid(2)
        g0 = random_su2(rng)
        a = commutant_symbol(FourierCoeffs.point_mass(g0, 2), grid)
        b = commutant_symbol(FourierCoeffs.point_mass(inverse(g0), 2), grid)
        weighted = symbol_trace_pairing(a, b)
        unweighted = symbol_trace_pairing(a, b, n_weighted=False)
        # Tr(U~(g0) U~(g0^-1)) on j <= 1 is sum N_j^2
        assert abs(weighted - 14.0) < 1e-10
        assert abs(unweighted - 6.0) < 1e-10

    def test_terms_sum_to_pairing(self, rng):
        grid = symbol_grid(1)
        f = FourierCoeffs.random(rng, 1)
        symbol = commutant_symbol(f, grid)
        assert abs(sum(symbol_trace_terms(symbol, symbol)) - symbol_trace_pairing(symbol, symbol)) < 1e-12

    def test_grid_mismatch(self, rng):
        f = FourierCoeffs.random(rng, 1)
        with pytest.raises(GridError):
            symbol_trace_pairing(commutant_symbol(f, symbol_grid(1)), commutant_symbol(f, symbol_grid(2)))

    def test_option_mismatch(self, rng):
        f = FourierCoeffs.random(rng, 1)
        grid = symbol_grid(1)
        with pytest.raises(GridError):
            symbol_trace_pairing(commutant_symbol(f, grid, SymbolOption.I),
                                 commutant_symbol(f, grid, SymbolOption.II))

    def test_pairing_needs_haar_grid(self, rng, xgrid):
        symbol = symbol_at(MomentumOperator.zero(0), [Su2Element.identity()], xgrid=xgrid)
        with pytest.raises(GridError):
            symbol_trace_pairing(symbol, symbol)

    @pytest.mark.slow
    def test_numeric_commutant_pairing(self, rng, xgrid):
        f, h = FourierCoeffs.random(rng, 1), FourierCoeffs.random(rng, 1)
        wa = weyl_symbol(commutant_operator(f), xgrid=xgrid)
        wb = weyl_symbol(commutant_operator(h), xgrid=xgrid)
        expected = plancherel_pairing(f, h)
        assert abs(symbol_trace_pairing(wa, wb) - expected) < 1e-6 * abs(expected)

    @pytest.mark.slow
    def test_vacuum_projector(self):
        vacuum = MomentumIndex(HalfInt(0), HalfInt(0), HalfInt(0))
        op = rank_one_operator(basis_vector(vacuum, 2), 2)
        symbol = weyl_symbol(op)
        assert abs(symbol_trace_pairing(symbol, symbol) - 1.0) < 1e-4

    @pytest.mark.slow
    def test_rank_one_partial_sums_converge(self, xgrid):
        half = HalfInt(1)
        op = rank_one_operator(basis_vector(MomentumIndex(half, half, half), 1), 1)
        symbol = weyl_symbol(op, two_j_max=8, xgrid=xgrid)
        terms = [term.real for term in symbol_trace_terms(symbol, symbol)]
        partial = np.cumsum(terms)
        assert partial[0] == pytest.approx(0.148, abs=1e-3)
        assert partial[1] == pytest.approx(0.907, abs=1e-3)
        assert 0.998 <= partial[-1] <= 1.0 + 1e-6
        assert all(later <= earlier for earlier, later in zip(terms[1:], terms[2:]))


class TestBlockSymbols:

    def random_symbol(self, rng, two_j_max, grid):
        xi, eta = grid.xi_eta()
        blocks = tuple(
            rng.normal(size=(len(grid), t + 1, t + 1)) + 1j * rng.normal(size=(len(grid), t + 1, t + 1))
            for t in range(two_j_max + 1)
        )
        return WeylSymbol(SymbolOption.II, two_j_max, blocks, xi, eta, grid)

    def test_pack_roundtrip(self, rng):
        symbol = self.random_symbol(rng, 3, symbol_grid(1))
        blocked = block_symbol(symbol)
        repacked = BlockSymbolOperator.from_packed(blocked.packed(), blocked)
        assert symbol.max_difference(repacked.to_symbol()) == 0.0

    def test_block_pairing_equals_flat(self, rng):
        grid = symbol_grid(1)
        for _ in range(5):
            a, b = self.random_symbol(rng, 3, grid), self.random_symbol(rng, 3, grid)
            flat = symbol_trace_pairing(a, b)
            assert abs(block_trace_pairing(block_symbol(a), block_symbol(b)) - flat) < 1e-13 * max(1.0, abs(flat))

    def test_commutant_block_is_sr_image(self, rng):
        f = FourierCoeffs.random(rng, 2)
        packed = block_symbol(commutant_symbol(f, haar_grid(2, 2, 2))).packed()
        assert np.max(np.abs(packed - sr_image(f)[None, :, :])) < 1e-14


class TestCovariance:

    def test_identity_moves_nothing(self, rng, xgrid):
        op = rank_one_operator(rng.normal(size=5) + 1j * rng.normal(size=5), 1)
        identity = Su2Element.identity()
        report = covariance_check(op, identity, identity, SymbolOption.II, [random_su2(rng)], xgrid=xgrid)
        assert report.max_residual < 1e-12

    @pytest.mark.parametrize("option", list(SymbolOption))
    def test_commutant(self, rng, xgrid, option):
        op = commutant_operator(FourierCoeffs.random(rng, 2))
        g1, g2 = random_su2_batch(rng, 2)
        report = covariance_check(op, g1, g2, option, random_su2_batch(rng, 3), xgrid=xgrid)
        assert report.max_residual < 1e-8, report.to_dict()

    @pytest.mark.slow
    @pytest.mark.parametrize("option", list(SymbolOption))
    def test_generic_operator(self, rng, option):
        dimension = momentum_dimension(2)
        op = rank_one_operator(rng.normal(size=dimension) + 1j * rng.normal(size=dimension), 2)
        g1, g2 = random_su2_batch(rng, 2)
        report = covariance_check(op, g1, g2, option, random_su2_batch(rng, 2))
        assert report.max_residual < 1e-4, report.to_dict()


class TestSchurAverage:

    def test_identity(self):
        size = sr_dimension(3)
        assert np.allclose(schur_average(np.eye(size), 3), np.eye(size), atol=1e-12)

    def test_hermitian_becomes_block_scalar(self, rng):
        size = sr_dimension(3)
        raw = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
        hermitian = 0.5 * (raw + raw.conj().T)
        assert block_scalar_residual(schur_average(hermitian, 3), hermitian, 3) < 1e-10

    def test_representation_gives_characters(self, rng):
        g0 = random_su2(rng)
        representation = sr_representation(g0, 3)
        average = schur_average(representation, 3)
        assert block_scalar_residual(average, representation, 3) < 1e-10

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            schur_average(np.eye(3), 2)


class TestExponentialGrid:

    def test_total_weight(self, xgrid):
        assert abs(xgrid.total_weight - 1.0) < 1e-6
        assert abs(exponential_grid(6, 12, 24).total_weight - 1.0) < 1e-5

    @pytest.mark.parametrize("counts,eps", [((4, 7, 8), 1e-3), ((0, 8, 8), 1e-3), ((4, 8, 8), 0.0)])
    def test_rejects(self, counts, eps):
        with pytest.raises(GridError):
            exponential_grid(*counts, antipode_eps=eps)
