"""
Verification checks, one function per invariant.

Every check receives a CheckContext (settings plus its own seeded generator) and
returns a CheckOutcome whose residual is compared with the tolerance configured
for its id. Checks never raise for numerical disagreement; they report it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.core.group_core import (
    GroupTag,
    HalfInt,
    Su2Element,
    adjoint_rotation,
    compose,
    distance,
    exact_haar_grid,
    exp_vec,
    haar_grid,
    integrate,
    inverse,
    log_vec,
    m_labels,
    midpoint_s,
    random_su2,
    random_su2_batch,
    rotation_residual,
    so3_from_euler,
    su2_from_euler,
    su2_matrix,
    su2_to_euler,
    EulerAngles,
)
from src.core.wigner import (
    SIDES,
    big_D,
    casimir_action,
    check_adjoint_relation,
    d_functions_on_grid,
    generator_fd_residual,
    matrix_exponential_D,
    mixed_derivative_residual,
    orthogonality_residual,
    spin_matrices,
    wigner_matrix,
)
from src.phase_space.midpoint_density import radial_normalization
from src.phase_space.wigner_weyl import (
    LEFT,
    RIGHT,
    FourierCoeffs,
    MomentumIndex,
    MomentumOperator,
    SymbolOption,
    WeylSymbol,
    basis_vector,
    block_scalar_residual,
    block_symbol,
    block_trace_pairing,
    BlockSymbolOperator,
    character_partial_sum,
    commutant_operator,
    commutant_operator_quadrature,
    commutant_symbol,
    completeness_residual,
    covariance_check,
    exponential_grid,
    fourier_roundtrip_residual,
    momentum_dimension,
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
from src.representations.majorana import (
    constellation_distance,
    constellation_to_state,
    pole_counts,
    random_constellation,
    rotate_constellation,
    state_to_constellation,
)
from src.representations.schwinger_basis import (
    BargmannPolynomial,
    SpinState,
    Y_jm,
    Y_jm_element,
    Y_jm_from_coherent,
    Y_jm_from_D,
    bargmann_identity_defects,
    bargmann_inner_product,
    bargmann_quadrature,
    factorwise_selection_residual,
    fidelity,
    is_even_under_negation,
    ladder_fd_residual,
    radial_weight_normalization,
    radial_weight_normalization_numeric,
    right_annihilation_residual,
    rotation_covariance_residual,
    so3_Y,
    so3_Y_closed_form,
    u_jm,
    y_orthonormality_residual,
)
from src.representations.sun_structure import (
    branch_fundamental,
    common_once_irrep,
    fundamental_dimension,
    su3_conjugate_mirror_holds,
    su3_dimension,
    su3_highest_weight_is_maximal,
    su3_multiplets,
    su3_singlet_count,
)
from src.utils.settings import Settings

logger = logging.getLogger(__name__)

SUITES = ("group", "wigner", "schwinger", "majorana", "sun", "weyl")
SU3_LABEL_MAX = 6
# midpoint samples this close to the antipode are ill-conditioned and skipped
MIDPOINT_EXCLUSION = 1e-2


@dataclass
class CheckContext:
    settings: Settings
    rng: np.random.Generator

    @property
    def xgrid(self):
        return exponential_grid(*self.settings.x_grid, self.settings.antipode_eps)


@dataclass(frozen=True)
class CheckOutcome:
    residual: float
    detail: Optional[str] = None


CheckFunction = Callable[[CheckContext], CheckOutcome]
CHECKS: Dict[str, CheckFunction] = {}


def check(check_id: str) -> Callable[[CheckFunction], CheckFunction]:
    """Register a check under ``<suite>.<name>``."""
    suite = check_id.split(".", 1)[0]
    if suite not in SUITES:
        raise ValueError(f"Unknown suite in check id {check_id!r}")

    def register(func: CheckFunction) -> CheckFunction:
        CHECKS[check_id] = func
        return func
    return register


def suite_of(check_id: str) -> str:
    return check_id.split(".", 1)[0]


def _random_euler(rng: np.random.Generator, group_tag: GroupTag = GroupTag.SU2) -> EulerAngles:
    # beta from the Haar distribution, kept off the poles
    beta = math.acos(float(np.clip(rng.uniform(-0.98, 0.98), -1.0, 1.0)))
    return EulerAngles(float(rng.uniform(0.0, 2.0 * math.pi)), beta,
                       float(rng.uniform(0.0, group_tag.gamma_period)), group_tag)


def _labels(two_j_max: int) -> List[Tuple[HalfInt, HalfInt]]:
    return [(HalfInt(t), m) for t in range(two_j_max + 1) for m in m_labels(HalfInt(t))]


def _relative(value: complex, expected: complex) -> float:
    return abs(value - expected) / max(1.0, abs(expected))


# ---------------------------------------------------------------------------
# group
# ---------------------------------------------------------------------------

@check("group.axioms")
def check_group_axioms(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    identity = Su2Element.identity()
    for _ in range(1000):
        a, b, c = random_su2_batch(ctx.rng, 3)
        worst = max(
            worst,
            distance(compose(compose(a, b), c), compose(a, compose(b, c))),
            distance(compose(a, identity), a),
            distance(compose(identity, a), a),
            distance(compose(a, inverse(a)), identity),
            distance(compose(inverse(a), a), identity),
        )
    return CheckOutcome(worst)


@check("group.euler_roundtrip")
def check_euler_roundtrip(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 1000):
        worst = max(worst, distance(su2_from_euler(su2_to_euler(g)), g))
    return CheckOutcome(worst)


@check("group.exp_log")
def check_exp_log(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(500):
        direction = ctx.rng.normal(size=3)
        x = direction / np.linalg.norm(direction) * ctx.rng.uniform(0.0, 2.0 * math.pi - 0.5)
        worst = max(worst, float(np.max(np.abs(log_vec(exp_vec(x)) - x))))
        g = random_su2(ctx.rng)
        if 1.0 + g.xi.real > MIDPOINT_EXCLUSION:
            worst = max(worst, distance(exp_vec(log_vec(g)), g))
    return CheckOutcome(worst)


@check("group.midpoint_properties")
def check_midpoint_properties(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    skipped = 0
    for _ in range(1000):
        g1, g2, a, b = random_su2_batch(ctx.rng, 4)
        if 1.0 + compose(inverse(g1), g2).xi.real < MIDPOINT_EXCLUSION:
            skipped += 1
            continue
        s = midpoint_s(g1, g2)
        moved = midpoint_s(compose(compose(a, g1), b), compose(compose(a, g2), b))
        worst = max(
            worst,
            distance(s, midpoint_s(g2, g1)),
            distance(midpoint_s(g1, g1), g1),
            distance(moved, compose(compose(a, s), b)),
        )
    return CheckOutcome(worst, f"{skipped} near-antipodal samples skipped")


@check("group.haar")
def check_haar(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.algebra_two_j_max
    worst = 0.0
    for tag in (GroupTag.SU2, GroupTag.SO3):
        grid = exact_haar_grid(two_j_max, tag)
        worst = max(worst, abs(float(grid.weights.sum()) - 1.0))
        for two_j, values in d_functions_on_grid(two_j_max, grid).items():
            if two_j == 0 or (tag is GroupTag.SO3 and two_j % 2):
                continue
            worst = max(worst, float(np.max(np.abs(integrate(values, grid)))))
    return CheckOutcome(worst)


@check("group.adjoint")
def check_adjoint(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(200):
        g1, g2 = random_su2_batch(ctx.rng, 2)
        r1, r2 = adjoint_rotation(g1), adjoint_rotation(g2)
        worst = max(
            worst,
            float(np.max(np.abs(adjoint_rotation(compose(g1, g2)) - r1 @ r2))),
            float(np.max(np.abs(r1 - so3_from_euler(su2_to_euler(g1))))),
            rotation_residual(r1),
        )
    return CheckOutcome(worst)


# ---------------------------------------------------------------------------
# wigner
# ---------------------------------------------------------------------------

@check("wigner.unitarity_homomorphism")
def check_unitarity_homomorphism(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(100):
        g1, g2 = random_su2_batch(ctx.rng, 2)
        for two_j in range(ctx.settings.algebra_two_j_max + 1):
            j = HalfInt(two_j)
            d1, d2 = wigner_matrix(j, g1), wigner_matrix(j, g2)
            product = wigner_matrix(j, compose(g1, g2)).entries
            worst = max(worst, d1.unitarity_residual(),
                        float(np.max(np.abs(product - d1.entries @ d2.entries))))
    return CheckOutcome(worst)


@check("wigner.half_matches_defining")
def check_half_matches_defining(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 100):
        worst = max(worst, float(np.max(np.abs(wigner_matrix(HalfInt(1), g).entries - su2_matrix(g)))))
    return CheckOutcome(worst)


@check("wigner.matrix_exponential")
def check_matrix_exponential(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(20):
        e = _random_euler(ctx.rng)
        for two_j in range(ctx.settings.algebra_two_j_max + 1):
            j = HalfInt(two_j)
            worst = max(worst, float(np.max(np.abs(big_D(j, e).entries - matrix_exponential_D(j, e)))))
    return CheckOutcome(worst)


@check("wigner.orthogonality")
def check_orthogonality(ctx: CheckContext) -> CheckOutcome:
    return CheckOutcome(orthogonality_residual(4, exact_haar_grid(4)), "j, j' <= 2")


@check("wigner.completeness_weak")
def check_completeness_weak(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(5):
        f = FourierCoeffs.random(ctx.rng, 4)
        elements = random_su2_batch(ctx.rng, 5)
        scale = max(1.0, max(abs(f.value(g)) for g in elements))
        worst = max(worst, completeness_residual(f, elements) / scale)
    return CheckOutcome(worst)


@check("wigner.generator_fd")
def check_generator_fd(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 5):
        for two_j in range(5):
            for side in SIDES:
                for r in (1, 2, 3):
                    worst = max(worst, generator_fd_residual(HalfInt(two_j), side, r, g,
                                                             ctx.settings.fd_step))
    return CheckOutcome(worst)


@check("wigner.mixed_commute")
def check_mixed_commute(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 3):
        for two_j in (1, 2, 4):
            for r in (1, 2, 3):
                for s in (1, 2, 3):
                    worst = max(worst, mixed_derivative_residual(HalfInt(two_j), g, r, s))
    return CheckOutcome(worst)


@check("wigner.adjoint_relation")
def check_adjoint_relation_fd(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 5):
        for two_j in range(1, 5):
            worst = max(worst, check_adjoint_relation(HalfInt(two_j), g, ctx.settings.fd_step))
    return CheckOutcome(worst)


@check("wigner.spin_algebra")
def check_spin_algebra(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for two_j in range(ctx.settings.algebra_two_j_max + 1):
        spins = spin_matrices(HalfInt(two_j))
        worst = max(worst, spins.commutator_residual(), spins.casimir_residual())
    return CheckOutcome(worst)


@check("wigner.casimir_fd")
def check_casimir_fd(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 3):
        for two_j in range(1, 5):
            j = HalfInt(two_j)
            expected = j.value * (j.value + 1.0) * wigner_matrix(j, g).entries
            for side in SIDES:
                deviation = np.max(np.abs(casimir_action(j, side, g) - expected))
                worst = max(worst, float(deviation) / max(1.0, float(np.max(np.abs(expected)))))
    return CheckOutcome(worst)


# ---------------------------------------------------------------------------
# schwinger
# ---------------------------------------------------------------------------

@check("schwinger.monomial_identity")
def check_monomial_identity(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 20):
        for j, m in _labels(6):
            d = wigner_matrix(j, g).entries
            row = (j.twice_value - m.twice_value) // 2
            expected = math.sqrt(math.factorial(j.twice_value)) * u_jm(j, m, g.xi, g.eta)
            worst = max(worst, abs(d[row, 0] - expected))
    return CheckOutcome(worst)


@check("schwinger.y_matches_D")
def check_y_matches_d(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for g in random_su2_batch(ctx.rng, 20):
        for j, m in _labels(6):
            worst = max(worst, _relative(Y_jm_element(j, m, g), Y_jm_from_D(j, m, g)))
    return CheckOutcome(worst)


@check("schwinger.y_orthonormality")
def check_y_orthonormality(ctx: CheckContext) -> CheckOutcome:
    return CheckOutcome(y_orthonormality_residual(4, exact_haar_grid(4)))


@check("schwinger.factorwise_selection")
def check_factorwise_selection(ctx: CheckContext) -> CheckOutcome:
    return CheckOutcome(factorwise_selection_residual(4, exact_haar_grid(4)))


@check("schwinger.coherent_relation")
def check_coherent_relation(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(20):
        e = _random_euler(ctx.rng)
        for j, m in _labels(6):
            worst = max(worst, _relative(Y_jm_from_coherent(j, m, e), Y_jm(j, m, e)))
    return CheckOutcome(worst)


@check("schwinger.right_annihilation")
def check_right_annihilation(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for j, m in _labels(4):
        for g in random_su2_batch(ctx.rng, 20):
            worst = max(worst, right_annihilation_residual(j, m, g, ctx.settings.fd_step))
    return CheckOutcome(worst)


@check("schwinger.ladder_coefficient")
def check_ladder_coefficient(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for j, m in _labels(4):
        for g in random_su2_batch(ctx.rng, 5):
            worst = max(worst, ladder_fd_residual(j, m, g, ctx.settings.fd_step))
    return CheckOutcome(worst)


@check("schwinger.bargmann_exact")
def check_bargmann_exact(ctx: CheckContext) -> CheckOutcome:
    defects = bargmann_identity_defects()
    return CheckOutcome(float(len(defects)), f"defects: {defects[:5]}" if defects else None)


@check("schwinger.bargmann_quadrature")
def check_bargmann_quadrature(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    labels = _labels(6)
    for j, m in labels:
        p = BargmannPolynomial.u(j, m)
        for j2, m2 in labels:
            q = BargmannPolynomial.u(j2, m2)
            worst = max(worst, abs(bargmann_quadrature(p, q) - bargmann_inner_product(p, q)))
    return CheckOutcome(worst)


@check("schwinger.radial_normalization")
def check_radial_normalization(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for two_j in range(9):
        j = HalfInt(two_j)
        exact = radial_weight_normalization(j)
        worst = max(worst, abs(exact - 1.0), abs(radial_weight_normalization_numeric(j) - exact))
    return CheckOutcome(worst)


def _polynomial_distance(p: BargmannPolynomial, q: BargmannPolynomial) -> float:
    difference = p + q.scaled(-1.0)
    return math.sqrt(abs(bargmann_inner_product(difference, difference)))


@check("schwinger.oscillator_ladder")
def check_oscillator_ladder(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for j, m in _labels(8):
        u = BargmannPolynomial.u(j, m)
        jv, mv = j.value, m.value
        worst = max(worst, _polynomial_distance(u.j_three(), u.scaled(mv)))
        if m.twice_value < j.twice_value:
            raised = BargmannPolynomial.u(j, HalfInt(m.twice_value + 2))
            coefficient = math.sqrt((jv - mv) * (jv + mv + 1.0))
            worst = max(worst, _polynomial_distance(u.j_plus(), raised.scaled(coefficient)))
        else:
            worst = max(worst, _polynomial_distance(u.j_plus(), BargmannPolynomial()))
        if m.twice_value > -j.twice_value:
            lowered = BargmannPolynomial.u(j, HalfInt(m.twice_value - 2))
            coefficient = math.sqrt((jv + mv) * (jv - mv + 1.0))
            worst = max(worst, _polynomial_distance(u.j_minus(), lowered.scaled(coefficient)))
    return CheckOutcome(worst)


@check("schwinger.so3_orthonormality")
def check_so3_orthonormality(ctx: CheckContext) -> CheckOutcome:
    return CheckOutcome(y_orthonormality_residual(4, exact_haar_grid(4, GroupTag.SO3)))


@check("schwinger.so3_closed_form")
def check_so3_closed_form(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(20):
        e = _random_euler(ctx.rng, GroupTag.SO3)
        for ell in range(4):
            for m in range(-ell, ell + 1):
                worst = max(worst, _relative(so3_Y(ell, m, e), so3_Y_closed_form(ell, m, e)))
    return CheckOutcome(worst)


@check("schwinger.even_restriction")
def check_even_restriction(ctx: CheckContext) -> CheckOutcome:
    mismatches = 0
    for j, m in _labels(6):
        if j.twice_value == 0:
            continue
        z1, z2 = complex(*ctx.rng.normal(size=2)), complex(*ctx.rng.normal(size=2))
        if is_even_under_negation(j, m, z1, z2) != j.is_integer:
            mismatches += 1
    return CheckOutcome(float(mismatches))


@check("schwinger.rotation_covariance")
def check_rotation_covariance(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for two_j in range(5):
        state = SpinState.random(HalfInt(two_j), ctx.rng)
        g = random_su2(ctx.rng)
        worst = max(worst, rotation_covariance_residual(state, g, random_su2_batch(ctx.rng, 10)))
    return CheckOutcome(worst)


# ---------------------------------------------------------------------------
# majorana
# ---------------------------------------------------------------------------

@check("majorana.roundtrip_fidelity")
def check_roundtrip_fidelity(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for two_j in range(1, 13):
        for _ in range(200):
            state = SpinState.random(HalfInt(two_j), ctx.rng)
            recovered = constellation_to_state(state_to_constellation(state))
            worst = max(worst, 1.0 - fidelity(state, recovered))
    return CheckOutcome(worst)


@check("majorana.pole_bookkeeping")
def check_pole_bookkeeping(ctx: CheckContext) -> CheckOutcome:
    mismatches = 0
    cases = 0
    for two_j in range(1, 9):
        size = two_j + 1
        for top in range(size):
            for bottom in range(size - top):
                coeffs = ctx.rng.normal(size=size) + 1j * ctx.rng.normal(size=size)
                coeffs[:top] = 0.0
                if bottom:
                    coeffs[size - bottom:] = 0.0
                constellation = state_to_constellation(SpinState(HalfInt(two_j), coeffs))
                zeros, infinities = pole_counts(constellation)
                cases += 1
                if infinities != top or zeros < bottom:
                    mismatches += 1
        # diagonal rotations keep exact multiplicities
        state = SpinState.basis(HalfInt(two_j), HalfInt(two_j))
        z_rotation = exp_vec(np.array([0.0, 0.0, float(ctx.rng.uniform(0.1, 3.0))]))
        before = pole_counts(rotate_constellation(z_rotation, state_to_constellation(state)))
        after = pole_counts(state_to_constellation(state.rotated(z_rotation)))
        cases += 1
        if before != after:
            mismatches += 1
    return CheckOutcome(float(mismatches), f"{cases} constructed cases")


@check("majorana.rotation_equivariance")
def check_rotation_equivariance(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for two_j in range(1, 9):
        for _ in range(20):
            state = SpinState.random(HalfInt(two_j), ctx.rng)
            g = random_su2(ctx.rng)
            moved = rotate_constellation(g, state_to_constellation(state))
            direct = state_to_constellation(state.rotated(g))
            worst = max(worst, constellation_distance(moved, direct))
    return CheckOutcome(worst)


@check("majorana.constellation_roundtrip")
def check_constellation_roundtrip(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for two_j in range(1, 9):
        for _ in range(20):
            constellation = random_constellation(two_j, ctx.rng)
            recovered = state_to_constellation(constellation_to_state(constellation))
            worst = max(worst, constellation_distance(constellation, recovered))
    return CheckOutcome(worst)


# ---------------------------------------------------------------------------
# sun
# ---------------------------------------------------------------------------

def _su3_labels() -> List[Tuple[int, int]]:
    return [(p, q) for p in range(SU3_LABEL_MAX + 1) for q in range(SU3_LABEL_MAX + 1)]


@check("sun.dimension_multiplets")
def check_dimension_multiplets(ctx: CheckContext) -> CheckOutcome:
    failures = [
        (p, q) for p, q in _su3_labels()
        if sum(entry.two_I + 1 for entry in su3_multiplets(p, q)) != su3_dimension(p, q)
    ]
    return CheckOutcome(float(len(failures)), f"failing: {failures}" if failures else None)


@check("sun.singlet_unique")
def check_singlet_unique(ctx: CheckContext) -> CheckOutcome:
    failures = [(p, q) for p, q in _su3_labels() if su3_singlet_count(p, q) != 1]
    return CheckOutcome(float(len(failures)), f"failing: {failures}" if failures else None)


@check("sun.conjugation_mirror")
def check_conjugation_mirror(ctx: CheckContext) -> CheckOutcome:
    failures = [(p, q) for p, q in _su3_labels() if not su3_conjugate_mirror_holds(p, q)]
    return CheckOutcome(float(len(failures)), f"failing: {failures}" if failures else None)


@check("sun.highest_weight_maximal")
def check_highest_weight_maximal(ctx: CheckContext) -> CheckOutcome:
    failures = [(p, q) for p, q in _su3_labels() if not su3_highest_weight_is_maximal(p, q)]
    return CheckOutcome(float(len(failures)), f"failing: {failures}" if failures else None)


@check("sun.branching_obstruction")
def check_branching_obstruction(ctx: CheckContext) -> CheckOutcome:
    failures = []
    if common_once_irrep(3) is None:
        failures.append("n=3 has no witness")
    for n in range(4, 9):
        witness = common_once_irrep(n)
        if witness is not None:
            failures.append(f"n={n} has witness {witness.name}")
        for p in range(1, n):
            branched = sum(label.dimension for label in branch_fundamental(n, p))
            if branched != fundamental_dimension(n, p):
                failures.append(f"dim mismatch n={n} p={p}")
    return CheckOutcome(float(len(failures)), "; ".join(failures) or None)


# ---------------------------------------------------------------------------
# weyl
# ---------------------------------------------------------------------------

def _operator_difference(a: MomentumOperator, b: MomentumOperator) -> float:
    return float(np.max(np.abs(a.matrix - b.matrix)))


@check("weyl.regular_properties")
def check_regular_properties(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.algebra_two_j_max
    identity = MomentumOperator.identity(two_j_max)
    worst = max(_operator_difference(regular_matrix(side, Su2Element.identity(), two_j_max), identity)
                for side in SIDES)
    for _ in range(3):
        g1, g2 = random_su2_batch(ctx.rng, 2)
        for side in SIDES:
            u1, u2 = regular_matrix(side, g1, two_j_max), regular_matrix(side, g2, two_j_max)
            worst = max(
                worst,
                _operator_difference(u1 @ u1.adjoint(), identity),
                _operator_difference(u1 @ u2, regular_matrix(side, compose(g1, g2), two_j_max)),
            )
        left, right = regular_matrix(LEFT, g1, two_j_max), regular_matrix(RIGHT, g2, two_j_max)
        worst = max(worst, _operator_difference(left @ right, right @ left))
    return CheckOutcome(worst)


@check("weyl.regular_trace_truncated")
def check_regular_trace_truncated(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.algebra_two_j_max
    worst = 0.0
    for _ in range(5):
        g1, g2 = random_su2_batch(ctx.rng, 2)
        product = regular_matrix(RIGHT, g1, two_j_max) @ regular_matrix(RIGHT, g2, two_j_max)
        worst = max(worst, _relative(product.trace(), character_partial_sum(compose(g1, g2), two_j_max)))
    return CheckOutcome(worst)


@check("weyl.commutant_closed_form")
def check_commutant_closed_form(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    grid = exact_haar_grid(two_j_max)
    worst = 0.0
    for _ in range(20):
        f = FourierCoeffs.random(ctx.rng, two_j_max)
        closed = commutant_operator(f)
        worst = max(worst, _operator_difference(closed, commutant_operator_quadrature(f, grid)))
        j = HalfInt(two_j_max)
        m, n, n2 = (m_labels(j)[k] for k in ctx.rng.integers(0, j.dimension, size=3))
        element = closed.element(MomentumIndex(j, m, n2), MomentumIndex(j, m, n))
        expected = f.block(two_j_max)[(j.twice_value - n2.twice_value) // 2,
                                      (j.twice_value - n.twice_value) // 2] / math.sqrt(j.dimension)
        worst = max(worst, abs(element - expected))
    # a constant function projects onto the j = 0 sector
    scalar = commutant_operator(FourierCoeffs.constant(2.5, two_j_max))
    projector = np.zeros((momentum_dimension(two_j_max),) * 2, dtype=complex)
    projector[0, 0] = 2.5
    worst = max(worst, _operator_difference(scalar, MomentumOperator(two_j_max, projector)))
    point = random_su2(ctx.rng)
    worst = max(worst, _operator_difference(commutant_operator(FourierCoeffs.point_mass(point, two_j_max)),
                                            regular_matrix(RIGHT, point, two_j_max)))
    return CheckOutcome(worst)


@check("weyl.commutant_commutes")
def check_commutant_commutes(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    worst = 0.0
    for _ in range(20):
        a = commutant_operator(FourierCoeffs.random(ctx.rng, two_j_max))
        for g in random_su2_batch(ctx.rng, 3):
            u = regular_matrix(LEFT, g, two_j_max)
            worst = max(worst, _operator_difference(a @ u, u @ a))
    return CheckOutcome(worst)


def _commutant_expected_symbol(f: FourierCoeffs) -> List[np.ndarray]:
    return [block.T / math.sqrt(two_j + 1) for two_j, block in enumerate(f.blocks)]


@check("weyl.commutant_symbol_constant")
def check_commutant_symbol_constant(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    worst_dependence, worst_value = 0.0, 0.0
    for _ in range(20):
        f = FourierCoeffs.random(ctx.rng, two_j_max)
        symbol = symbol_at(commutant_operator(f), random_su2_batch(ctx.rng, 8), xgrid=ctx.xgrid)
        worst_dependence = max(worst_dependence, symbol.g_dependence())
        for block, expected in zip(symbol.blocks, _commutant_expected_symbol(f)):
            worst_value = max(worst_value, float(np.max(np.abs(block - expected))))
    return CheckOutcome(max(worst_dependence, worst_value),
                        f"g-dependence {worst_dependence:.3e}, value {worst_value:.3e}")


@check("weyl.commutant_block_symbol")
def check_commutant_block_symbol(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    worst = 0.0
    for _ in range(20):
        f = FourierCoeffs.random(ctx.rng, two_j_max)
        symbol = symbol_at(commutant_operator(f), random_su2_batch(ctx.rng, 4), xgrid=ctx.xgrid)
        packed = block_symbol(symbol).packed()
        worst = max(worst, float(np.max(np.abs(packed - sr_image(f)[None, :, :]))))
    return CheckOutcome(worst)


@check("weyl.fourier_roundtrip")
def check_fourier_roundtrip(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for _ in range(20):
        worst = max(worst, fourier_roundtrip_residual(FourierCoeffs.random(ctx.rng, ctx.settings.symbol_two_j_max)))
    return CheckOutcome(worst)


@check("weyl.trace_analytic")
def check_trace_analytic(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    grid = symbol_grid(two_j_max)
    worst = 0.0
    for option in SymbolOption:
        for _ in range(10):
            f = FourierCoeffs.random(ctx.rng, two_j_max)
            h = FourierCoeffs.random(ctx.rng, two_j_max)
            expected = plancherel_pairing(f, h)
            paired = symbol_trace_pairing(commutant_symbol(f, grid, option), commutant_symbol(h, grid, option))
            operator_trace = (commutant_operator(f) @ commutant_operator(h)).trace()
            worst = max(worst, _relative(paired, expected), _relative(operator_trace, expected),
                        _relative(plancherel_quadrature(f, h, grid), expected))
    return CheckOutcome(worst)


@check("weyl.trace_numeric_commutant")
def check_trace_numeric_commutant(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    f = FourierCoeffs.random(ctx.rng, two_j_max)
    h = FourierCoeffs.random(ctx.rng, two_j_max)
    workers = ctx.settings.workers
    wa = weyl_symbol(commutant_operator(f), xgrid=ctx.xgrid, workers=workers)
    wb = weyl_symbol(commutant_operator(h), xgrid=ctx.xgrid, workers=workers)
    paired = symbol_trace_pairing(wa, wb)
    expected = plancherel_pairing(f, h)
    return CheckOutcome(_relative(paired, expected), f"pairing {paired:.12g}, Plancherel {expected:.12g}")


@check("weyl.trace_numeric_vacuum")
def check_trace_numeric_vacuum(ctx: CheckContext) -> CheckOutcome:
    two_j_max = 2
    vacuum = MomentumIndex(HalfInt(0), HalfInt(0), HalfInt(0))
    op = rank_one_operator(basis_vector(vacuum, two_j_max), two_j_max)
    symbol = weyl_symbol(op, xgrid=ctx.xgrid, workers=ctx.settings.workers)
    trace = symbol_trace_pairing(symbol, symbol)
    return CheckOutcome(abs(trace - 1.0), f"Tr(A^2) = {trace:.12g}")


@check("weyl.trace_numeric_translations")
def check_trace_numeric_translations(ctx: CheckContext) -> CheckOutcome:
    two_j_max = 2
    g1, g2 = random_su2_batch(ctx.rng, 2)
    wa = weyl_symbol(regular_matrix(LEFT, g1, two_j_max), xgrid=ctx.xgrid, workers=ctx.settings.workers)
    wb = weyl_symbol(regular_matrix(LEFT, g2, two_j_max), xgrid=ctx.xgrid, workers=ctx.settings.workers)
    paired = symbol_trace_pairing(wa, wb)
    expected = character_partial_sum(compose(g1, g2), two_j_max)
    return CheckOutcome(_relative(paired, expected), f"pairing {paired:.12g}, characters {expected:.12g}")


@check("weyl.rank_one_partial_sums")
def check_rank_one_partial_sums(ctx: CheckContext) -> CheckOutcome:
    two_j_max = 1
    symbol_two_j_max = 8
    half = HalfInt(1)
    op = rank_one_operator(basis_vector(MomentumIndex(half, half, half), two_j_max), two_j_max)
    symbol = weyl_symbol(op, two_j_max=symbol_two_j_max, xgrid=ctx.xgrid, workers=ctx.settings.workers)
    terms = [term.real for term in symbol_trace_terms(symbol, symbol)]
    partial = np.cumsum(terms)
    # past the peak the per-label terms shrink and the sums close on Tr(A^2) = 1
    tail_growth = max(0.0, float(np.max(np.diff(terms[1:]))))
    residual = max(0.0, -min(terms), abs(1.0 - float(partial[-1])), tail_growth)
    return CheckOutcome(residual, "partial sums " + ", ".join(f"{value:.6f}" for value in partial))


@check("weyl.covariance_commutant")
def check_covariance_commutant(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    op = commutant_operator(FourierCoeffs.random(ctx.rng, two_j_max))
    g1, g2 = random_su2_batch(ctx.rng, 2)
    elements = random_su2_batch(ctx.rng, 4)
    reports = [covariance_check(op, g1, g2, option, elements, xgrid=ctx.xgrid) for option in SymbolOption]
    return CheckOutcome(max(report.max_residual for report in reports))


@check("weyl.covariance_generic")
def check_covariance_generic(ctx: CheckContext) -> CheckOutcome:
    two_j_max = 2
    dimension = momentum_dimension(two_j_max)
    vector = ctx.rng.normal(size=dimension) + 1j * ctx.rng.normal(size=dimension)
    op = rank_one_operator(vector, two_j_max)
    g1, g2 = random_su2_batch(ctx.rng, 2)
    elements = random_su2_batch(ctx.rng, 4)
    reports = [covariance_check(op, g1, g2, option, elements, xgrid=ctx.xgrid) for option in SymbolOption]
    identity = Su2Element.identity()
    trivial = covariance_check(op, identity, identity, SymbolOption.II, elements[:1], xgrid=ctx.xgrid)
    detail = ", ".join(f"Option {r.option.value}: {r.max_residual:.3e}" for r in reports)
    return CheckOutcome(max([trivial.max_residual] + [r.max_residual for r in reports]), detail)


def _random_symbol(rng: np.random.Generator, two_j_max: int, grid) -> WeylSymbol:
    xi, eta = grid.xi_eta()
    blocks = tuple(
        rng.normal(size=(len(grid), t + 1, t + 1)) + 1j * rng.normal(size=(len(grid), t + 1, t + 1))
        for t in range(two_j_max + 1)
    )
    return WeylSymbol(SymbolOption.II, two_j_max, blocks, xi, eta, grid)


@check("weyl.block_pairing_equal")
def check_block_pairing_equal(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    grid = symbol_grid(1)
    worst = 0.0
    for _ in range(20):
        a, b = _random_symbol(ctx.rng, two_j_max, grid), _random_symbol(ctx.rng, two_j_max, grid)
        flat = symbol_trace_pairing(a, b)
        blocked = block_trace_pairing(block_symbol(a), block_symbol(b))
        worst = max(worst, abs(flat - blocked) / max(1.0, abs(flat)))
    return CheckOutcome(worst)


@check("weyl.block_roundtrip")
def check_block_roundtrip(ctx: CheckContext) -> CheckOutcome:
    two_j_max = ctx.settings.symbol_two_j_max
    symbol = _random_symbol(ctx.rng, two_j_max, symbol_grid(1))
    blocked = block_symbol(symbol)
    repacked = BlockSymbolOperator.from_packed(blocked.packed(), blocked)
    worst = max(symbol.max_difference(blocked.to_symbol()), symbol.max_difference(repacked.to_symbol()))
    return CheckOutcome(worst)


@check("weyl.schur_average")
def check_schur_average(ctx: CheckContext) -> CheckOutcome:
    two_j_max = 4
    size = sr_dimension(two_j_max)
    grid = exact_haar_grid(two_j_max)
    worst = 0.0
    for _ in range(5):
        raw = ctx.rng.normal(size=(size, size)) + 1j * ctx.rng.normal(size=(size, size))
        hermitian = 0.5 * (raw + raw.conj().T)
        worst = max(worst, block_scalar_residual(schur_average(hermitian, two_j_max, grid), hermitian, two_j_max))
    identity = np.eye(size)
    worst = max(worst, float(np.max(np.abs(schur_average(identity, two_j_max, grid) - identity))))
    g0 = random_su2(ctx.rng)
    representation = sr_representation(g0, two_j_max)
    worst = max(worst, block_scalar_residual(schur_average(representation, two_j_max, grid),
                                             representation, two_j_max))
    return CheckOutcome(worst)


@check("weyl.negative_control")
def check_negative_control(ctx: CheckContext) -> CheckOutcome:
    """Dropping N_j from the pairing must move a known trace by more than 1%."""
    two_j_max = ctx.settings.symbol_two_j_max
    grid = symbol_grid(two_j_max)
    g0 = random_su2(ctx.rng)
    a = commutant_symbol(FourierCoeffs.point_mass(g0, two_j_max), grid)
    b = commutant_symbol(FourierCoeffs.point_mass(inverse(g0), two_j_max), grid)
    weighted = symbol_trace_pairing(a, b)
    unweighted = symbol_trace_pairing(a, b, n_weighted=False)
    change = abs(weighted - unweighted) / abs(weighted)
    return CheckOutcome(max(0.0, 1e-2 - change),
                        f"weighted {weighted.real:.6f}, unweighted {unweighted.real:.6f}, relative change {change:.3f}")


@check("weyl.midpoint_density_normalization")
def check_midpoint_density_normalization(ctx: CheckContext) -> CheckOutcome:
    xgrid = ctx.xgrid
    spline_total = radial_normalization(xgrid.theta_max)
    return CheckOutcome(max(abs(spline_total - 1.0), abs(xgrid.total_weight - 1.0)),
                        f"radial integral {spline_total:.12f}, grid weight {xgrid.total_weight:.12f}")


@check("weyl.accuracy_warning")
def check_accuracy_warning(ctx: CheckContext) -> CheckOutcome:
    op = MomentumOperator.zero(2)
    coarse = weyl_symbol(op, grid=haar_grid(1, 1, 1), xgrid=ctx.xgrid)
    zero = max(float(np.max(np.abs(block))) for block in coarse.blocks)
    flagged = 0.0 if coarse.accuracy_warning else 1.0
    return CheckOutcome(max(flagged, zero))


@check("weyl.zero_operator")
def check_zero_operator(ctx: CheckContext) -> CheckOutcome:
    symbol = weyl_symbol(MomentumOperator.zero(1), xgrid=ctx.xgrid)
    largest = max(float(np.max(np.abs(block))) for block in symbol.blocks)
    return CheckOutcome(max(largest, abs(symbol_trace_pairing(symbol, symbol))))
