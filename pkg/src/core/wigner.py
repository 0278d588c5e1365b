"""
Wigner little-d and big-D matrices, spin matrices and generator actions.

Rows and columns are indexed m = j, j-1, ..., -j. Conventions:

    D^j_{mn}(alpha, beta, gamma) = exp(-i m alpha) d^j_{mn}(beta) exp(-i n gamma)
    D^j(alpha, beta, gamma) = exp(-i alpha J3) exp(-i beta J2) exp(-i gamma J3)

Generator actions on functions of the group are the flow derivatives

    (J_r psi)(g)  = i d/dt psi(exp(i t sigma_r/2) g)       (left)
    (J~_r psi)(g) = i d/dt psi(g exp(-i t sigma_r/2))     (right)

so that J3 D^j_{mn} = -m D^j_{mn} and J~3 D^j_{mn} = n D^j_{mn}.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from src.core.group_core import (
    EulerAngles,
    HalfInt,
    QuadratureGrid,
    Su2Element,
    adjoint_rotation,
    compose,
    exp_vec,
    m_labels,
    validate_j,
)
from src.utils.errors import LabelError

logger = logging.getLogger(__name__)

FACTORIAL_SUM_TWO_J = 20
DEFAULT_FD_STEP = 1e-5
LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)


@dataclass(frozen=True, eq=False)
class WignerMatrix:
    """D^j(g) in the |jm> basis."""
    j: HalfInt
    entries: np.ndarray

    def unitarity_residual(self) -> float:
        n = self.entries.shape[0]
        return float(np.max(np.abs(self.entries @ self.entries.conj().T - np.eye(n))))


@dataclass(frozen=True, eq=False)
class SpinGenerators:
    j: HalfInt
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray

    @property
    def as_list(self) -> List[np.ndarray]:
        return [self.J1, self.J2, self.J3]

    def commutator_residual(self) -> float:
        """max |[J_r, J_s] - i eps_rst J_t| over cyclic (r, s, t)."""
        ops = self.as_list
        worst = 0.0
        for r, s, t in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            lhs = ops[r] @ ops[s] - ops[s] @ ops[r]
            worst = max(worst, float(np.max(np.abs(lhs - 1j * ops[t]))))
        return worst

    def casimir_residual(self) -> float:
        n = self.J3.shape[0]
        casimir = sum(op @ op for op in self.as_list)
        return float(np.max(np.abs(casimir - self.j.value * (self.j.value + 1) * np.eye(n))))


def _log_factorial(n: int) -> float:
    return float(gammaln(n + 1))


@lru_cache(maxsize=None)
def _d_terms(two_j: int) -> Tuple[Tuple[int, int, float, int, int, int, int], ...]:
    """
    Sum terms of the Wigner formula for 2j = two_j.

    Each term is (row, col, log coefficient, j+m-s, m'-m+s, s, j-m'-s) with
    m' the row label, m the column label and s the summation index,

        coefficient = sqrt((j+m')!(j-m')!(j+m)!(j-m)!) / ((j+m-s)! s! (m'-m+s)! (j-m'-s)!)

    and the last four entries are the exponents of the monomial
    a^(j+m-s) b^(m'-m+s) c^s d^(j-m'-s) in the entries of the 2x2 matrix [[a, b], [c, d]].
    """
    terms = []
    for row in range(two_j + 1):
        jpm_row = two_j - row            # j + m'
        jmm_row = row                    # j - m'
        for col in range(two_j + 1):
            jpm = two_j - col            # j + m
            jmm = col                    # j - m
            half = 0.5 * (_log_factorial(jpm_row) + _log_factorial(jmm_row)
                          + _log_factorial(jpm) + _log_factorial(jmm))
            diff = jpm_row - jpm         # m' - m
            for s in range(0, two_j + 1):
                e_a, e_b, e_d = jpm - s, diff + s, jmm_row - s
                if e_a < 0 or e_b < 0 or e_d < 0:
                    continue
                log_coef = half - (_log_factorial(e_a) + _log_factorial(s)
                                   + _log_factorial(e_b) + _log_factorial(e_d))
                terms.append((row, col, log_coef, e_a, e_b, s, e_d))
    return tuple(terms)


def little_d(j: HalfInt, beta: float) -> np.ndarray:
    """
    Real matrix d^j(beta).

    Up to 2j = 20 the Wigner sum
    d^j_{m'm} = sum_s (-1)^(m'-m+s) C_s cos(beta/2)^(2j+m-m'-2s) sin(beta/2)^(m'-m+2s)
    is used; above that its alternating terms cancel and d^j comes from the
    eigendecomposition of J2 instead.
    """
    validate_j(j)
    two_j = j.twice_value
    if two_j > FACTORIAL_SUM_TWO_J:
        return _spectral_little_d(two_j, np.asarray(beta, dtype=float))
    c, s = math.cos(0.5 * beta), math.sin(0.5 * beta)
    result = np.zeros((two_j + 1, two_j + 1))
    for row, col, log_coef, e_a, e_b, k, e_d in _d_terms(two_j):
        sign = -1.0 if e_b % 2 else 1.0
        result[row, col] += sign * math.exp(log_coef) * c ** (e_a + e_d) * s ** (e_b + k)
    return result


@lru_cache(maxsize=None)
def _j2_eigensystem(two_j: int) -> Tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(_spin_matrices_cached(two_j)[1])
    for array in (values, vectors):
        array.setflags(write=False)
    return values, vectors


def _spectral_little_d(two_j: int, beta: np.ndarray) -> np.ndarray:
    """d^j(beta) = V exp(-i beta Lambda) V^dagger, batched over the shape of beta."""
    values, vectors = _j2_eigensystem(two_j)
    phases = np.exp(-1j * beta[..., None] * values)
    return np.real((vectors * phases[..., None, :]) @ vectors.conj().T)


def big_D(j: HalfInt, e: EulerAngles) -> WignerMatrix:
    """D^j_{mn}(alpha, beta, gamma) = exp(-i m alpha) d^j_{mn}(beta) exp(-i n gamma)."""
    e.validate()
    m = np.array([label.value for label in m_labels(j)])
    phases_alpha = np.exp(-1j * m * e.alpha)
    phases_gamma = np.exp(-1j * m * e.gamma)
    entries = phases_alpha[:, None] * little_d(j, e.beta) * phases_gamma[None, :]
    return WignerMatrix(j, entries)


def _power_table(z: np.ndarray, max_power: int) -> np.ndarray:
    """z^0 .. z^max_power by repeated multiplication (z^0 = 1 even at z = 0)."""
    table = np.empty((max_power + 1,) + z.shape, dtype=complex)
    table[0] = 1.0
    for k in range(1, max_power + 1):
        table[k] = table[k - 1] * z
    return table


def wigner_matrices(two_j: int, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """
    Batched D^j evaluated directly from (xi, eta), no Euler chart involved.

    Args:
        two_j: 2j
        xi, eta: arrays of the same shape S

    Returns:
        complex array of shape S + (2j+1, 2j+1)
    """
    if two_j < 0:
        raise LabelError(f"two_j must be >= 0, got {two_j}")
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if two_j > FACTORIAL_SUM_TWO_J:
        return _spectral_wigner_matrices(two_j, xi, eta)
    size = two_j + 1
    pa = _power_table(xi, two_j)
    pb = _power_table(-np.conj(eta), two_j)
    pc = _power_table(eta, two_j)
    pd = _power_table(np.conj(xi), two_j)
    result = np.zeros(xi.shape + (size, size), dtype=complex)
    for row, col, log_coef, e_a, e_b, k, e_d in _d_terms(two_j):
        result[..., row, col] += math.exp(log_coef) * pa[e_a] * pb[e_b] * pc[k] * pd[e_d]
    return result


def _spectral_wigner_matrices(two_j: int, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """
    D^j_{mn} = exp(i (m+n) arg xi - i (m-n) arg eta) d^j_{mn}(beta) with
    tan(beta/2) = |eta| / |xi|. A vanishing xi or eta has angle 0, where the
    matching d^j entries vanish anyway.
    """
    beta = 2.0 * np.arctan2(np.abs(eta), np.abs(xi))
    m = 0.5 * two_j - np.arange(two_j + 1)
    plus = m[:, None] + m[None, :]
    minus = m[:, None] - m[None, :]
    phase = np.exp(1j * (plus * np.angle(xi)[..., None, None] - minus * np.angle(eta)[..., None, None]))
    return phase * _spectral_little_d(two_j, beta)


def wigner_matrix(j: HalfInt, g: Su2Element) -> WignerMatrix:
    validate_j(j)
    entries = wigner_matrices(j.twice_value, np.array(g.xi), np.array(g.eta))
    return WignerMatrix(j, entries)


def character(j: HalfInt, g: Su2Element) -> complex:
    """chi_j(g) = sin((2j+1) theta/2) / sin(theta/2) with xi.real = cos(theta/2)."""
    return complex(np.trace(wigner_matrix(j, g).entries))


@lru_cache(maxsize=None)
def _spin_matrices_cached(two_j: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    size = two_j + 1
    j = two_j / 2.0
    m = np.array([j - i for i in range(size)])
    raising = np.zeros((size, size))
    for i in range(1, size):
        raising[i - 1, i] = math.sqrt((j - m[i]) * (j + m[i] + 1))
    lowering = raising.T
    j1 = (raising + lowering) / 2.0
    j2 = (raising - lowering) / 2.0j
    j3 = np.diag(m)
    matrices = tuple(matrix.astype(complex) for matrix in (j1, j2, j3))
    for matrix in matrices:
        matrix.setflags(write=False)
    return matrices


def spin_matrices(j: HalfInt) -> SpinGenerators:
    """Hermitian J1, J2, J3 in the m-descending basis (J_r = sigma_r/2 at j = 1/2)."""
    validate_j(j)
    j1, j2, j3 = _spin_matrices_cached(j.twice_value)
    return SpinGenerators(j, j1, j2, j3)


def _axis(r: int) -> np.ndarray:
    if r not in (1, 2, 3):
        raise ValueError(f"Generator index must be 1, 2 or 3, got {r}")
    axis = np.zeros(3)
    axis[r - 1] = 1.0
    return axis


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def flowed_element(g: Su2Element, side: str, r: int, t: float) -> Su2Element:
    """exp(i t sigma_r/2) g for the left flow, g exp(-i t sigma_r/2) for the right flow."""
    _check_side(side)
    if side == LEFT:
        return compose(exp_vec(-t * _axis(r)), g)
    return compose(g, exp_vec(t * _axis(r)))


def flow_derivative(func: Callable[[Su2Element], np.ndarray], g: Su2Element,
                    side: str, r: int, step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central finite difference i (f(t=h) - f(t=-h)) / 2h along the generator flow."""
    plus = np.asarray(func(flowed_element(g, side, r, step)))
    minus = np.asarray(func(flowed_element(g, side, r, -step)))
    return 1j * (plus - minus) / (2.0 * step)


def generator_derivative(j: HalfInt, side: str, r: int, g: Su2Element) -> np.ndarray:
    """
    Analytic generator action on the matrix-valued function D^j at g.

    Left: J_r D^j = -S_r D^j(g) (acts on the row index m).
    Right: J~_r D^j = D^j(g) S_r (acts on the column index n).
    """
    _check_side(side)
    _axis(r)
    spin = spin_matrices(j).as_list[r - 1]
    d = wigner_matrix(j, g).entries
    if side == LEFT:
        return -spin @ d
    return d @ spin


def generator_fd_residual(j: HalfInt, side: str, r: int, g: Su2Element,
                          step: float = DEFAULT_FD_STEP) -> float:
    """Relative max deviation between generator_derivative and its finite difference."""
    analytic = generator_derivative(j, side, r, g)
    numeric = flow_derivative(lambda h: wigner_matrix(j, h).entries, g, side, r, step)
    scale = max(1.0, float(np.max(np.abs(analytic))))
    return float(np.max(np.abs(analytic - numeric))) / scale


def casimir_action(j: HalfInt, side: str, g: Su2Element, step: float = 1e-4) -> np.ndarray:
    """sum_r J_r^2 D^j at g by second-order central differences (-f'' per axis)."""
    total = np.zeros((j.dimension, j.dimension), dtype=complex)
    center = wigner_matrix(j, g).entries
    for r in (1, 2, 3):
        plus = wigner_matrix(j, flowed_element(g, side, r, step)).entries
        minus = wigner_matrix(j, flowed_element(g, side, r, -step)).entries
        total += -(plus - 2.0 * center + minus) / step ** 2
    return total


def mixed_derivative_residual(j: HalfInt, g: Su2Element, r: int, s: int,
                              step: float = 1e-4) -> float:
    """
    |J_r J~_s D - J~_s J_r D| with each derivative taken numerically,
    also compared against the closed form -S_r D S_s.
    """
    def left_then_right(h: Su2Element) -> np.ndarray:
        return flow_derivative(lambda k: wigner_matrix(j, k).entries, h, RIGHT, s, step)

    def right_then_left(h: Su2Element) -> np.ndarray:
        return flow_derivative(lambda k: wigner_matrix(j, k).entries, h, LEFT, r, step)

    lr = flow_derivative(left_then_right, g, LEFT, r, step)
    rl = flow_derivative(right_then_left, g, RIGHT, s, step)
    spins = spin_matrices(j).as_list
    closed = -spins[r - 1] @ wigner_matrix(j, g).entries @ spins[s - 1]
    return float(max(np.max(np.abs(lr - rl)), np.max(np.abs(lr - closed))))


def check_adjoint_relation(j: HalfInt, g: Su2Element, step: float = DEFAULT_FD_STEP) -> float:
    """
    max over r of |J~_r D^j - (-sum_s R_sr J_s D^j)| at g, both sides by flow derivatives,
    with R the adjoint rotation of g.
    """
    rotation = adjoint_rotation(g)

    def d_func(h: Su2Element) -> np.ndarray:
        return wigner_matrix(j, h).entries

    left = [flow_derivative(d_func, g, LEFT, s, step) for s in (1, 2, 3)]
    worst = 0.0
    for r in (1, 2, 3):
        lhs = flow_derivative(d_func, g, RIGHT, r, step)
        rhs = -sum(rotation[s - 1, r - 1] * left[s - 1] for s in (1, 2, 3))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def matrix_exponential_D(j: HalfInt, e: EulerAngles) -> np.ndarray:
    """Reference D^j from exp(-i alpha J3) exp(-i beta J2) exp(-i gamma J3)."""
    spins = spin_matrices(j)
    return (expm(-1j * e.alpha * spins.J3) @ expm(-1j * e.beta * spins.J2)
            @ expm(-1j * e.gamma * spins.J3))


def d_functions_on_grid(two_j_max: int, grid: QuadratureGrid) -> Dict[int, np.ndarray]:
    """D^j at every grid node, keyed by 2j, each of shape (nodes, N_j, N_j)."""
    xi, eta = grid.xi_eta()
    return {two_j: wigner_matrices(two_j, xi, eta) for two_j in range(two_j_max + 1)}


def orthogonality_residual(two_j_max: int, grid: QuadratureGrid) -> float:
    """
    max |int D^j_{mn} conj(D^j'_{m'n'}) dg - delta delta delta / (2j+1)| over j, j' <= j_max.
    """
    blocks = d_functions_on_grid(two_j_max, grid)
    columns = []
    expected_diag = []
    for two_j in range(two_j_max + 1):
        size = two_j + 1
        columns.append(blocks[two_j].reshape(len(grid), size * size))
        expected_diag.extend([1.0 / size] * (size * size))
    phi = np.concatenate(columns, axis=1)
    gram = phi.T @ (grid.weights[:, None] * phi.conj())
    residual = float(np.max(np.abs(gram - np.diag(expected_diag))))
    logger.debug(f"Orthogonality residual for 2j_max={two_j_max}: {residual:.3e}")
    return residual
