"""
Carrier space of the SU(2)/SO(3) Schwinger representation.

Each UIR j occurs once, spanned by the functions

    Y_jm(g) = sqrt((2j+1)!) u_jm(eta, -xi) = (-1)^(j-m) sqrt(2j+1) D^j_{-m,j}(g),
    u_jm(a, b) = a^(j+m) b^(j-m) / sqrt((j+m)! (j-m)!),

which are annihilated by the right raising operator J~1 + i J~2. The same
monomials in two complex variables give the Bargmann (oscillator) picture,
where a_k^dagger multiplies by z_k and a_k differentiates.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, roots_laguerre

from src.core.group_core import (
    EulerAngles,
    GroupTag,
    HalfInt,
    QuadratureGrid,
    Su2Element,
    compose,
    inverse,
    m_index,
    su2_from_euler,
    validate_j,
    validate_m,
)
from src.core.wigner import (
    DEFAULT_FD_STEP,
    LEFT,
    RIGHT,
    big_D,
    flow_derivative,
    wigner_matrices,
    wigner_matrix,
)
from src.utils.errors import LabelError
from src.utils.serialization import complex_from_pairs, complex_pairs

logger = logging.getLogger(__name__)

# 2j up to this bound is checked in exact integer arithmetic
EXACT_TWO_J_MAX = 20


def _log_factorial(n: int) -> float:
    return float(gammaln(n + 1))


def u_jm(j: HalfInt, m: HalfInt, a: complex, b: complex) -> complex:
    """
    Monomial a^(j+m) b^(j-m) / sqrt((j+m)!(j-m)!).

    Raises:
        LabelError: If |m| > j or 2m and 2j differ in parity
    """
    validate_m(j, m)
    p = (j.twice_value + m.twice_value) // 2
    q = (j.twice_value - m.twice_value) // 2
    scale = math.exp(-0.5 * (_log_factorial(p) + _log_factorial(q)))
    return complex(a) ** p * complex(b) ** q * scale


def Y_jm_element(j: HalfInt, m: HalfInt, g: Su2Element) -> complex:
    """Y_jm at a group element."""
    scale = math.exp(0.5 * _log_factorial(j.twice_value + 1))
    return scale * u_jm(j, m, g.eta, -g.xi)


def Y_jm(j: HalfInt, m: HalfInt, e: EulerAngles) -> complex:
    """Y_jm(alpha, beta, gamma) = sqrt((2j+1)!) u_jm(eta, -xi)."""
    return Y_jm_element(j, m, su2_from_euler(e))


def Y_jm_from_D(j: HalfInt, m: HalfInt, g: Su2Element) -> complex:
    """(-1)^(j-m) sqrt(2j+1) D^j_{-m,j}(g), the same function through the D-matrix."""
    validate_m(j, m)
    sign = -1.0 if ((j.twice_value - m.twice_value) // 2) % 2 else 1.0
    d = wigner_matrix(j, g).entries
    return sign * math.sqrt(j.dimension) * complex(d[m_index(j, -m), 0])


def Y_values(two_j: int, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Batched Y_jm for all m (last axis, m descending)."""
    d = wigner_matrices(two_j, xi, eta)
    signs = np.array([(-1.0) ** i for i in range(two_j + 1)])
    # column m = j of D, rows reversed to put -m in m order
    column = d[..., ::-1, 0]
    return math.sqrt(two_j + 1) * signs * column


def coherent_overlap(j: HalfInt, m: HalfInt, alpha: float, beta: float) -> complex:
    """<j, m | alpha, beta> = D^j_{mj}(alpha, beta, 0)."""
    validate_m(j, m)
    return complex(big_D(j, EulerAngles(alpha, beta, 0.0)).entries[m_index(j, m), 0])


def Y_jm_from_coherent(j: HalfInt, m: HalfInt, e: EulerAngles) -> complex:
    """
    Y_jm through spin coherent states:
    exp(-i gamma j) (-1)^(j-m) sqrt(2j+1) <j, -m | alpha, beta>.
    """
    sign = -1.0 if ((j.twice_value - m.twice_value) // 2) % 2 else 1.0
    overlap = coherent_overlap(j, -m, e.alpha, e.beta)
    return np.exp(-1j * e.gamma * j.value) * sign * math.sqrt(j.dimension) * overlap


def right_annihilation_residual(j: HalfInt, m: HalfInt, g: Su2Element,
                                step: float = DEFAULT_FD_STEP) -> float:
    """|(J~1 + i J~2) Y_jm(g)| by central differences, relative to max(1, |Y_jm(g)|)."""
    validate_m(j, m)
    if j.twice_value == 0:
        return 0.0

    def y(h: Su2Element) -> complex:
        return Y_jm_element(j, m, h)

    raised = flow_derivative(y, g, RIGHT, 1, step) + 1j * flow_derivative(y, g, RIGHT, 2, step)
    return float(abs(raised)) / max(1.0, abs(y(g)))


def left_ladder_coefficient(j: HalfInt, m: HalfInt) -> float:
    """(J1 + i J2) D^j_{mj} = -sqrt((j+m)(j-m+1)) D^j_{m-1,j}; zero at m = -j."""
    validate_m(j, m)
    jv, mv = j.value, m.value
    return -math.sqrt(max(0.0, (jv + mv) * (jv - mv + 1.0)))


def ladder_fd_residual(j: HalfInt, m: HalfInt, g: Su2Element,
                       step: float = DEFAULT_FD_STEP) -> float:
    """Left-flow finite difference of (J1 + i J2) D^j_{mj} against the ladder coefficient."""
    row = m_index(j, m)

    def entry(h: Su2Element) -> complex:
        return wigner_matrix(j, h).entries[row, 0]

    numeric = flow_derivative(entry, g, LEFT, 1, step) + 1j * flow_derivative(entry, g, LEFT, 2, step)
    coefficient = left_ladder_coefficient(j, m)
    if m.twice_value == -j.twice_value:
        expected = 0.0
    else:
        expected = coefficient * wigner_matrix(j, g).entries[row + 1, 0]
    return float(abs(numeric - expected))


# ---------------------------------------------------------------------------
# Spin states
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpinState:
    """Coefficients C_m (m = j..-j) of psi = sum_m C_m Y_jm; may be unnormalized."""
    j: HalfInt
    coeffs: np.ndarray

    def __post_init__(self):
        validate_j(self.j)
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.size != self.j.dimension:
            raise LabelError(
                f"Spin-{self.j} state needs {self.j.dimension} coefficients, got {coeffs.size}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "SpinState":
        return SpinState(self.j, self.coeffs / self.norm)

    def evaluate(self, g: Su2Element) -> complex:
        values = Y_values(self.j.twice_value, np.array(g.xi), np.array(g.eta))
        return complex(np.dot(values, self.coeffs))

    def rotated(self, g: Su2Element) -> "SpinState":
        """Left translation: (U(g) psi)(h) = psi(g^-1 h), coefficients D^j(g) C."""
        return SpinState(self.j, wigner_matrix(self.j, g).entries @ self.coeffs)

    def to_dict(self) -> Dict:
        return {"two_j": self.j.twice_value, "coeffs": complex_pairs(self.coeffs)}

    @classmethod
    def from_dict(cls, data: Dict) -> "SpinState":
        try:
            two_j = int(data["two_j"])
            coeffs = complex_from_pairs(data["coeffs"])
        except (KeyError, TypeError, IndexError) as e:
            raise ValueError(f"Malformed SpinState JSON: {e}")
        return cls(HalfInt(two_j), coeffs)

    @classmethod
    def basis(cls, j: HalfInt, m: HalfInt) -> "SpinState":
        coeffs = np.zeros(j.dimension, dtype=complex)
        coeffs[m_index(j, m)] = 1.0
        return cls(j, coeffs)

    @classmethod
    def random(cls, j: HalfInt, rng: np.random.Generator) -> "SpinState":
        raw = rng.normal(size=j.dimension) + 1j * rng.normal(size=j.dimension)
        return cls(j, raw / np.linalg.norm(raw))


def fidelity(a: SpinState, b: SpinState) -> float:
    """Projective fidelity |<a|b>| / (|a| |b|)."""
    if a.j != b.j:
        raise LabelError(f"Cannot compare spin-{a.j} and spin-{b.j} states")
    return float(abs(np.vdot(a.coeffs, b.coeffs)) / (a.norm * b.norm))


# ---------------------------------------------------------------------------
# SO(3)
# ---------------------------------------------------------------------------

def _integer_label(value: Union[int, HalfInt], name: str) -> int:
    if isinstance(value, HalfInt):
        if not value.is_integer:
            raise LabelError(f"SO(3) labels must be integers, got {name}={value}")
        return value.twice_value // 2
    if int(value) != value:
        raise LabelError(f"SO(3) labels must be integers, got {name}={value}")
    return int(value)


def so3_Y(l: Union[int, HalfInt], m: Union[int, HalfInt], e: EulerAngles) -> complex:
    """
    (-1)^(l-m) sqrt(2l+1) D^l_{-m,l} for integer l, the even part of the SU(2) basis.

    Raises:
        LabelError: For half-integer or out-of-range labels
    """
    ell = _integer_label(l, "l")
    em = _integer_label(m, "m")
    j, mm = HalfInt(2 * ell), HalfInt(2 * em)
    validate_m(j, mm)
    e.validate()
    return Y_jm_element(j, mm, su2_from_euler(e))


def so3_Y_closed_form(l: int, m: int, e: EulerAngles) -> complex:
    """
    sqrt((2l+1)!/((l+m)!(l-m)!)) (exp(-i(alpha+gamma)) cos^2(beta/2))^l (-exp(i alpha) tan(beta/2))^(l+m).

    Singular at beta = pi; meant for comparison at generic points.
    """
    ell = _integer_label(l, "l")
    em = _integer_label(m, "m")
    validate_m(HalfInt(2 * ell), HalfInt(2 * em))
    scale = math.exp(0.5 * (_log_factorial(2 * ell + 1) - _log_factorial(ell + em)
                            - _log_factorial(ell - em)))
    base = np.exp(-1j * (e.alpha + e.gamma)) * math.cos(0.5 * e.beta) ** 2
    ratio = -np.exp(1j * e.alpha) * math.tan(0.5 * e.beta)
    return complex(scale * base ** ell * ratio ** (ell + em))


def is_even_under_negation(j: HalfInt, m: HalfInt, z1: complex, z2: complex) -> bool:
    """u_jm(-z1, -z2) = u_jm(z1, z2) holds exactly when j is an integer."""
    return abs(u_jm(j, m, -z1, -z2) - u_jm(j, m, z1, z2)) <= 1e-12 * max(1.0, abs(u_jm(j, m, z1, z2)))


# ---------------------------------------------------------------------------
# Quadrature checks on the group
# ---------------------------------------------------------------------------

def _y_columns(two_j_max: int, grid: QuadratureGrid, integer_only: bool = False) -> np.ndarray:
    xi, eta = grid.xi_eta()
    columns = []
    for two_j in range(two_j_max + 1):
        if integer_only and two_j % 2:
            continue
        columns.append(Y_values(two_j, xi, eta))
    return np.concatenate(columns, axis=1)


def y_orthonormality_residual(two_j_max: int, grid: QuadratureGrid) -> float:
    """max |int Y_jm conj(Y_j'm') dg - delta delta| over j, j' <= j_max."""
    integer_only = grid.group_tag is GroupTag.SO3
    phi = _y_columns(two_j_max, grid, integer_only)
    gram = phi.T @ (grid.weights[:, None] * phi.conj())
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def factorwise_selection_residual(two_j_max: int, grid: QuadratureGrid) -> float:
    """
    Integrate Y_jm conj(Y_j'm') over gamma alone and over alpha alone.

    The gamma average vanishes unless j = j' and the alpha average vanishes unless
    m = m'; returns the largest average that should vanish.
    """
    n_alpha, n_beta, n_gamma = grid.counts
    phi = _y_columns(two_j_max, grid).reshape(n_alpha, n_beta, n_gamma, -1)
    labels = [(two_j, two_j - 2 * i) for two_j in range(two_j_max + 1) for i in range(two_j + 1)]
    worst = 0.0
    gamma_avg = np.einsum("abgp,abgq->abpq", phi, phi.conj()) / n_gamma
    alpha_avg = np.einsum("abgp,abgq->bgpq", phi, phi.conj()) / n_alpha
    for p, (two_j, two_m) in enumerate(labels):
        for q, (two_j2, two_m2) in enumerate(labels):
            if two_j != two_j2:
                worst = max(worst, float(np.max(np.abs(gamma_avg[..., p, q]))))
            if two_m != two_m2 and (two_m - two_m2) % 2 == 0:
                worst = max(worst, float(np.max(np.abs(alpha_avg[..., p, q]))))
    return worst


# ---------------------------------------------------------------------------
# Bargmann space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BargmannPoint:
    """(z1, z2) = (rho eta, -rho xi)."""
    z1: complex
    z2: complex

    @property
    def rho_sq(self) -> float:
        return abs(self.z1) ** 2 + abs(self.z2) ** 2

    @classmethod
    def from_element(cls, g: Su2Element, rho: float) -> "BargmannPoint":
        return cls(rho * g.eta, -rho * g.xi)

    @classmethod
    def from_euler(cls, e: EulerAngles, rho: float) -> "BargmannPoint":
        return cls.from_element(su2_from_euler(e), rho)


@dataclass
class BargmannPolynomial:
    """Finite combination sum c_ab z1^a z2^b, stored as {(a, b): c_ab}."""
    terms: Dict[Tuple[int, int], complex] = field(default_factory=dict)

    @classmethod
    def constant(cls, value: complex = 1.0) -> "BargmannPolynomial":
        return cls({(0, 0): complex(value)})

    @classmethod
    def u(cls, j: HalfInt, m: HalfInt) -> "BargmannPolynomial":
        validate_m(j, m)
        a = (j.twice_value + m.twice_value) // 2
        b = (j.twice_value - m.twice_value) // 2
        return cls({(a, b): math.exp(-0.5 * (_log_factorial(a) + _log_factorial(b)))})

    def __add__(self, other: "BargmannPolynomial") -> "BargmannPolynomial":
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms.get(key, 0.0) + value
        return BargmannPolynomial(terms)

    def scaled(self, factor: complex) -> "BargmannPolynomial":
        return BargmannPolynomial({key: factor * value for key, value in self.terms.items()})

    def __call__(self, z1, z2):
        total = 0.0
        for (a, b), c in self.terms.items():
            total = total + c * np.power(z1, a) * np.power(z2, b)
        return total

    def creation(self, k: int) -> "BargmannPolynomial":
        """a_k^dagger: multiply by z_k."""
        shift = (1, 0) if k == 1 else (0, 1)
        return BargmannPolynomial({(a + shift[0], b + shift[1]): c for (a, b), c in self.terms.items()})

    def annihilation(self, k: int) -> "BargmannPolynomial":
        """a_k: d/dz_k."""
        terms: Dict[Tuple[int, int], complex] = {}
        for (a, b), c in self.terms.items():
            power = a if k == 1 else b
            if power == 0:
                continue
            key = (a - 1, b) if k == 1 else (a, b - 1)
            terms[key] = terms.get(key, 0.0) + power * c
        return BargmannPolynomial(terms)

    def j_plus(self) -> "BargmannPolynomial":
        return self.annihilation(2).creation(1)

    def j_minus(self) -> "BargmannPolynomial":
        return self.annihilation(1).creation(2)

    def j_three(self) -> "BargmannPolynomial":
        """(N1 - N2)/2."""
        return BargmannPolynomial({(a, b): 0.5 * (a - b) * c for (a, b), c in self.terms.items()})


def bargmann_inner_product(p: BargmannPolynomial, q: BargmannPolynomial) -> complex:
    """
    Gaussian-weight inner product, from <z1^a z2^b, z1^c z2^d> = a! b! delta_ac delta_bd.
    """
    total = 0.0j
    for key, c in p.terms.items():
        if key in q.terms:
            a, b = key
            total += c * np.conj(q.terms[key]) * math.exp(_log_factorial(a) + _log_factorial(b))
    return complex(total)


def bargmann_quadrature(p: BargmannPolynomial, q: BargmannPolynomial,
                        n_radial: int = 16, n_angle: int = 24) -> complex:
    """
    Same inner product by quadrature: per variable, Gauss-Laguerre in t = |z|^2
    times a uniform grid in arg z, using d^2z/pi e^{-|z|^2} = dt e^{-t} dphi/2pi.
    """
    t, w = roots_laguerre(n_radial)
    phi = 2.0 * math.pi * np.arange(n_angle) / n_angle
    z = (np.sqrt(t)[:, None] * np.exp(1j * phi)[None, :]).ravel()
    weight = np.repeat(w / n_angle, n_angle)
    z1, z2 = np.meshgrid(z, z, indexing="ij")
    weights = np.outer(weight, weight)
    values = p(z1, z2) * np.conj(q(z1, z2))
    return complex(np.sum(weights * values))


def radial_weight(j: HalfInt, rho_sq: float) -> float:
    """f_j(rho^2) = (rho^2)^(2j) exp(-rho^2) / (2j+1)!."""
    validate_j(j)
    if rho_sq < 0:
        raise ValueError(f"rho_sq must be >= 0, got {rho_sq}")
    two_j = j.twice_value
    if rho_sq == 0.0:
        return 1.0 if two_j == 0 else 0.0
    return math.exp(two_j * math.log(rho_sq) - rho_sq - _log_factorial(two_j + 1))


def radial_weight_normalization(j: HalfInt) -> float:
    """int rho^2 f_j(rho^2) d rho^2 from the exact radial moment of degree 2j."""
    validate_j(j)
    return float(_radial_normalization_exact(j.twice_value))


def _radial_normalization_exact(two_j: int) -> Fraction:
    return Fraction(radial_moment_exact(two_j), math.factorial(two_j + 1))


def radial_weight_normalization_numeric(j: HalfInt) -> float:
    value, _ = quad(lambda t: t * radial_weight(j, t), 0.0, np.inf, epsabs=1e-14, epsrel=1e-14, limit=200)
    return float(value)


def sphere_moment_exact(a: int, b: int) -> Fraction:
    """int dg |eta|^(2a) |xi|^(2b) as int_0^1 u^a (1-u)^b du, expanded exactly."""
    return sum(
        (Fraction(math.comb(b, k) * (-1) ** k, a + k + 1) for k in range(b + 1)),
        Fraction(0),
    )


def radial_moment_exact(degree: int) -> int:
    """
    int_0^inf t * t^degree * e^{-t} dt by repeated integration by parts.

    The antiderivative of p(t) e^{-t} is -(p + p' + p'' + ...) e^{-t}, so the
    integral is the sum of the derivatives of p at zero.
    """
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    coefficients = [0] * (degree + 1) + [1]
    total = 0
    while coefficients:
        total += coefficients[0]
        coefficients = [k * c for k, c in enumerate(coefficients)][1:]
    return total


def bargmann_identity_defects(two_j_max: int = EXACT_TWO_J_MAX) -> List[Tuple[int, int]]:
    """
    Exact checks, for every monomial z1^a z2^b with a + b = 2j <= two_j_max, that

      radial moment x sphere moment = a! b!      (Gaussian form of the inner product)
      (2j+1)! x normalization(f_j) x sphere moment / (a! b!) = 1   (f_j form)

    Returns:
        the (a, b) pairs for which either identity fails (empty when all hold)
    """
    defects = []
    for two_j in range(two_j_max + 1):
        normalization = _radial_normalization_exact(two_j)
        for a in range(two_j + 1):
            b = two_j - a
            sphere = sphere_moment_exact(a, b)
            gaussian = radial_moment_exact(two_j) * sphere
            ab = math.factorial(a) * math.factorial(b)
            smeared = math.factorial(two_j + 1) * normalization * sphere / ab
            if gaussian != ab or smeared != 1:
                defects.append((a, b))
    return defects


def rotation_covariance_residual(state: SpinState, g: Su2Element,
                                 points: Iterable[Su2Element]) -> float:
    """max |(U(g) psi)(h) - psi(g^-1 h)| over the given points."""
    rotated = state.rotated(g)
    g_inv = inverse(g)
    return max(abs(rotated.evaluate(h) - state.evaluate(compose(g_inv, h))) for h in points)
