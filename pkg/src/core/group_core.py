"""
SU(2)/SO(3) group arithmetic.

Elements of SU(2) are stored as the first column (xi, eta) of the defining
matrix

    g = [[xi, -conj(eta)],
         [eta, conj(xi)]],   |xi|^2 + |eta|^2 = 1.

The module provides the Euler chart (alpha, beta, gamma) with
xi = exp(-i(alpha+gamma)/2) cos(beta/2), eta = exp(i(alpha-gamma)/2) sin(beta/2),
exponential coordinates g = exp(-i theta n.sigma/2), the geodesic midpoints used
by the Weyl-symbol calculus, the adjoint rotation and Haar quadrature grids.

Everything here is an immutable value or a pure function.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, List, Tuple, Union

import numpy as np
from scipy.special import roots_legendre

from src.utils.errors import AntipodeError, EulerRangeError, GridError, LabelError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
NORM_TOLERANCE = 1e-14
# below this modulus the phase of xi or eta carries no information
POLE_THRESHOLD = 1e-15
ANTIPODE_THRESHOLD = 1e-12

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class GroupTag(Enum):
    """Group whose Euler chart / Haar measure is meant."""
    SU2 = "SU2"
    SO3 = "SO3"

    @property
    def gamma_period(self) -> float:
        return FOUR_PI if self is GroupTag.SU2 else TWO_PI


# ---------------------------------------------------------------------------
# Labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class HalfInt:
    """
    A half-integer stored as twice its value, so j = 0, 1/2, 1, ... is exact.

    Example:
        >>> HalfInt(3)            # j = 3/2
        >>> HalfInt.parse("3/2")
    """
    twice_value: int

    @classmethod
    def parse(cls, value: Union[str, int, float, Fraction, "HalfInt"]) -> "HalfInt":
        """Build from "3/2", "1.5", 1.5, Fraction(3, 2) or an existing HalfInt."""
        if isinstance(value, HalfInt):
            return value
        try:
            twice = Fraction(str(value).strip()) * 2
        except (ValueError, ZeroDivisionError):
            raise LabelError(f"Not a half-integer: {value!r}")
        if twice.denominator != 1:
            raise LabelError(f"Not a half-integer: {value!r}")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_value / 2.0

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    @property
    def dimension(self) -> int:
        """N_j = 2j + 1 when used as a representation label."""
        return self.twice_value + 1

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice_value)

    def __str__(self) -> str:
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


def validate_j(j: HalfInt) -> None:
    if j.twice_value < 0:
        raise LabelError(f"Representation label j must be >= 0, got {j}")


def validate_m(j: HalfInt, m: HalfInt) -> None:
    """Check |m| <= j and 2m = 2j (mod 2)."""
    validate_j(j)
    if abs(m.twice_value) > j.twice_value or (j.twice_value - m.twice_value) % 2 != 0:
        raise LabelError(f"Label m={m} is not valid for j={j}")


def m_labels(j: HalfInt) -> List[HalfInt]:
    """m = j, j-1, ..., -j (the row/column order used everywhere)."""
    validate_j(j)
    return [HalfInt(j.twice_value - 2 * i) for i in range(j.dimension)]


def m_index(j: HalfInt, m: HalfInt) -> int:
    validate_m(j, m)
    return (j.twice_value - m.twice_value) // 2


def j_labels(two_j_max: int) -> List[HalfInt]:
    """All j = 0, 1/2, ..., j_max."""
    return [HalfInt(two_j) for two_j in range(two_j_max + 1)]


# ---------------------------------------------------------------------------
# Elements and charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EulerAngles:
    """Euler angles; gamma lives in [0, 4pi) on SU(2) and [0, 2pi) on SO(3)."""
    alpha: float
    beta: float
    gamma: float
    group_tag: GroupTag = GroupTag.SU2

    def validate(self) -> None:
        if not 0.0 <= self.alpha < TWO_PI:
            raise EulerRangeError(f"alpha={self.alpha} outside [0, 2pi)")
        if not 0.0 <= self.beta <= math.pi:
            raise EulerRangeError(f"beta={self.beta} outside [0, pi]")
        period = self.group_tag.gamma_period
        if not 0.0 <= self.gamma < period:
            raise EulerRangeError(
                f"gamma={self.gamma} outside [0, {'4pi' if period > TWO_PI else '2pi'}) "
                f"for {self.group_tag.value}"
            )


@dataclass(frozen=True)
class Su2Element:
    xi: complex
    eta: complex

    @classmethod
    def identity(cls) -> "Su2Element":
        return cls(1.0 + 0.0j, 0.0j)

    def matrix(self) -> np.ndarray:
        return su2_matrix(self)

    @property
    def norm_sq(self) -> float:
        return abs(self.xi) ** 2 + abs(self.eta) ** 2

    def close_to(self, other: "Su2Element", tolerance: float = 1e-12) -> bool:
        return distance(self, other) <= tolerance


@dataclass(frozen=True)
class AxisAngle:
    """
    Exponential coordinates g = exp(-i theta axis.sigma/2), theta in [0, 2pi).

    Raises:
        EulerRangeError: If theta is outside [0, 2pi)
        ValueError: If axis is not a unit vector
    """
    axis: Tuple[float, float, float]
    theta: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"AxisAngle axis must be a unit vector, |axis|={norm}")
        if not 0.0 <= self.theta < TWO_PI:
            raise EulerRangeError(f"AxisAngle theta={self.theta} outside [0, 2pi)")
        object.__setattr__(self, "axis", tuple(float(x) for x in axis / norm))

    @property
    def vector(self) -> np.ndarray:
        """X = theta * axis."""
        return self.theta * np.asarray(self.axis)


def su2_matrix(g: Su2Element) -> np.ndarray:
    return np.array([[g.xi, -np.conj(g.eta)], [g.eta, np.conj(g.xi)]], dtype=complex)


def _renormalized(xi: complex, eta: complex) -> Su2Element:
    norm = math.sqrt(abs(xi) ** 2 + abs(eta) ** 2)
    return Su2Element(complex(xi) / norm, complex(eta) / norm)


def distance(a: Su2Element, b: Su2Element) -> float:
    """Max entry difference of the defining matrices."""
    return max(abs(a.xi - b.xi), abs(a.eta - b.eta))


def su2_from_euler(e: EulerAngles) -> Su2Element:
    """
    Element with Euler angles e.

    Raises:
        EulerRangeError: If an angle is outside the chart range of e.group_tag
    """
    e.validate()
    half_beta = 0.5 * e.beta
    xi = np.exp(-0.5j * (e.alpha + e.gamma)) * math.cos(half_beta)
    eta = np.exp(0.5j * (e.alpha - e.gamma)) * math.sin(half_beta)
    return Su2Element(complex(xi), complex(eta))


def _wrap(angle: float, period: float) -> float:
    wrapped = angle % period
    # floating point may land exactly on the period
    if wrapped >= period:
        wrapped = 0.0
    return float(wrapped)


def su2_to_euler(g: Su2Element) -> EulerAngles:
    """
    Euler angles of g. At beta = 0 or pi the whole phase goes to gamma (alpha = 0).
    """
    abs_xi, abs_eta = abs(g.xi), abs(g.eta)
    beta = 2.0 * math.atan2(abs_eta, abs_xi)
    beta = min(max(beta, 0.0), math.pi)
    arg_xi = math.atan2(g.xi.imag, g.xi.real)
    arg_eta = math.atan2(g.eta.imag, g.eta.real)

    if abs_eta < POLE_THRESHOLD:
        return EulerAngles(0.0, 0.0, _wrap(-2.0 * arg_xi, FOUR_PI))
    if abs_xi < POLE_THRESHOLD:
        return EulerAngles(0.0, math.pi, _wrap(-2.0 * arg_eta, FOUR_PI))

    alpha = _wrap(arg_eta - arg_xi, TWO_PI)
    gamma = _wrap(-2.0 * arg_xi - alpha, FOUR_PI)
    return EulerAngles(alpha, beta, gamma)


def compose(a: Su2Element, b: Su2Element) -> Su2Element:
    """Matrix product a*b, renormalized to unit norm."""
    xi = a.xi * b.xi - np.conj(a.eta) * b.eta
    eta = a.eta * b.xi + np.conj(a.xi) * b.eta
    return _renormalized(xi, eta)


def compose_arrays(xi_a, eta_a, xi_b, eta_b) -> Tuple[np.ndarray, np.ndarray]:
    """Batched a*b on (xi, eta) arrays that broadcast against each other."""
    xi = xi_a * xi_b - np.conj(eta_a) * eta_b
    eta = eta_a * xi_b + np.conj(xi_a) * eta_b
    return xi, eta


def inverse(a: Su2Element) -> Su2Element:
    return Su2Element(a.xi.conjugate(), -a.eta)


def negate(a: Su2Element) -> Su2Element:
    """-a, the other preimage of the same rotation."""
    return Su2Element(-a.xi, -a.eta)


# ---------------------------------------------------------------------------
# Exponential coordinates and midpoints
# ---------------------------------------------------------------------------

def exp_vectors(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched exp(-i X.sigma/2) for X of shape (..., 3).

    Returns:
        (xi, eta) arrays of shape x.shape[:-1]
    """
    x = np.asarray(x, dtype=float)
    theta = np.linalg.norm(x, axis=-1)
    # sin(theta/2)/theta, regular at theta = 0
    sin_over = 0.5 * np.sinc(theta / TWO_PI)
    xi = np.cos(0.5 * theta) - 1j * sin_over * x[..., 2]
    eta = sin_over * (x[..., 1] - 1j * x[..., 0])
    return xi, eta


def exp_vec(x: np.ndarray) -> Su2Element:
    xi, eta = exp_vectors(np.asarray(x, dtype=float).reshape(3))
    return _renormalized(complex(xi), complex(eta))


def exp_map(x: AxisAngle) -> Su2Element:
    return exp_vec(x.vector)


def log_vec(g: Su2Element) -> np.ndarray:
    """
    X with exp_vec(X) = g and |X| in [0, 2pi).

    Raises:
        AntipodeError: If g is (numerically) -identity
    """
    cos_half = g.xi.real
    if 1.0 + cos_half < ANTIPODE_THRESHOLD:
        raise AntipodeError("log is undefined at -identity")
    v = np.array([-g.eta.imag, g.eta.real, -g.xi.imag])
    sin_half = float(np.linalg.norm(v))
    theta = 2.0 * math.atan2(sin_half, cos_half)
    if sin_half < 1e-8:
        # theta/sin(theta/2) -> 2/cos(theta/2) as v -> 0
        return 2.0 * v / cos_half
    return theta * v / sin_half


def log_map(g: Su2Element) -> AxisAngle:
    x = log_vec(g)
    theta = float(np.linalg.norm(x))
    if theta == 0.0:
        return AxisAngle((0.0, 0.0, 1.0), 0.0)
    return AxisAngle(tuple(x / theta), theta)


def midpoint_s0(g: Su2Element) -> Su2Element:
    """Midpoint of the one-parameter subgroup through g: s0(g)^2 = g."""
    return exp_vec(0.5 * log_vec(g))


def midpoint_s(g1: Su2Element, g2: Su2Element) -> Su2Element:
    """
    Geodesic midpoint s(g1, g2) = g1 s0(g1^-1 g2).

    Symmetric, s(g, g) = g, and s(a g1 b, a g2 b) = a s(g1, g2) b.

    Raises:
        AntipodeError: If g1^-1 g2 = -identity
    """
    return compose(g1, midpoint_s0(compose(inverse(g1), g2)))


# ---------------------------------------------------------------------------
# Rotations
# ---------------------------------------------------------------------------

def _rz(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def so3_from_euler(e: EulerAngles) -> np.ndarray:
    """R = Rz(alpha) Ry(beta) Rz(gamma)."""
    e.validate()
    return _rz(e.alpha) @ _ry(e.beta) @ _rz(e.gamma)


def adjoint_rotation(g: Su2Element) -> np.ndarray:
    """R_sr = tr(sigma_s g sigma_r g^dagger)/2, i.e. g sigma_r g^-1 = sum_s R_sr sigma_s."""
    matrix = su2_matrix(g)
    conjugated = np.einsum("ab,rbc,dc->rad", matrix, PAULI, matrix.conj())
    rotation = 0.5 * np.einsum("sba,rab->sr", PAULI, conjugated)
    return np.real(rotation)


def rotation_residual(rotation: np.ndarray) -> float:
    """max(|R^T R - I|, |det R - 1|)."""
    orthogonality = np.max(np.abs(rotation.T @ rotation - np.eye(3)))
    return float(max(orthogonality, abs(np.linalg.det(rotation) - 1.0)))


# ---------------------------------------------------------------------------
# Random elements and Haar quadrature
# ---------------------------------------------------------------------------

def random_su2(rng: np.random.Generator) -> Su2Element:
    """Haar-distributed element (normalized 4d Gaussian)."""
    a, b, c, d = rng.normal(size=4)
    return _renormalized(complex(a, b), complex(c, d))


def random_su2_batch(rng: np.random.Generator, count: int) -> List[Su2Element]:
    return [random_su2(rng) for _ in range(count)]


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """
    Product grid for the normalized Haar measure.

    Nodes are flattened in (alpha, beta, gamma) C order. ``counts`` records the
    node counts so exactness can be checked against a requested j_max.
    """
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    weights: np.ndarray
    group_tag: GroupTag
    counts: Tuple[int, int, int]

    def __len__(self) -> int:
        return int(self.weights.size)

    @property
    def nodes(self) -> List[EulerAngles]:
        return [
            EulerAngles(float(a), float(b), float(c), self.group_tag)
            for a, b, c in zip(self.alpha, self.beta, self.gamma)
        ]

    def iter_elements(self) -> Iterator[Su2Element]:
        xi, eta = self.xi_eta()
        for x, y in zip(xi, eta):
            yield Su2Element(complex(x), complex(y))

    def xi_eta(self) -> Tuple[np.ndarray, np.ndarray]:
        return euler_to_xi_eta(self.alpha, self.beta, self.gamma)

    def exact_two_j_max(self) -> int:
        """Largest 2J for which products of D^j, D^j' with j, j' <= J are integrated exactly."""
        n_alpha, n_beta, n_gamma = self.counts
        gamma_bound = (n_gamma - 1) // 2 if self.group_tag is GroupTag.SU2 else n_gamma - 1
        return max(0, min(n_alpha - 1, n_beta - 1, gamma_bound))

    def same_as(self, other: "QuadratureGrid") -> bool:
        return self.group_tag is other.group_tag and self.counts == other.counts


def euler_to_xi_eta(alpha, beta, gamma) -> Tuple[np.ndarray, np.ndarray]:
    """Batched Euler -> (xi, eta) without range checks."""
    alpha, beta, gamma = (np.asarray(v, dtype=float) for v in (alpha, beta, gamma))
    xi = np.exp(-0.5j * (alpha + gamma)) * np.cos(0.5 * beta)
    eta = np.exp(0.5j * (alpha - gamma)) * np.sin(0.5 * beta)
    return xi, eta


def haar_grid(n_alpha: int, n_beta: int, n_gamma: int,
              group_tag: GroupTag = GroupTag.SU2) -> QuadratureGrid:
    """
    Uniform nodes in alpha and gamma, Gauss-Legendre in cos(beta).

    Raises:
        GridError: If a node count is not positive
    """
    for name, count in (("n_alpha", n_alpha), ("n_beta", n_beta), ("n_gamma", n_gamma)):
        if not isinstance(count, (int, np.integer)) or count < 1:
            raise GridError(f"{name} must be a positive integer, got {count!r}")

    alphas = TWO_PI * np.arange(n_alpha) / n_alpha
    gammas = group_tag.gamma_period * np.arange(n_gamma) / n_gamma
    x, w = roots_legendre(n_beta)
    betas = np.arccos(np.clip(x, -1.0, 1.0))

    a, b, c = np.meshgrid(alphas, betas, gammas, indexing="ij")
    weights = np.broadcast_to(
        (0.5 * w)[None, :, None] / (n_alpha * n_gamma), a.shape
    )
    grid = QuadratureGrid(
        alpha=a.ravel(), beta=b.ravel(), gamma=c.ravel(),
        weights=np.ascontiguousarray(weights).ravel(),
        group_tag=group_tag, counts=(n_alpha, n_beta, n_gamma),
    )
    logger.debug(f"Built {group_tag.value} Haar grid {grid.counts} with {len(grid)} nodes")
    return grid


def exact_haar_grid(two_j_max: int, group_tag: GroupTag = GroupTag.SU2) -> QuadratureGrid:
    """Smallest product grid that integrates D^j D^j'* exactly for j, j' <= j_max."""
    if two_j_max < 0:
        raise GridError(f"two_j_max must be >= 0, got {two_j_max}")
    n_gamma = 2 * two_j_max + 1 if group_tag is GroupTag.SU2 else two_j_max + 1
    return haar_grid(two_j_max + 1, two_j_max + 1, n_gamma, group_tag)


def integrate(values: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
    """Quadrature of node values (node axis first)."""
    values = np.asarray(values)
    if values.shape[0] != len(grid):
        raise GridError(f"Expected {len(grid)} node values, got {values.shape[0]}")
    return np.tensordot(grid.weights, values, axes=(0, 0))
