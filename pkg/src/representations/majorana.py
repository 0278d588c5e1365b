"""
Majorana constellations of spin-j pure states.

A state psi = sum_m C_m Y_jm is encoded by the polynomial

    p(zeta) = sum_m (-1)^(j-m) C_m zeta^(j+m) / sqrt((j+m)! (j-m)!)

whose 2j roots (missing degree counted as roots at infinity) are mapped to the
sphere by stereographic projection from the South pole: zeta = 0 is the North
pole, zeta = infinity the South pole. Rotating the state by D^j(g) moves every
root by the Moebius map zeta -> (conj(xi) zeta + eta) / (xi - conj(eta) zeta).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import gammaln

from src.core.group_core import HalfInt, Su2Element
from src.representations.schwinger_basis import SpinState
from src.utils.serialization import complex_from_pairs, complex_pairs

logger = logging.getLogger(__name__)

# leading coefficients below this fraction of the largest one are structural zeros
LEADING_ZERO_RATIO = 1e-12
# homogeneous second coordinate below this fraction of the first means infinity
POLE_RATIO = 1e-15
PHASE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"SpherePoint must have unit norm, got {norm}")
        object.__setattr__(self, "x", self.x / norm)
        object.__setattr__(self, "y", self.y / norm)
        object.__setattr__(self, "z", self.z / norm)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


NORTH_POLE = SpherePoint(0.0, 0.0, 1.0)
SOUTH_POLE = SpherePoint(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class Constellation:
    """2j points: finite stereographic roots plus a count of points at infinity."""
    two_j: int
    finite_roots: Tuple[complex, ...] = field(default_factory=tuple)
    infinity_count: int = 0

    def __post_init__(self):
        roots = tuple(complex(root) for root in self.finite_roots)
        object.__setattr__(self, "finite_roots", roots)
        if self.infinity_count < 0 or len(roots) + self.infinity_count != self.two_j:
            raise ValueError(
                f"Constellation needs {self.two_j} points, got {len(roots)} finite "
                f"+ {self.infinity_count} at infinity"
            )

    def sphere_points(self) -> List[SpherePoint]:
        points = [stereographic_to_sphere(root) for root in self.finite_roots]
        return points + [SOUTH_POLE] * self.infinity_count

    def to_dict(self) -> Dict:
        # sorted so the output does not depend on the root finder's order
        roots = sorted(self.finite_roots, key=lambda z: (round(z.real, 12), round(z.imag, 12)))
        return {
            "two_j": self.two_j,
            "finite_roots": complex_pairs(roots),
            "points_at_infinity": self.infinity_count,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Constellation":
        try:
            roots = tuple(complex_from_pairs(data.get("finite_roots", [])))
            return cls(int(data["two_j"]), roots, int(data.get("points_at_infinity", 0)))
        except (KeyError, TypeError, IndexError) as e:
            raise ValueError(f"Malformed Constellation JSON: {e}")


def stereographic_to_sphere(zeta: Optional[complex]) -> SpherePoint:
    """zeta = exp(i alpha) tan(beta/2) -> point with polar angle beta, azimuth alpha; None or inf is the South pole."""
    if zeta is None or not np.isfinite(zeta):
        return SOUTH_POLE
    zeta = complex(zeta)
    modulus_sq = abs(zeta) ** 2
    if modulus_sq <= 1.0:
        denominator = 1.0 + modulus_sq
        return SpherePoint(2.0 * zeta.real / denominator, 2.0 * zeta.imag / denominator,
                           (1.0 - modulus_sq) / denominator)
    # work with w = 1/zeta far from the North pole
    w = 1.0 / zeta
    w_sq = abs(w) ** 2
    denominator = w_sq + 1.0
    return SpherePoint(2.0 * w.real / denominator, -2.0 * w.imag / denominator,
                       (w_sq - 1.0) / denominator)


def sphere_to_stereographic(point: SpherePoint) -> complex:
    """Inverse projection; the South pole maps to complex infinity."""
    if 1.0 + point.z < 1e-15:
        return complex(math.inf, 0.0)
    return complex(point.x, point.y) / (1.0 + point.z)


def _dressing(two_j: int) -> np.ndarray:
    """sqrt(k! (2j-k)!) for polynomial power k = j + m."""
    k = np.arange(two_j + 1)
    return np.exp(0.5 * (gammaln(k + 1) + gammaln(two_j - k + 1)))


def majorana_polynomial(psi: SpinState) -> np.ndarray:
    """Coefficients p_k of zeta^k, k = 0..2j (lowest power first)."""
    two_j = psi.j.twice_value
    # coefficient index i has m = j - i, power k = 2j - i and sign (-1)^i
    signs = np.array([(-1.0) ** i for i in range(two_j + 1)])
    by_index = signs * psi.coeffs
    powers = by_index[::-1]
    return powers / _dressing(two_j)


def _polish(coefficients: np.ndarray, root: complex) -> complex:
    """One Newton step, kept only if it lowers |p|."""
    poly = np.polynomial.Polynomial(coefficients)
    value = poly(root)
    slope = poly.deriv()(root)
    if slope == 0:
        return root
    candidate = root - value / slope
    return candidate if abs(poly(candidate)) <= abs(value) else root


def state_to_constellation(psi: SpinState) -> Constellation:
    """
    Roots of the Majorana polynomial with multiplicity.

    Raises:
        ValueError: For the zero state
    """
    two_j = psi.j.twice_value
    if psi.norm == 0.0:
        raise ValueError("The zero vector has no Majorana constellation")
    coefficients = majorana_polynomial(psi)
    scale = float(np.max(np.abs(coefficients)))

    degree = two_j
    while degree > 0 and abs(coefficients[degree]) <= LEADING_ZERO_RATIO * scale:
        degree -= 1
    infinity_count = two_j - degree
    active = coefficients[:degree + 1]

    zero_count = 0
    while zero_count < degree and active[zero_count] == 0:
        zero_count += 1
    reduced = active[zero_count:]

    roots: List[complex] = [0j] * zero_count
    if reduced.size > 1:
        found = np.roots(reduced[::-1])
        roots.extend(_polish(reduced, complex(root)) for root in found)

    logger.debug(
        f"Constellation for 2j={two_j}: {len(roots)} finite roots, {infinity_count} at infinity"
    )
    return Constellation(two_j, tuple(roots), infinity_count)


def constellation_to_state(c: Constellation) -> SpinState:
    """
    Unit-norm state whose constellation is c; the first nonzero coefficient
    (m descending) is made real and positive.
    """
    two_j = c.two_j
    monic = np.poly(np.array(c.finite_roots, dtype=complex)) if c.finite_roots else np.array([1.0])
    powers = np.zeros(two_j + 1, dtype=complex)
    # np.poly is highest power first; powers above the finite degree stay zero
    powers[:len(monic)] = monic[::-1]
    dressed = powers * _dressing(two_j)
    signs = np.array([(-1.0) ** i for i in range(two_j + 1)])
    coeffs = signs * dressed[::-1]
    coeffs = coeffs / np.linalg.norm(coeffs)

    magnitudes = np.abs(coeffs)
    leading = int(np.argmax(magnitudes > PHASE_THRESHOLD * magnitudes.max()))
    coeffs = coeffs * np.exp(-1j * np.angle(coeffs[leading]))
    coeffs[leading] = abs(coeffs[leading])
    return SpinState(HalfInt(two_j), coeffs)


def rotate_constellation(g: Su2Element, c: Constellation) -> Constellation:
    """
    Apply the Moebius action of g to every point, in homogeneous coordinates
    (a, b) -> (conj(xi) a + eta b, -conj(eta) a + xi b), zeta = a/b.
    """
    xi, eta = g.xi, g.eta
    points = [(root, 1.0 + 0j) for root in c.finite_roots] + [(1.0 + 0j, 0j)] * c.infinity_count
    finite: List[complex] = []
    infinity_count = 0
    for a, b in points:
        a_new = np.conj(xi) * a + eta * b
        b_new = -np.conj(eta) * a + xi * b
        if abs(b_new) <= POLE_RATIO * abs(a_new):
            infinity_count += 1
        else:
            finite.append(complex(a_new / b_new))
    return Constellation(c.two_j, tuple(finite), infinity_count)


def great_circle(p: SpherePoint, q: SpherePoint) -> float:
    # atan2 form stays accurate for nearly coincident points
    cross = np.linalg.norm(np.cross(p.vector, q.vector))
    return float(math.atan2(cross, float(np.dot(p.vector, q.vector))))


def constellation_distance(a: Constellation, b: Constellation) -> float:
    """
    Largest matched great-circle distance under the minimum-weight perfect
    matching of the two point multisets.
    """
    if a.two_j != b.two_j:
        raise ValueError(f"Cannot match constellations with 2j={a.two_j} and 2j={b.two_j}")
    if a.two_j == 0:
        return 0.0
    pa, pb = a.sphere_points(), b.sphere_points()
    cost = np.array([[great_circle(p, q) for q in pb] for p in pa])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def pole_counts(c: Constellation) -> Tuple[int, int]:
    """(points exactly at zeta = 0, points at infinity)."""
    return sum(1 for root in c.finite_roots if root == 0), c.infinity_count


def random_constellation(two_j: int, rng: np.random.Generator) -> Constellation:
    """2j points drawn uniformly on the sphere."""
    roots = []
    for _ in range(two_j):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        roots.append(sphere_to_stereographic(SpherePoint(*v)))
    return Constellation(two_j, tuple(roots), 0)


def write_constellation_svg(c: Constellation, path: str, title: Optional[str] = None) -> None:
    """Static scatter of the finite roots in the stereographic plane."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    circle = plt.Circle((0.0, 0.0), 1.0, fill=False, linestyle="--", linewidth=0.8)
    ax.add_patch(circle)
    if c.finite_roots:
        roots = np.array(c.finite_roots)
        ax.scatter(roots.real, roots.imag, s=30)
        extent = max(1.5, 1.1 * float(np.max(np.abs(roots))))
    else:
        extent = 1.5
    ax.set_xlim(-extent, extent)
    ax.set_ylim(-extent, extent)
    ax.set_aspect("equal")
    ax.set_xlabel("Re zeta")
    ax.set_ylabel("Im zeta")
    label = title or f"2j = {c.two_j}"
    if c.infinity_count:
        label += f" ({c.infinity_count} at infinity)"
    ax.set_title(label)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote constellation plot to {path}")
