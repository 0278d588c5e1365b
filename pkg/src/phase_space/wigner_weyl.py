"""
Wigner-Weyl calculus on SU(2) over a truncated momentum basis.

The momentum basis |jmn> of L^2(G) has wavefunctions <g|jmn> = N_j^{1/2} D^j_mn(g)
and is flattened in the order j ascending, then m descending, then n descending.
Operators are dense matrices over these labels for j <= j_max; the ideal-ket kernel
<g''|A|g'> is only ever evaluated through them.

Weyl symbols resolve the midpoint delta by writing g' = g s^-1, g'' = g s with
s = exp(X/2), so that g''^-1 g' = exp(-X) and the remaining integral runs over
exponential coordinates X with the numerically derived midpoint density. With

    M_j(g) = int dX rho(X) <g s|A|g s^-1> D^j(exp(-X))

Option II symbols are W(g; j n n') = M_j(g)[n', n] and Option I symbols are
D^j(g) M_j(g) D^j(g)^dagger.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag
from scipy.special import roots_legendre

from src.core.group_core import (
    TWO_PI,
    HalfInt,
    QuadratureGrid,
    Su2Element,
    compose,
    compose_arrays,
    exact_haar_grid,
    exp_vectors,
    inverse,
    m_index,
    m_labels,
    su2_to_euler,
    validate_m,
)
from src.core.wigner import LEFT, RIGHT, SIDES, wigner_matrices
from src.phase_space.midpoint_density import radial_density_spline
from src.utils.errors import GridError, LabelError
from src.utils.serialization import matrix_pairs

logger = logging.getLogger(__name__)

DEFAULT_XGRID = (8, 16, 32)
DEFAULT_ANTIPODE_EPS = 1e-3
NODE_CHUNK = 8


class SymbolOption(Enum):
    """Option I uses D(g' g''^-1), Option II uses D(g''^-1 g')."""
    I = "I"
    II = "II"


# ---------------------------------------------------------------------------
# Momentum labels and operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class MomentumIndex:
    j: HalfInt
    m: HalfInt
    n: HalfInt

    def __post_init__(self):
        validate_m(self.j, self.m)
        validate_m(self.j, self.n)

    def __str__(self) -> str:
        return f"|{self.j},{self.m},{self.n}>"


def _check_two_j_max(two_j_max: int) -> None:
    if two_j_max < 0:
        raise LabelError(f"two_j_max must be >= 0, got {two_j_max}")


def block_offset(two_j: int) -> int:
    """Flat position of the first |jmn> with this j."""
    return sum((t + 1) ** 2 for t in range(two_j))


def momentum_dimension(two_j_max: int) -> int:
    _check_two_j_max(two_j_max)
    return block_offset(two_j_max + 1)


def sr_dimension(two_j_max: int) -> int:
    """Dimension of the truncated Schwinger space, one copy of each j."""
    _check_two_j_max(two_j_max)
    return sum(t + 1 for t in range(two_j_max + 1))


def flat_index(index: MomentumIndex) -> int:
    size = index.j.dimension
    return (block_offset(index.j.twice_value)
            + m_index(index.j, index.m) * size + m_index(index.j, index.n))


def momentum_indices(two_j_max: int) -> List[MomentumIndex]:
    _check_two_j_max(two_j_max)
    labels = []
    for two_j in range(two_j_max + 1):
        j = HalfInt(two_j)
        labels.extend(MomentumIndex(j, m, n) for m in m_labels(j) for n in m_labels(j))
    return labels


@dataclass(frozen=True, eq=False)
class MomentumOperator:
    """
    Dense matrix over |jmn>, j <= j_max. ``hermitian`` is True/False when known
    from construction and None otherwise.
    """
    two_j_max: int
    matrix: np.ndarray
    hermitian: Optional[bool] = None

    def __post_init__(self):
        dimension = momentum_dimension(self.two_j_max)
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (dimension, dimension):
            raise ValueError(
                f"Operator for 2j_max={self.two_j_max} must be {dimension}x{dimension}, "
                f"got {matrix.shape}"
            )
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def zero(cls, two_j_max: int) -> "MomentumOperator":
        dimension = momentum_dimension(two_j_max)
        return cls(two_j_max, np.zeros((dimension, dimension), dtype=complex), True)

    @classmethod
    def identity(cls, two_j_max: int) -> "MomentumOperator":
        return cls(two_j_max, np.eye(momentum_dimension(two_j_max), dtype=complex), True)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def block(self, two_j: int, two_j_prime: Optional[int] = None) -> np.ndarray:
        """Rows with label j, columns with label j' (default j)."""
        two_j_prime = two_j if two_j_prime is None else two_j_prime
        for value in (two_j, two_j_prime):
            if not 0 <= value <= self.two_j_max:
                raise LabelError(f"2j={value} outside 0..{self.two_j_max}")
        rows = slice(block_offset(two_j), block_offset(two_j + 1))
        cols = slice(block_offset(two_j_prime), block_offset(two_j_prime + 1))
        return self.matrix[rows, cols]

    def element(self, row: MomentumIndex, col: MomentumIndex) -> complex:
        """<row|A|col>."""
        return complex(self.matrix[flat_index(row), flat_index(col)])

    def adjoint(self) -> "MomentumOperator":
        return MomentumOperator(self.two_j_max, self.matrix.conj().T, self.hermitian)

    def __matmul__(self, other: "MomentumOperator") -> "MomentumOperator":
        if self.two_j_max != other.two_j_max:
            raise ValueError(
                f"Cannot multiply operators truncated at 2j_max={self.two_j_max} and {other.two_j_max}"
            )
        return MomentumOperator(self.two_j_max, self.matrix @ other.matrix)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def _wigner(two_j: int, g: Su2Element) -> np.ndarray:
    return wigner_matrices(two_j, np.array(g.xi), np.array(g.eta))


def regular_matrix(side: str, g: Su2Element, two_j_max: int) -> MomentumOperator:
    """
    Truncated regular representation.

    Left:  U(g)|jmn> = sum_m' D^j_mm'(g^-1) |jm'n>
    Right: U~(g)|jmn> = sum_n' D^j_n'n(g) |jmn'>
    """
    if side not in SIDES:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    _check_two_j_max(two_j_max)
    blocks = []
    for two_j in range(two_j_max + 1):
        eye = np.eye(two_j + 1)
        if side == LEFT:
            blocks.append(np.kron(_wigner(two_j, inverse(g)).T, eye))
        else:
            blocks.append(np.kron(eye, _wigner(two_j, g)))
    return MomentumOperator(two_j_max, block_diag(*blocks))


def sr_representation(g: Su2Element, two_j_max: int) -> np.ndarray:
    """D_0(g) = direct sum of D^j(g), j <= j_max."""
    _check_two_j_max(two_j_max)
    return block_diag(*[_wigner(two_j, g) for two_j in range(two_j_max + 1)])


def basis_vector(index: MomentumIndex, two_j_max: int) -> np.ndarray:
    if index.j.twice_value > two_j_max:
        raise LabelError(f"{index} lies above the truncation 2j_max={two_j_max}")
    vector = np.zeros(momentum_dimension(two_j_max), dtype=complex)
    vector[flat_index(index)] = 1.0
    return vector


def rank_one_operator(vector: np.ndarray, two_j_max: int) -> MomentumOperator:
    """|v><v| for a normalized copy of v."""
    vector = np.asarray(vector, dtype=complex)
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        raise ValueError("rank_one_operator needs a nonzero vector")
    vector = vector / norm
    return MomentumOperator(two_j_max, np.outer(vector, vector.conj()), True)


# ---------------------------------------------------------------------------
# Band-limited functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """
    f^j_{n'n} = N_j^{1/2} int dg f(g) D^j_{n'n}(g), stored per 2j = 0..2j_max.
    """
    two_j_max: int
    blocks: Tuple[np.ndarray, ...]

    def __post_init__(self):
        _check_two_j_max(self.two_j_max)
        if len(self.blocks) != self.two_j_max + 1:
            raise ValueError(f"Expected {self.two_j_max + 1} blocks, got {len(self.blocks)}")
        blocks = tuple(np.asarray(block, dtype=complex) for block in self.blocks)
        for two_j, block in enumerate(blocks):
            if block.shape != (two_j + 1, two_j + 1):
                raise ValueError(f"Block 2j={two_j} has shape {block.shape}")
        object.__setattr__(self, "blocks", blocks)

    def block(self, two_j: int) -> np.ndarray:
        return self.blocks[two_j]

    def synthesize(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """f(g) = sum_j N_j^{1/2} tr(f^j D^j(g^-1)) at (xi, eta) arrays."""
        xi, eta = np.asarray(xi, dtype=complex), np.asarray(eta, dtype=complex)
        values = np.zeros(xi.shape, dtype=complex)
        for two_j, block in enumerate(self.blocks):
            d_inverse = wigner_matrices(two_j, np.conj(xi), -eta)
            values += math.sqrt(two_j + 1) * np.einsum("ab,...ba->...", block, d_inverse)
        return values

    def value(self, g: Su2Element) -> complex:
        return complex(self.synthesize(np.array(g.xi), np.array(g.eta)))

    @classmethod
    def analyze(cls, values: np.ndarray, grid: QuadratureGrid, two_j_max: int) -> "FourierCoeffs":
        """Coefficients of node values by quadrature; exact when f is band-limited to j_max."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (len(grid),):
            raise GridError(f"Expected {len(grid)} node values, got shape {values.shape}")
        xi, eta = grid.xi_eta()
        weighted = grid.weights * values
        blocks = tuple(
            math.sqrt(two_j + 1) * np.tensordot(weighted, wigner_matrices(two_j, xi, eta), axes=(0, 0))
            for two_j in range(two_j_max + 1)
        )
        return cls(two_j_max, blocks)

    @classmethod
    def random(cls, rng: np.random.Generator, two_j_max: int) -> "FourierCoeffs":
        blocks = tuple(
            rng.normal(size=(two_j + 1, two_j + 1)) + 1j * rng.normal(size=(two_j + 1, two_j + 1))
            for two_j in range(two_j_max + 1)
        )
        return cls(two_j_max, blocks)

    @classmethod
    def point_mass(cls, g0: Su2Element, two_j_max: int) -> "FourierCoeffs":
        """Truncated delta at g0: f^j = N_j^{1/2} D^j(g0)."""
        return cls(two_j_max, tuple(
            math.sqrt(two_j + 1) * _wigner(two_j, g0) for two_j in range(two_j_max + 1)
        ))

    @classmethod
    def constant(cls, value: complex, two_j_max: int) -> "FourierCoeffs":
        blocks = [np.zeros((two_j + 1, two_j + 1), dtype=complex) for two_j in range(two_j_max + 1)]
        blocks[0][0, 0] = value
        return cls(two_j_max, tuple(blocks))

    def to_dict(self) -> Dict:
        return {
            "two_j_max": self.two_j_max,
            "blocks": {str(HalfInt(two_j)): matrix_pairs(block) for two_j, block in enumerate(self.blocks)},
        }


def commutant_operator(f: FourierCoeffs) -> MomentumOperator:
    """A = int dg f(g) U~(g), i.e. <j'm'n'|A|jmn> = delta delta N_j^{-1/2} f^j_{n'n}."""
    blocks = [
        np.kron(np.eye(two_j + 1), block / math.sqrt(two_j + 1))
        for two_j, block in enumerate(f.blocks)
    ]
    return MomentumOperator(f.two_j_max, block_diag(*blocks))


def commutant_operator_quadrature(f: FourierCoeffs, grid: QuadratureGrid) -> MomentumOperator:
    """The same integral summed over Haar nodes, for cross-checking the closed form."""
    xi, eta = grid.xi_eta()
    weighted = grid.weights * f.synthesize(xi, eta)
    blocks = []
    for two_j in range(f.two_j_max + 1):
        averaged = np.tensordot(weighted, wigner_matrices(two_j, xi, eta), axes=(0, 0))
        blocks.append(np.kron(np.eye(two_j + 1), averaged))
    return MomentumOperator(f.two_j_max, block_diag(*blocks))


def plancherel_pairing(f: FourierCoeffs, h: FourierCoeffs) -> complex:
    """int dg f(g) h(g^-1) = sum_j tr(f^j h^j)."""
    top = min(f.two_j_max, h.two_j_max)
    return complex(sum(np.trace(f.block(t) @ h.block(t)) for t in range(top + 1)))


def plancherel_quadrature(f: FourierCoeffs, h: FourierCoeffs, grid: QuadratureGrid) -> complex:
    xi, eta = grid.xi_eta()
    values = f.synthesize(xi, eta) * h.synthesize(np.conj(xi), -eta)
    return complex(np.dot(grid.weights, values))


def fourier_roundtrip_residual(f: FourierCoeffs, grid: Optional[QuadratureGrid] = None) -> float:
    """max |f - synthesize(analyze(f))| over the nodes of an exact grid."""
    grid = grid or exact_haar_grid(f.two_j_max)
    xi, eta = grid.xi_eta()
    values = f.synthesize(xi, eta)
    recovered = FourierCoeffs.analyze(values, grid, f.two_j_max).synthesize(xi, eta)
    return float(np.max(np.abs(recovered - values)))


def completeness_residual(f: FourierCoeffs, elements: Sequence[Su2Element],
                          grid: Optional[QuadratureGrid] = None) -> float:
    """
    Weak completeness: int dg' sum_{j<=J} N_j chi_j(g'^-1 g) f(g') = f(g) for f
    band-limited to J.
    """
    grid = grid or exact_haar_grid(f.two_j_max)
    xi_n, eta_n = grid.xi_eta()
    weighted = grid.weights * f.synthesize(xi_n, eta_n)
    worst = 0.0
    for g in elements:
        xi, eta = compose_arrays(np.conj(xi_n), -eta_n, g.xi, g.eta)
        kernel = np.zeros(len(grid), dtype=complex)
        for two_j in range(f.two_j_max + 1):
            kernel += (two_j + 1) * np.trace(wigner_matrices(two_j, xi, eta), axis1=-2, axis2=-1)
        projected = complex(np.dot(weighted, kernel))
        worst = max(worst, abs(projected - f.value(g)))
    return worst


def character_partial_sum(g: Su2Element, two_j_max: int) -> float:
    """sum_{j<=j_max} N_j chi_j(g), the truncated trace of a regular representation."""
    return float(sum((t + 1) * np.trace(_wigner(t, g)).real for t in range(two_j_max + 1)))


# ---------------------------------------------------------------------------
# Exponential-coordinate grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExponentialGrid:
    """
    Nodes X = theta * axis over the ball |X| < 2pi - eps, with weights that
    already include the midpoint density (they sum to ~1).
    """
    vectors: np.ndarray
    weights: np.ndarray
    counts: Tuple[int, int, int]
    theta_max: float

    def __len__(self) -> int:
        return int(self.weights.size)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@lru_cache(maxsize=8)
def exponential_grid(n_polar: int = DEFAULT_XGRID[0], n_azimuth: int = DEFAULT_XGRID[1],
                     n_radial: int = DEFAULT_XGRID[2],
                     antipode_eps: float = DEFAULT_ANTIPODE_EPS) -> ExponentialGrid:
    """
    Gauss-Legendre in cos(polar angle), uniform azimuth and Gauss-Legendre in
    theta on (0, 2pi - eps).

    Raises:
        GridError: For nonpositive counts, an odd azimuth count or eps outside (0, 1)
    """
    for name, count in (("n_polar", n_polar), ("n_azimuth", n_azimuth), ("n_radial", n_radial)):
        if count < 1:
            raise GridError(f"{name} must be positive, got {count}")
    # keeps the node set symmetric under X -> -X
    if n_azimuth % 2:
        raise GridError(f"n_azimuth must be even, got {n_azimuth}")
    if not 0.0 < antipode_eps < 1.0:
        raise GridError(f"antipode_eps must lie in (0, 1), got {antipode_eps}")

    theta_max = TWO_PI - antipode_eps
    cos_nodes, cos_weights = roots_legendre(n_polar)
    phis = TWO_PI * np.arange(n_azimuth) / n_azimuth
    t, t_weights = roots_legendre(n_radial)
    thetas = 0.5 * theta_max * (t + 1.0)
    radial = radial_density_spline(theta_max)(thetas) * 0.5 * theta_max * t_weights

    c, p, r = np.meshgrid(cos_nodes, phis, thetas, indexing="ij")
    sin_polar = np.sqrt(1.0 - c ** 2)
    axes = np.stack([sin_polar * np.cos(p), sin_polar * np.sin(p), c], axis=-1)
    vectors = (r[..., None] * axes).reshape(-1, 3)
    weights = (cos_weights[:, None, None] * (TWO_PI / n_azimuth) * radial[None, None, :]
               * np.ones((1, n_azimuth, 1))).reshape(-1)
    grid = ExponentialGrid(vectors, weights, (n_polar, n_azimuth, n_radial), theta_max)
    logger.debug(
        f"Exponential grid {grid.counts}: {len(grid)} nodes, total weight {grid.total_weight:.12f}"
    )
    return grid


@lru_cache(maxsize=8)
def _exponential_tables(xgrid: ExponentialGrid, two_j_max: int):
    """s = exp(X/2) as (xi, eta) and D^j(exp(-X)) per 2j, shared read-only."""
    xi_s, eta_s = exp_vectors(0.5 * xgrid.vectors)
    xi_m, eta_m = exp_vectors(-xgrid.vectors)
    d_minus = tuple(wigner_matrices(two_j, xi_m, eta_m) for two_j in range(two_j_max + 1))
    for array in (xi_s, eta_s) + d_minus:
        array.setflags(write=False)
    return xi_s, eta_s, d_minus


# ---------------------------------------------------------------------------
# Weyl symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeylSymbol:
    """
    W(g; j n n') at a set of group elements. ``blocks[two_j]`` has shape
    (nodes, N_j, N_j) with the first matrix index n and the second n'.
    ``grid`` is set when the nodes are a Haar grid (needed for pairings).
    """
    option: SymbolOption
    two_j_max: int
    blocks: Tuple[np.ndarray, ...]
    xi: np.ndarray
    eta: np.ndarray
    grid: Optional[QuadratureGrid] = None
    accuracy_warning: Optional[str] = None

    @property
    def node_count(self) -> int:
        return int(self.xi.size)

    def block(self, two_j: int) -> np.ndarray:
        return self.blocks[two_j]

    def at(self, node: int) -> List[np.ndarray]:
        return [block[node] for block in self.blocks]

    def max_difference(self, other: "WeylSymbol") -> float:
        if self.two_j_max != other.two_j_max or self.node_count != other.node_count:
            raise GridError("Symbols cover different labels or nodes")
        return float(max(np.max(np.abs(a - b)) for a, b in zip(self.blocks, other.blocks)))

    def g_dependence(self) -> float:
        """max |W(g) - W(g_0)| over nodes, zero for a g-independent symbol."""
        return float(max(np.max(np.abs(block - block[:1])) for block in self.blocks))

    def to_dict(self) -> Dict:
        nodes = []
        for k in range(self.node_count):
            e = su2_to_euler(Su2Element(complex(self.xi[k]), complex(self.eta[k])))
            nodes.append({
                "node": [e.alpha, e.beta, e.gamma],
                "blocks": {str(HalfInt(t)): matrix_pairs(block[k]) for t, block in enumerate(self.blocks)},
            })
        data = {"option": self.option.value, "two_j_max": self.two_j_max, "nodes": nodes}
        if self.accuracy_warning:
            data["accuracy_warning"] = self.accuracy_warning
        return data


def _momentum_functions(two_j_max: int, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """<g|jmn> in flat order, shape xi.shape + (dimension,)."""
    columns = []
    for two_j in range(two_j_max + 1):
        size = two_j + 1
        d = wigner_matrices(two_j, xi, eta)
        columns.append(math.sqrt(size) * d.reshape(xi.shape + (size * size,)))
    return np.concatenate(columns, axis=-1)


def _symbol_chunk(matrix: np.ndarray, op_two_j_max: int, two_j_max: int, option: SymbolOption,
                  xgrid: ExponentialGrid, xi_g: np.ndarray, eta_g: np.ndarray) -> List[np.ndarray]:
    xi_s, eta_s, d_minus = _exponential_tables(xgrid, two_j_max)
    xi_g, eta_g = xi_g[:, None], eta_g[:, None]
    xi_pp, eta_pp = compose_arrays(xi_g, eta_g, xi_s[None, :], eta_s[None, :])
    xi_p, eta_p = compose_arrays(xi_g, eta_g, np.conj(xi_s)[None, :], -eta_s[None, :])
    phi_pp = _momentum_functions(op_two_j_max, xi_pp, eta_pp)
    phi_p = _momentum_functions(op_two_j_max, xi_p, eta_p)
    kernel = np.sum((phi_pp @ matrix) * phi_p.conj(), axis=-1)
    weighted = kernel * xgrid.weights[None, :]

    blocks = []
    for two_j in range(two_j_max + 1):
        m_block = np.einsum("bk,kxy->bxy", weighted, d_minus[two_j])
        if option is SymbolOption.II:
            blocks.append(np.swapaxes(m_block, 1, 2))
        else:
            d_g = wigner_matrices(two_j, xi_g[:, 0], eta_g[:, 0])
            blocks.append(d_g @ m_block @ np.conj(np.swapaxes(d_g, 1, 2)))
    return blocks


def _evaluate_symbol(op: MomentumOperator, xi: np.ndarray, eta: np.ndarray, two_j_max: int,
                     option: SymbolOption, xgrid: ExponentialGrid, workers: int) -> Tuple[np.ndarray, ...]:
    starts = list(range(0, xi.size, NODE_CHUNK))

    def compute(start: int) -> List[np.ndarray]:
        stop = start + NODE_CHUNK
        return _symbol_chunk(op.matrix, op.two_j_max, two_j_max, option, xgrid,
                             xi[start:stop], eta[start:stop])

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(compute, starts))
    else:
        chunks = [compute(start) for start in starts]
    if not chunks:
        return tuple(np.zeros((0, t + 1, t + 1), dtype=complex) for t in range(two_j_max + 1))
    return tuple(
        np.concatenate([chunk[two_j] for chunk in chunks], axis=0)
        for two_j in range(two_j_max + 1)
    )


def symbol_grid(two_j_max: int) -> QuadratureGrid:
    """Haar grid on which symbol pairings of operators truncated at j_max are exact."""
    return exact_haar_grid(2 * two_j_max)


def weyl_symbol(op: MomentumOperator, grid: Optional[QuadratureGrid] = None,
                two_j_max: Optional[int] = None, option: SymbolOption = SymbolOption.II,
                xgrid: Optional[ExponentialGrid] = None, workers: int = 1) -> WeylSymbol:
    """
    Symbol of op at every node of a Haar grid.

    A grid below exactness grade 2 j_max still produces a symbol; the shortfall is
    logged and recorded in ``accuracy_warning``.
    """
    grid = grid or symbol_grid(op.two_j_max)
    two_j_max = op.two_j_max if two_j_max is None else two_j_max
    _check_two_j_max(two_j_max)
    xgrid = xgrid or exponential_grid()

    warning = None
    if grid.exact_two_j_max() < 2 * op.two_j_max:
        warning = (
            f"grid {grid.counts} is exact up to 2j={grid.exact_two_j_max()}, "
            f"pairings need 2j={2 * op.two_j_max}"
        )
        logger.warning(f"Weyl symbol accuracy: {warning}")

    xi, eta = grid.xi_eta()
    blocks = _evaluate_symbol(op, xi, eta, two_j_max, option, xgrid, workers)
    logger.debug(f"Option {option.value} symbol on {len(grid)} nodes, {len(xgrid)} X nodes each")
    return WeylSymbol(option, two_j_max, blocks, xi, eta, grid, warning)


def symbol_at(op: MomentumOperator, elements: Sequence[Su2Element],
              two_j_max: Optional[int] = None, option: SymbolOption = SymbolOption.II,
              xgrid: Optional[ExponentialGrid] = None, workers: int = 1) -> WeylSymbol:
    """Symbol at arbitrary elements (no pairing possible on the result)."""
    two_j_max = op.two_j_max if two_j_max is None else two_j_max
    _check_two_j_max(two_j_max)
    xi = np.array([g.xi for g in elements], dtype=complex)
    eta = np.array([g.eta for g in elements], dtype=complex)
    blocks = _evaluate_symbol(op, xi, eta, two_j_max, option, xgrid or exponential_grid(), workers)
    return WeylSymbol(option, two_j_max, blocks, xi, eta)


def commutant_symbol(f: FourierCoeffs, grid: QuadratureGrid,
                     option: SymbolOption = SymbolOption.II) -> WeylSymbol:
    """Closed-form symbol of commutant_operator(f): W(g; j n n') = N_j^{-1/2} f^j_{n'n}."""
    xi, eta = grid.xi_eta()
    blocks = []
    for two_j, block in enumerate(f.blocks):
        constant = np.broadcast_to(block.T / math.sqrt(two_j + 1), (len(grid),) + block.shape)
        if option is SymbolOption.II:
            blocks.append(np.array(constant))
        else:
            d_g = wigner_matrices(two_j, xi, eta)
            # M = W^T for Option II, Option I conjugates M by D(g)
            m_block = np.swapaxes(constant, 1, 2)
            blocks.append(d_g @ m_block @ np.conj(np.swapaxes(d_g, 1, 2)))
    return WeylSymbol(option, f.two_j_max, tuple(blocks), xi, eta, grid)


def _check_pairable(a: WeylSymbol, b: WeylSymbol) -> QuadratureGrid:
    if a.grid is None or b.grid is None:
        raise GridError("Trace pairings need symbols evaluated on a Haar grid")
    if not a.grid.same_as(b.grid):
        raise GridError(f"Symbols live on different grids {a.grid.counts} and {b.grid.counts}")
    if a.option is not b.option:
        raise GridError(f"Cannot pair Option {a.option.value} with Option {b.option.value}")
    if a.two_j_max != b.two_j_max:
        raise GridError(f"Symbols truncated at 2j_max={a.two_j_max} and {b.two_j_max}")
    return a.grid


def symbol_trace_terms(a: WeylSymbol, b: WeylSymbol, n_weighted: bool = True) -> List[complex]:
    """Per-j contributions int dg N_j sum_{nn'} W_a(g; j n n') W_b(g; j n' n)."""
    grid = _check_pairable(a, b)
    terms = []
    for two_j in range(a.two_j_max + 1):
        per_node = np.einsum("kxy,kyx->k", a.block(two_j), b.block(two_j))
        weight = (two_j + 1) if n_weighted else 1
        terms.append(complex(weight * np.dot(grid.weights, per_node)))
    return terms


def symbol_trace_pairing(a: WeylSymbol, b: WeylSymbol, n_weighted: bool = True) -> complex:
    """
    Tr(AB) from symbols. Option I pairs W_a(g; j m m') with W_b(g; j m' m), the
    same index order as Option II.

    Raises:
        GridError: For symbols on different grids, options or truncations
    """
    return complex(sum(symbol_trace_terms(a, b, n_weighted)))


# ---------------------------------------------------------------------------
# Block-diagonal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockSymbolOperator:
    """A~(g) = direct sum of A~_j(g) with A~_j(g)[n', n] = W(g; j n n')."""
    option: SymbolOption
    two_j_max: int
    blocks: Tuple[np.ndarray, ...]
    xi: np.ndarray
    eta: np.ndarray
    grid: Optional[QuadratureGrid] = None

    @property
    def node_count(self) -> int:
        return int(self.xi.size)

    def packed(self) -> np.ndarray:
        """Block-diagonal matrices on the truncated Schwinger space, shape (nodes, D, D)."""
        size = sr_dimension(self.two_j_max)
        result = np.zeros((self.node_count, size, size), dtype=complex)
        start = 0
        for two_j, block in enumerate(self.blocks):
            stop = start + two_j + 1
            result[:, start:stop, start:stop] = block
            start = stop
        return result

    @classmethod
    def from_packed(cls, packed: np.ndarray, like: "BlockSymbolOperator") -> "BlockSymbolOperator":
        blocks = []
        start = 0
        for two_j in range(like.two_j_max + 1):
            stop = start + two_j + 1
            blocks.append(np.array(packed[:, start:stop, start:stop]))
            start = stop
        return cls(like.option, like.two_j_max, tuple(blocks), like.xi, like.eta, like.grid)

    def to_symbol(self) -> WeylSymbol:
        return WeylSymbol(self.option, self.two_j_max,
                          tuple(np.swapaxes(block, 1, 2) for block in self.blocks),
                          self.xi, self.eta, self.grid)


def block_symbol(symbol: WeylSymbol) -> BlockSymbolOperator:
    return BlockSymbolOperator(symbol.option, symbol.two_j_max,
                               tuple(np.swapaxes(block, 1, 2) for block in symbol.blocks),
                               symbol.xi, symbol.eta, symbol.grid)


def block_trace_pairing(a: BlockSymbolOperator, b: BlockSymbolOperator) -> complex:
    """int dg sum_j N_j tr(A~_j(g) B~_j(g)); N_j multiplies each block trace."""
    if a.grid is None or b.grid is None or not a.grid.same_as(b.grid):
        raise GridError("Block pairings need both operators on the same Haar grid")
    if a.option is not b.option or a.two_j_max != b.two_j_max:
        raise GridError("Block operators differ in option or truncation")
    total = 0.0 + 0.0j
    for two_j in range(a.two_j_max + 1):
        per_node = np.einsum("kxy,kyx->k", a.blocks[two_j], b.blocks[two_j])
        total += (two_j + 1) * np.dot(a.grid.weights, per_node)
    return complex(total)


def sr_image(f: FourierCoeffs) -> np.ndarray:
    """int dg f(g) D_0(g) = direct sum of N_j^{-1/2} f^j."""
    return block_diag(*[block / math.sqrt(two_j + 1) for two_j, block in enumerate(f.blocks)])


# ---------------------------------------------------------------------------
# Covariance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceReport:
    option: SymbolOption
    right_residual: float
    left_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.right_residual, self.left_residual)

    def to_dict(self) -> Dict:
        return {
            "option": self.option.value,
            "right_residual": self.right_residual,
            "left_residual": self.left_residual,
            "max_residual": self.max_residual,
        }


def _transform_blocks(symbol: WeylSymbol, transform: Callable[[int, np.ndarray], np.ndarray]) -> List[np.ndarray]:
    return [transform(two_j, block) for two_j, block in enumerate(symbol.blocks)]


def covariance_check(op: MomentumOperator, g1: Su2Element, g2: Su2Element,
                     option: SymbolOption, elements: Sequence[Su2Element],
                     two_j_max: Optional[int] = None,
                     xgrid: Optional[ExponentialGrid] = None) -> CovarianceReport:
    """
    Compare the symbols of U~(g1) A U~(g1)^dagger and U(g2)^dagger A U(g2)
    against the transformation laws applied to the symbol of A, recomputed at
    the transported elements g g1 and g2 g.
    """
    two_j_max = op.two_j_max if two_j_max is None else two_j_max
    xgrid = xgrid or exponential_grid()
    right = regular_matrix(RIGHT, g1, op.two_j_max)
    left = regular_matrix(LEFT, g2, op.two_j_max)
    right_op = right @ op @ right.adjoint()
    left_op = left.adjoint() @ op @ left

    def evaluate(operator: MomentumOperator, points: Sequence[Su2Element]) -> WeylSymbol:
        return symbol_at(operator, points, two_j_max, option, xgrid)

    moved_right = evaluate(op, [compose(g, g1) for g in elements])
    moved_left = evaluate(op, [compose(g2, g) for g in elements])

    if option is SymbolOption.II:
        def right_law(two_j: int, block: np.ndarray) -> np.ndarray:
            return _wigner(two_j, inverse(g1)).T @ block @ _wigner(two_j, g1).T

        def left_law(two_j: int, block: np.ndarray) -> np.ndarray:
            return block
    else:
        def right_law(two_j: int, block: np.ndarray) -> np.ndarray:
            return block

        def left_law(two_j: int, block: np.ndarray) -> np.ndarray:
            return _wigner(two_j, inverse(g2)) @ block @ _wigner(two_j, g2)

    expected_right = _transform_blocks(moved_right, right_law)
    expected_left = _transform_blocks(moved_left, left_law)
    actual_right = evaluate(right_op, elements)
    actual_left = evaluate(left_op, elements)

    right_residual = max(float(np.max(np.abs(a - e))) for a, e in zip(actual_right.blocks, expected_right))
    left_residual = max(float(np.max(np.abs(a - e))) for a, e in zip(actual_left.blocks, expected_left))
    report = CovarianceReport(option, right_residual, left_residual)
    logger.debug(f"Covariance Option {option.value}: right {right_residual:.3e}, left {left_residual:.3e}")
    return report


# ---------------------------------------------------------------------------
# Schur averaging on the Schwinger space
# ---------------------------------------------------------------------------

def _sr_slices(two_j_max: int) -> List[slice]:
    slices, start = [], 0
    for two_j in range(two_j_max + 1):
        slices.append(slice(start, start + two_j + 1))
        start += two_j + 1
    return slices


def schur_average(matrix: np.ndarray, two_j_max: int,
                  grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """int dg D_0(g) M D_0(g)^-1 by quadrature on the truncated Schwinger space."""
    size = sr_dimension(two_j_max)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (size, size):
        raise ValueError(f"Expected a {size}x{size} matrix for 2j_max={two_j_max}, got {matrix.shape}")
    grid = grid or exact_haar_grid(two_j_max)
    xi, eta = grid.xi_eta()
    d = [wigner_matrices(two_j, xi, eta) for two_j in range(two_j_max + 1)]
    slices = _sr_slices(two_j_max)
    result = np.zeros_like(matrix)
    for a, rows in enumerate(slices):
        for b, cols in enumerate(slices):
            conjugated = d[a] @ matrix[rows, cols] @ np.conj(np.swapaxes(d[b], 1, 2))
            result[rows, cols] = np.tensordot(grid.weights, conjugated, axes=(0, 0))
    return result


def block_scalar_target(matrix: np.ndarray, two_j_max: int) -> np.ndarray:
    """Direct sum of c_j 1_j with c_j = tr(M_j)/N_j."""
    return block_diag(*[
        np.trace(matrix[s, s]) / (s.stop - s.start) * np.eye(s.stop - s.start)
        for s in _sr_slices(two_j_max)
    ])


def block_scalar_residual(average: np.ndarray, matrix: np.ndarray, two_j_max: int) -> float:
    return float(np.max(np.abs(average - block_scalar_target(matrix, two_j_max))))
