"""
SU(n) fundamental representations and SU(3) multiplet combinatorics.

Everything here is exact integer arithmetic. Hypercharges are stored as
three_Y = 3Y and isospins as two_I = 2I so that sets of multiplets compare
exactly.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.utils.errors import LabelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class FundamentalLabel:
    """Rank-p antisymmetric tensor UIR of SU(n); p = 0 (or p = n) is the trivial one."""
    n: int
    p: int

    def __post_init__(self):
        if self.n < 2:
            raise LabelError(f"SU(n) needs n >= 2, got n={self.n}")
        if not 0 <= self.p <= self.n - 1:
            raise LabelError(f"Fundamental label p={self.p} outside 0..{self.n - 1} for SU({self.n})")

    @property
    def dimension(self) -> int:
        return fundamental_dimension(self.n, self.p)

    @property
    def name(self) -> str:
        """Dimension, starred for the conjugate of a lower-rank fundamental ("4*")."""
        starred = self.p > self.n - self.p
        return f"{self.dimension}{'*' if starred else ''}"

    def to_dict(self) -> Dict:
        return {"n": self.n, "p": self.p, "name": self.name}


def fundamental_dimension(n: int, p: int) -> int:
    """dim p^(n) = C(n, p)."""
    return math.comb(n, p)


def _normalized(n: int, p: int) -> FundamentalLabel:
    # rank n antisymmetric over n dimensions is the determinant, i.e. trivial
    return FundamentalLabel(n, 0 if p == n else p)


def fundamental_conjugate(n: int, p: int) -> FundamentalLabel:
    """
    p^(n)* = (n - p)^(n).

    Raises:
        LabelError: Unless n >= 2 and 1 <= p <= n - 1
    """
    if n < 2 or not 1 <= p <= n - 1:
        raise LabelError(f"fundamental_conjugate needs 1 <= p <= n-1, got n={n}, p={p}")
    return FundamentalLabel(n, n - p)


def branch_fundamental(n: int, p: int) -> List[FundamentalLabel]:
    """
    SU(n) -> SU(n-1) content of p^(n): p^(n-1) + (p-1)^(n-1), as a sorted multiset.

    Raises:
        LabelError: Unless n >= 3 and 1 <= p <= n - 1
    """
    if n < 3 or not 1 <= p <= n - 1:
        raise LabelError(f"branch_fundamental needs n >= 3 and 1 <= p <= n-1, got n={n}, p={p}")
    return sorted([_normalized(n - 1, p), _normalized(n - 1, p - 1)])


def common_once_irrep(n: int) -> Optional[FundamentalLabel]:
    """
    An SU(n-1) label occurring exactly once in the branching of every
    fundamental p = 1..n-1 of SU(n), or None. The trivial label is preferred.
    """
    if n < 3:
        raise LabelError(f"common_once_irrep needs n >= 3, got n={n}")
    common = None
    for p in range(1, n):
        counts = Counter(branch_fundamental(n, p))
        once = {label for label, count in counts.items() if count == 1}
        common = once if common is None else common & once
    if not common:
        logger.debug(f"No SU({n - 1}) label occurs once in every SU({n}) fundamental")
        return None
    trivial = FundamentalLabel(n - 1, 0)
    return trivial if trivial in common else min(common)


# ---------------------------------------------------------------------------
# SU(3)
# ---------------------------------------------------------------------------

def su3_dimension(p: int, q: int) -> int:
    """N_{p,q} = (p+1)(q+1)(p+q+2)/2."""
    _check_pq(p, q)
    return (p + 1) * (q + 1) * (p + q + 2) // 2


def _check_pq(p: int, q: int) -> None:
    if p < 0 or q < 0:
        raise LabelError(f"SU(3) labels must be nonnegative, got ({p}, {q})")


@dataclass(frozen=True, order=True)
class MultipletEntry:
    """I-Y multiplet: I = (r+s)/2, Y = r - s + 2(q-p)/3."""
    r: int
    s: int
    two_I: int
    three_Y: int

    @property
    def I(self) -> Fraction:
        return Fraction(self.two_I, 2)

    @property
    def Y(self) -> Fraction:
        return Fraction(self.three_Y, 3)

    def to_dict(self) -> Dict:
        return {"r": self.r, "s": self.s, "two_I": self.two_I, "three_Y": self.three_Y}


@dataclass(frozen=True)
class HighestWeight:
    entry: MultipletEntry
    two_I3: int

    def to_dict(self) -> Dict:
        data = self.entry.to_dict()
        data["two_I3"] = self.two_I3
        return data


@dataclass(frozen=True)
class Su3Irrep:
    """SU(3) UIR labelled by (p, q)."""
    p: int
    q: int

    def __post_init__(self):
        _check_pq(self.p, self.q)

    @property
    def dimension(self) -> int:
        return su3_dimension(self.p, self.q)

    @property
    def multiplets(self) -> List[MultipletEntry]:
        return su3_multiplets(self.p, self.q)

    @property
    def highest_weight(self) -> HighestWeight:
        return su3_highest_weight(self.p, self.q)


def su3_multiplets(p: int, q: int) -> List[MultipletEntry]:
    """All (r, s) with 0 <= r <= p, 0 <= s <= q."""
    _check_pq(p, q)
    return [
        MultipletEntry(r, s, r + s, 3 * (r - s) + 2 * (q - p))
        for r in range(p + 1)
        for s in range(q + 1)
    ]


def su3_highest_weight(p: int, q: int) -> HighestWeight:
    """I = I3 = p/2, Y = (p + 2q)/3, the (r, s) = (p, 0) multiplet."""
    _check_pq(p, q)
    return HighestWeight(MultipletEntry(p, 0, p, p + 2 * q), p)


def su3_weights(p: int, q: int) -> List[Tuple[int, int, int]]:
    """Every state as (two_I, two_I3, three_Y)."""
    return [
        (entry.two_I, two_i3, entry.three_Y)
        for entry in su3_multiplets(p, q)
        for two_i3 in range(entry.two_I, -entry.two_I - 1, -2)
    ]


def su3_highest_weight_is_maximal(p: int, q: int) -> bool:
    """
    The highest weight is the unique top state when raising either increases Y
    by one or keeps Y and increases I3, i.e. it is the (Y, I3) lexicographic maximum.
    """
    top = max(su3_weights(p, q), key=lambda w: (w[2], w[1]))
    highest = su3_highest_weight(p, q)
    tops = [w for w in su3_weights(p, q) if (w[2], w[1]) == (top[2], top[1])]
    return len(tops) == 1 and top == (highest.entry.two_I, highest.two_I3, highest.entry.three_Y)


def su3_singlet_count(p: int, q: int) -> int:
    return sum(1 for entry in su3_multiplets(p, q) if entry.two_I == 0)


def su3_conjugate_mirror_holds(p: int, q: int) -> bool:
    """(q, p) multiplets are the Y -> -Y mirror of the (p, q) ones."""
    forward = Counter((entry.two_I, -entry.three_Y) for entry in su3_multiplets(p, q))
    backward = Counter((entry.two_I, entry.three_Y) for entry in su3_multiplets(q, p))
    return forward == backward and su3_dimension(p, q) == su3_dimension(q, p)
