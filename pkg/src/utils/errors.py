"""
Exception types raised by the Schwinger toolkit.

All of them derive from ValueError, so callers that already guard numerical
entry points with ``except ValueError`` keep working.
"""


class EulerRangeError(ValueError):
    """Euler or axis-angle coordinates outside the ranges of their chart."""


class AntipodeError(ValueError):
    """Logarithm or midpoint requested at (or numerically next to) -identity."""


class LabelError(ValueError):
    """Invalid representation label (j, m, n, p, q or group rank)."""


class GridError(ValueError):
    """Bad quadrature parameters, or objects built on incompatible grids."""
