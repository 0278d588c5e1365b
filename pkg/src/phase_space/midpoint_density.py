"""
Density of the midpoint chart (g, X) -> (g', g'') = (g e^{-X/2}, g e^{X/2}).

With dg' dg'' = dg rho(X) d^3X, integrals carrying the midpoint delta
delta(g^-1 s(g', g'')) reduce to an integral over X with weight rho. The density
is obtained here without any closed form: the chart's 6x6 Jacobian is taken by
central differences in local exponential coordinates at both ends, and the
local Haar constant is calibrated against the Euler-angle measure
sin(beta) dalpha dbeta dgamma / 16pi^2. rho depends on theta = |X| only, so the
radial profile theta^2 rho(theta) is tabulated and splined.
"""

import logging
import math
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from src.core.group_core import (
    EulerAngles,
    Su2Element,
    compose,
    exp_vec,
    inverse,
    log_vec,
    su2_from_euler,
    su2_to_euler,
)

logger = logging.getLogger(__name__)

TABLE_POINTS = 129
JACOBIAN_STEP = 1e-6
# base points away from the Euler chart singularities and angle wrap-arounds
CALIBRATION_EULER = (1.0, 1.1, 2.3)
CHART_BASE_EULER = (0.4, 1.3, 2.0)
CHART_AXIS = np.array([0.3, -0.5, 0.81]) / np.linalg.norm([0.3, -0.5, 0.81])


def _euler_vector(g: Su2Element) -> np.ndarray:
    e = su2_to_euler(g)
    return np.array([e.alpha, e.beta, e.gamma])


def local_haar_constant(step: float = JACOBIAN_STEP) -> float:
    """
    Haar density per d^3y in local exponential coordinates g0 exp(y) at y = 0,
    from the Euler measure: sin(beta0)/16pi^2 * |det d(Euler)/dy|.
    """
    g0 = su2_from_euler(EulerAngles(*CALIBRATION_EULER))
    jacobian = np.empty((3, 3))
    for k in range(3):
        shift = np.zeros(3)
        shift[k] = step
        plus = _euler_vector(compose(g0, exp_vec(shift)))
        minus = _euler_vector(compose(g0, exp_vec(-shift)))
        jacobian[:, k] = (plus - minus) / (2.0 * step)
    beta0 = CALIBRATION_EULER[1]
    return math.sin(beta0) / (16.0 * math.pi ** 2) * abs(float(np.linalg.det(jacobian)))


def chart_jacobian(theta: float, step: float = JACOBIAN_STEP) -> float:
    """
    |det| of (a, b) -> (log(g'_0^-1 g'), log(g''_0^-1 g'')) where g = g0 exp(a)
    and X = X0 + b, X0 = theta * axis.
    """
    g0 = su2_from_euler(EulerAngles(*CHART_BASE_EULER))
    x0 = theta * CHART_AXIS

    def ends(a: np.ndarray, b: np.ndarray) -> Tuple[Su2Element, Su2Element]:
        g = compose(g0, exp_vec(a))
        x = x0 + b
        return compose(g, exp_vec(-0.5 * x)), compose(g, exp_vec(0.5 * x))

    base_prime, base_double = ends(np.zeros(3), np.zeros(3))
    inv_prime, inv_double = inverse(base_prime), inverse(base_double)

    def chart(vector: np.ndarray) -> np.ndarray:
        g_prime, g_double = ends(vector[:3], vector[3:])
        return np.concatenate([
            log_vec(compose(inv_prime, g_prime)),
            log_vec(compose(inv_double, g_double)),
        ])

    jacobian = np.empty((6, 6))
    for k in range(6):
        shift = np.zeros(6)
        shift[k] = step
        jacobian[:, k] = (chart(shift) - chart(-shift)) / (2.0 * step)
    return abs(float(np.linalg.det(jacobian)))


def density_at(theta: float, haar_constant: float = None) -> float:
    """rho(theta) = c0 |det J(theta)|."""
    constant = local_haar_constant() if haar_constant is None else haar_constant
    return constant * chart_jacobian(theta)


def tabulate_density(theta_max: float, points: int = TABLE_POINTS) -> Dict[str, List[float]]:
    """theta, rho(theta) and theta^2 rho(theta) on a uniform grid over [0, theta_max]."""
    constant = local_haar_constant()
    thetas = np.linspace(0.0, theta_max, points)
    rho = np.array([constant * chart_jacobian(float(theta)) for theta in thetas])
    logger.info(
        f"Tabulated midpoint density on {points} points up to theta={theta_max:.6f} "
        f"(rho(0)={rho[0]:.12e})"
    )
    return {
        "theta": thetas.tolist(),
        "rho": rho.tolist(),
        "radial": (thetas ** 2 * rho).tolist(),
        "haar_constant": [constant],
    }


@lru_cache(maxsize=8)
def radial_density_spline(theta_max: float, points: int = TABLE_POINTS) -> CubicSpline:
    """Cubic spline of theta^2 rho(theta); computed once per (theta_max, points)."""
    table = tabulate_density(theta_max, points)
    return CubicSpline(np.array(table["theta"]), np.array(table["radial"]))


def radial_normalization(theta_max: float, points: int = TABLE_POINTS) -> float:
    """4 pi int_0^theta_max theta^2 rho dtheta, which tends to 1 as theta_max -> 2 pi."""
    spline = radial_density_spline(theta_max, points)
    return float(4.0 * math.pi * spline.integrate(0.0, theta_max))
