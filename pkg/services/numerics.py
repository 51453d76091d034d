"""
Numerical helpers shared by the services: refined composite Simpson quadrature, central
differences with Richardson extrapolation, angle wrapping and log-log slope fits.
"""
import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from sklearn.linear_model import LinearRegression

from errors import DomainError, NumericError

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-10
MIN_INTERVALS = 64
MAX_INTERVALS = 2**20


def simpson_integral(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
) -> float:
    """
    Composite Simpson quadrature of a vectorized integrand over [a, b].

    The grid is doubled until two successive estimates agree to `tol` (relative to
    max(1, |estimate|)). Coincident bounds return exactly 0.
    """
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        raise NumericError(f"quadrature bounds must be finite, got [{a}, {b}]")

    intervals = MIN_INTERVALS
    previous = None
    while intervals <= MAX_INTERVALS:
        x = np.linspace(a, b, intervals + 1)
        y = np.broadcast_to(np.asarray(func(x), dtype=float), x.shape)
        if not np.all(np.isfinite(y)):
            raise NumericError(f"non-finite integrand on [{a}, {b}]")
        estimate = float(simpson(y, x=x))
        if previous is not None and abs(estimate - previous) <= tol * max(1.0, abs(estimate)):
            logger.debug("simpson converged on [%g, %g] with %d intervals", a, b, intervals)
            return estimate
        previous = estimate
        intervals *= 2
    raise NumericError(f"Simpson quadrature on [{a}, {b}] did not reach tolerance {tol}")


def central_difference(func: Callable[[float], float], x: float, h: float) -> float:
    if not h > 0:
        raise DomainError(f"finite-difference step must be positive, got {h}")
    value = (func(x + h) - func(x - h)) / (2.0 * h)
    if not math.isfinite(value):
        raise NumericError(f"non-finite central difference at x={x}, h={h}")
    return value


def richardson_difference(func: Callable[[float], float], x: float, h: float) -> float:
    """Central difference extrapolated from steps h and h/2 (error O(h⁴))."""
    coarse = central_difference(func, x, h)
    fine = central_difference(func, x, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def wrap_angle(angle: float) -> float:
    """Map an angle into [−π, π)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log|y| against log|x|."""
    x = np.log(np.abs(np.asarray(xs, dtype=float))).reshape(-1, 1)
    y = np.log(np.abs(np.asarray(ys, dtype=float)))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NumericError("log-log fit needs nonzero finite data")
    return float(LinearRegression().fit(x, y).coef_[0])


def is_monotone_nonincreasing(values: Sequence[float], atol: float = 1e-9) -> bool:
    return all(b <= a + atol for a, b in zip(values, values[1:]))
