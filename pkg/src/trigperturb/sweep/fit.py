"""
Least-squares rate fits for sweep results.

``rate_fit`` fits log(value) against log(N) (algebraic rates, slope is the
exponent); ``geometric_fit`` fits log(value) against N (geometric rates,
slope is minus the decay constant).
"""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

MIN_POINTS = 3
ROUNDING_FLOOR = 1e-13


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    degenerate: bool = False

    def describe(self) -> str:
        flag = " (degenerate)" if self.degenerate else ""
        return f"slope={self.slope:.6g} intercept={self.intercept:.6g} r2={self.r_squared:.6g} n={self.points_used}{flag}"


def _least_squares(x: np.ndarray, y: np.ndarray) -> RateFit:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-28 * max(1.0, float(np.sum(y ** 2))):
        return RateFit(0.0, float(y.mean()), 0.0, int(x.size), degenerate=True)
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return RateFit(float(slope), float(intercept), float(min(1.0, max(0.0, r2))), int(x.size))


def _validated(points: Iterable[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < MIN_POINTS:
        raise ValueError(f"rate fit needs at least {MIN_POINTS} points, got {len(pts)}")
    n = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("rate fit needs finite positive values")
    if np.any(n <= 0):
        raise ValueError("rate fit needs positive abscissae")
    return n, v


def rate_fit(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Ordinary least squares of log(value) on log(N)."""
    n, v = _validated(points)
    return _least_squares(np.log(n), np.log(v))


def geometric_fit(points: Sequence[Tuple[float, float]], floor: float = ROUNDING_FLOOR) -> RateFit:
    """Ordinary least squares of log(value) on N, after dropping values at the rounding floor."""
    kept = [(n, v) for n, v in points if v > floor]
    n, v = _validated(kept)
    return _least_squares(n, np.log(v))
