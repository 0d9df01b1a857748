"""
Periodic test functions with known smoothness and exact integrals.

Two families are addressable by label:

    smooth:<sigma>   f(x) = |sin(x/2)|^sigma, exactly sigma derivatives (0 < sigma <= 8)
    analytic:<b>     f(x) = 1/(b - cos x), analytic in |Im x| < log(b + sqrt(b^2 - 1))
"""
import functools
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import fft

from trigperturb.core.interp import TrigPoly, eval_poly
from trigperturb.core.numerics import adaptive_integrate


@dataclass(frozen=True)
class Smoothness:
    """Either ``kind='holder'`` with ``value=sigma`` or ``kind='analytic'`` with ``value=a``."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("holder", "analytic"):
            raise ValueError(f"Unknown smoothness kind: {self.kind}")
        if not self.value > 0:
            raise ValueError(f"smoothness parameter must be positive, got {self.value}")


@dataclass(frozen=True, eq=False)
class TestFunction:
    label: str
    func: Callable
    exact_integral: float
    smoothness: Smoothness

    __test__ = False  # not a pytest class

    def __call__(self, x):
        return self.func(x)


@functools.lru_cache(maxsize=None)
def _smooth_integral(sigma: float) -> float:
    return adaptive_integrate(
        lambda x: abs(np.sin(x / 2)) ** sigma, -np.pi, np.pi, tol=1e-12, points=[0.0]
    )


def make_smooth(sigma: float) -> TestFunction:
    """|sin(x/2)|^sigma: one singularity at x = 0 with Hoelder index sigma."""
    sigma = float(sigma)
    if not 0 < sigma <= 8:
        raise ValueError(f"sigma must lie in (0, 8], got {sigma}")

    def f(x):
        return np.abs(np.sin(np.asarray(x, dtype=np.float64) / 2)) ** sigma

    return TestFunction(f"smooth:{sigma:g}", f, _smooth_integral(sigma), Smoothness("holder", sigma))


def make_analytic(b: float) -> TestFunction:
    """1/(b - cos x), with poles at Im x = +-log(b + sqrt(b^2 - 1))."""
    b = float(b)
    if not b > 1:
        raise ValueError(f"b must exceed 1 (pole on the real line otherwise), got {b}")
    root = np.sqrt(b * b - 1)

    def f(x):
        return 1.0 / (b - np.cos(np.asarray(x, dtype=np.float64)))

    return TestFunction(
        f"analytic:{b:g}", f, 2 * np.pi / root, Smoothness("analytic", float(np.log(b + root)))
    )


def trig_poly_function(p: TrigPoly, label: Optional[str] = None) -> TestFunction:
    """A trigonometric polynomial viewed as a test function (analytic everywhere)."""
    return TestFunction(
        label or f"trig:{p.N}",
        lambda x: eval_poly(p, x),
        float((2 * np.pi * p.coeff(0)).real),
        Smoothness("analytic", np.inf),
    )


def shifted(f: TestFunction, delta: float) -> TestFunction:
    """x -> f(x - delta); periodicity keeps the integral."""
    return TestFunction(
        f"{f.label}@{delta:.6g}",
        lambda x: f.func(np.asarray(x, dtype=np.float64) - delta),
        f.exact_integral,
        f.smoothness,
    )


def resolve_function(label: str) -> TestFunction:
    """Build a test function from a registry label such as ``smooth:3`` or ``analytic:1.25``."""
    family, sep, arg = label.partition(":")
    if not sep:
        raise ValueError(f"Unknown function label: {label} (expected smooth:<sigma> or analytic:<b>)")
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"Bad parameter in function label: {label}")
    if family == "smooth":
        return make_smooth(value)
    if family == "analytic":
        return make_analytic(value)
    raise ValueError(f"Unknown function family: {family}")


def _tail_sup(f: TestFunction, N: int, fine_K: int) -> float:
    xs = -np.pi + 2 * np.pi * np.arange(fine_K) / fine_K
    F = fft.fft(np.asarray(f(xs), dtype=np.complex128))
    F[: N + 1] = 0
    if N > 0:
        F[-N:] = 0
    return float(np.max(np.abs(fft.ifft(F))))


def best_approx_proxy(
    f: TestFunction, N: int, fine_K: Optional[int] = None, certify: bool = False
) -> float:
    """
    Sup-norm of f minus its degree-N Fourier truncation, measured on a fine grid.

    Over-estimates the best approximation error by at most the truncation's
    Lebesgue constant and decays at the same rate. ``fine_K`` defaults to
    64 (2N+1).
    """
    floor = 64 * (2 * N + 1)
    fine_K = floor if fine_K is None else int(fine_K)
    if fine_K < floor:
        raise ValueError(f"fine grid of {fine_K} points is below 64*(2N+1) = {floor}")
    proxy = _tail_sup(f, N, fine_K)
    if certify:
        doubled = _tail_sup(f, N, 2 * fine_K)
        if abs(doubled - proxy) > 0.01 * max(doubled, 1e-300):
            logging.warning(
                f"best-approximation proxy for {f.label} at N={N} moved from "
                f"{proxy:.3e} to {doubled:.3e} when the fine grid was doubled"
            )
            return doubled
    return proxy
