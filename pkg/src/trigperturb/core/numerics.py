"""
Numerical kernels shared by the rest of the package.

Dense complex solves and singular values go through LAPACK (scipy.linalg),
sine products are accumulated in the log domain so that products of a few
thousand factors neither underflow nor overflow, and adaptive integration is
QUADPACK's bisection with a Gauss-Kronrod panel rule.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from trigperturb.core.errors import NoConvergenceError, SingularSystemError

MAX_SOLVE_SIZE = 4097
MAX_SVD_SIZE = 1025

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_magnitude)``."""

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if (self.sign == 0) != (self.log_magnitude == -np.inf):
            raise ValueError("sign is 0 exactly when log_magnitude is -inf")

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * float(np.exp(self.log_magnitude))


def as_complex_matrix(A) -> np.ndarray:
    """Validate a matrix argument and return it as a complex128 array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def solve_dense(A, b, transpose: bool = False) -> np.ndarray:
    """
    Solve ``A x = b`` (or ``A^T x = b`` with ``transpose``) by LU with partial
    pivoting.

    Raises SingularSystemError when a pivot vanishes to working precision.
    """
    M = as_complex_matrix(A)
    n = M.shape[0]
    if M.shape[1] != n:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if n > MAX_SOLVE_SIZE:
        raise ValueError(f"system of size {n} exceeds capacity {MAX_SOLVE_SIZE}")
    rhs = np.asarray(b, dtype=np.complex128)
    if rhs.shape[0] != n:
        raise ValueError(f"right-hand side has length {rhs.shape[0]}, expected {n}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= n * _EPS * pivots.max():
        raise SingularSystemError(
            f"singular system: smallest pivot {pivots.min():.3e} "
            f"against largest {pivots.max():.3e}"
        )
    return linalg.lu_solve((lu, piv), rhs, trans=1 if transpose else 0, check_finite=False)


def min_singular_value(A) -> float:
    """Smallest singular value of a square matrix, from a full SVD."""
    M = as_complex_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if M.shape[0] > MAX_SVD_SIZE:
        raise ValueError(f"matrix of size {M.shape[0]} exceeds SVD capacity {MAX_SVD_SIZE}")
    return float(linalg.svdvals(M, check_finite=False)[-1])


def signed_log_products(terms) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-wise signed log products of a 2-d array of real factors.

    Returns ``(log_magnitude, sign)``; rows containing an exact zero get
    ``(-inf, 0)``.
    """
    T = np.asarray(terms, dtype=np.float64)
    if T.ndim == 1:
        T = T[np.newaxis, :]
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(T))
    log_magnitude = logs.sum(axis=1)
    sign = np.prod(np.sign(T), axis=1).astype(np.int64)
    log_magnitude[sign == 0] = -np.inf
    return log_magnitude, sign


def signed_log_product(terms: Iterable[float]) -> SignedLogValue:
    """Product of real factors without underflow, as a SignedLogValue."""
    T = np.asarray(list(terms), dtype=np.float64)
    if not np.all(np.isfinite(T)):
        raise ValueError("factors must be finite")
    if T.size == 0:
        return SignedLogValue(0.0, 1)
    log_magnitude, sign = signed_log_products(T)
    return SignedLogValue(float(log_magnitude[0]), int(sign[0]))


def adaptive_integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    points: Optional[Sequence[float]] = None,
    limit: int = 500,
) -> float:
    """
    Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``points`` are abscissae of known (integrable) singularities; the interval
    is split there before bisection starts. Raises NoConvergenceError with the
    best estimate attached when the subdivision budget is exhausted.
    """
    if tol < 1e-12:
        raise ValueError(f"tolerance {tol} below the supported floor 1e-12")
    breaks = None
    if points:
        lo, hi = min(a, b), max(a, b)
        breaks = sorted({float(p) for p in points if lo < p < hi}) or None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        result = integrate.quad(
            f, a, b, epsabs=tol, epsrel=0.0, limit=limit, points=breaks, full_output=1
        )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3:
        # QUADPACK flags roundoff once the requested accuracy sits at the
        # precision floor; the estimate is still usable there.
        if abserr <= max(tol, 8 * _EPS * abs(value)):
            logging.debug(f"quad flagged '{result[3][:60]}' but abserr {abserr:.2e} is within tolerance")
            return value
        raise NoConvergenceError("no convergence", estimate=value, abserr=abserr)
    return value
