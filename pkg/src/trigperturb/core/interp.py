"""
Trigonometric interpolation on (perturbed) grids.

The interpolant is stored by its Fourier coefficients c_{-N..N}, recovered by a
dense solve against A[k, j] = exp(i j x~_k). Cardinal functions are products
of 2N half-angle sines, evaluated in the log domain.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import optimize

from trigperturb.core.grid import Grid
from trigperturb.core.numerics import signed_log_product, signed_log_products, solve_dense

ArrayOrFloat = Union[float, np.ndarray]

_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """sum_{k=-N}^{N} c_k exp(i k x), coefficients stored in order k = -N..N."""

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError(f"need 2N+1 coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def degree(self) -> int:
        return self.N

    def coeff(self, k: int) -> complex:
        if abs(k) > self.N:
            return 0j
        return complex(self.coeffs[k + self.N])

    def __call__(self, x: ArrayOrFloat):
        return eval_poly(self, x)


def fourier_matrix(pg: Grid) -> np.ndarray:
    """A[k, j] = exp(i j x~_k) for node k and frequency j = -N..N."""
    freqs = np.arange(-pg.N, pg.N + 1)
    return np.exp(1j * np.outer(pg.nodes, freqs))


def eval_poly(p: TrigPoly, x: ArrayOrFloat):
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    freqs = np.arange(-p.N, p.N + 1)
    out = np.empty(xs.size, dtype=np.complex128)
    step = max(1, _CHUNK_ENTRIES // freqs.size)
    for start in range(0, xs.size, step):
        block = xs[start:start + step]
        out[start:start + step] = np.exp(1j * np.outer(block, freqs)) @ p.coeffs
    if np.ndim(x) == 0:
        return complex(out[0])
    return out.reshape(np.shape(x))


def interpolate(pg: Grid, samples) -> TrigPoly:
    """The unique degree-N trigonometric interpolant of ``samples`` at the grid nodes."""
    f = np.asarray(samples, dtype=np.complex128)
    if f.shape != (pg.K,):
        raise ValueError(f"expected {pg.K} samples, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite")
    return TrigPoly(solve_dense(fourier_matrix(pg), f))


def cardinal(pg: Grid, k: int, x: float) -> float:
    """
    The k-th cardinal function prod_{j != k} sin((x - x~_j)/2) / sin((x~_k - x~_j)/2).

    Numerator and denominator are accumulated separately as signed log products.
    """
    if not -pg.N <= k <= pg.N:
        raise ValueError(f"cardinal index {k} outside [-{pg.N}, {pg.N}]")
    nodes = pg.nodes
    xk = nodes[k + pg.N]
    if x == xk:
        return 1.0
    others = np.delete(nodes, k + pg.N)
    num = signed_log_product(np.sin((x - others) / 2))
    den = signed_log_product(np.sin((xk - others) / 2))
    if num.sign == 0:
        return 0.0
    return num.sign * den.sign * float(np.exp(num.log_magnitude - den.log_magnitude))


class CardinalBasis:
    """
    All K cardinal functions of one grid, evaluated in O(K) work per abscissa.

    With S(x) = prod_j sin((x - x~_j)/2), the k-th cardinal is
    S(x) / (sin((x - x~_k)/2) D_k), where the log-denominators D_k are computed
    once per grid.
    """

    def __init__(self, pg: Grid):
        self.grid = pg
        self.nodes = np.array(pg.nodes)
        diff = np.sin((self.nodes[:, np.newaxis] - self.nodes[np.newaxis, :]) / 2)
        np.fill_diagonal(diff, 1.0)
        self.log_den, self.sign_den = signed_log_products(diff)

    def values(self, x) -> np.ndarray:
        """Matrix of shape (len(x), K) holding l_k(x)."""
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        K = self.nodes.size
        out = np.empty((xs.size, K))
        step = max(1, _CHUNK_ENTRIES // K)
        for start in range(0, xs.size, step):
            out[start:start + step] = self._block(xs[start:start + step])
        return out

    def lebesgue(self, x) -> np.ndarray:
        """Sum over k of |l_k(x)| for each abscissa."""
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        K = self.nodes.size
        out = np.empty(xs.size)
        step = max(1, _CHUNK_ENTRIES // K)
        for start in range(0, xs.size, step):
            out[start:start + step] = np.abs(self._block(xs[start:start + step])).sum(axis=1)
        return out

    def column(self, k: int, x) -> np.ndarray:
        """l_k at each abscissa, without forming the other K-1 cardinals."""
        pos = k + self.grid.N
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        others = np.delete(self.nodes, pos)
        out = np.empty(xs.size)
        step = max(1, _CHUNK_ENTRIES // max(1, others.size))
        for start in range(0, xs.size, step):
            block = xs[start:start + step]
            log_num, sign_num = signed_log_products(np.sin((block[:, np.newaxis] - others) / 2))
            out[start:start + step] = sign_num * self.sign_den[pos] * np.exp(log_num - self.log_den[pos])
        return out

    def _block(self, xs: np.ndarray) -> np.ndarray:
        S = np.sin((xs[:, np.newaxis] - self.nodes[np.newaxis, :]) / 2)
        zero = S == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            logS = np.log(np.abs(S))
            total = logS.sum(axis=1, keepdims=True)
            sign = np.prod(np.sign(S), axis=1, keepdims=True)
            vals = sign * np.sign(S) * self.sign_den * np.exp(total - logS - self.log_den)
        hit = zero.any(axis=1)
        if hit.any():
            vals[hit] = zero[hit].astype(np.float64)
        return vals


def cardinal_values(pg: Grid, x, basis: Optional[CardinalBasis] = None) -> np.ndarray:
    return (basis or CardinalBasis(pg)).values(x)


def _composite_abscissae(resolution: int, pg: Optional[Grid]) -> np.ndarray:
    xs = -np.pi + 2 * np.pi * np.arange(resolution) / resolution
    if pg is None:
        return xs
    nodes = pg.nodes
    mids = (nodes[:-1] + nodes[1:]) / 2
    wrap_mid = (nodes[-1] + nodes[0] + 2 * np.pi) / 2
    wrap_mid = (wrap_mid + np.pi) % (2 * np.pi) - np.pi
    return np.sort(np.concatenate([xs, mids, [wrap_mid]]))


def sup_error(
    f: Callable,
    p: TrigPoly,
    resolution: int,
    grid: Optional[Grid] = None,
    xtol: float = 1e-10,
) -> float:
    """
    max |f(x) - p(x)| over [-pi, pi).

    Sampled at ``resolution`` equispaced points plus every midpoint between
    neighbouring nodes of ``grid``, then refined around the discrete argmax.
    """
    K = 2 * p.N + 1
    if resolution < 10 * K:
        raise ValueError(f"resolution {resolution} below 10*K = {10 * K}")
    xs = _composite_abscissae(resolution, grid)

    def err(t):
        return np.abs(np.asarray(f(t), dtype=np.complex128) - eval_poly(p, t))

    errs = err(xs)
    i = int(np.argmax(errs))
    lo = xs[i - 1] if i > 0 else xs[i]
    hi = xs[i + 1] if i + 1 < xs.size else xs[i]
    best = float(errs[i])
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda t: -float(err(t)), bounds=(lo, hi), method="bounded", options={"xatol": xtol}
        )
        best = max(best, -float(res.fun))
    return best
