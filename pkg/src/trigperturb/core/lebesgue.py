"""
Lebesgue functions and constants on perturbed grids, and the explicit bound
machinery for them.

The infinity-norm constant is max_x sum_k |l_k(x)|, found by dense Chebyshev
sampling of every inter-node interval followed by bounded Brent refinement.
The two-norm constant is sqrt(K) / sigma_min(A), normalized so the
equispaced grid gives exactly 1.

The bound machinery bounds |l_0| on the region [x*_{-(k+1)}, x*_{-k}] by
M_k = max over [-pi, 0] n R_k of P_k(x)/Q_k, where P_k and Q_k are products of
sines at the extremal node placements, and sums to L(x) <= 9 sum_k M_k.
"""
import functools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import optimize

from trigperturb.core.grid import PerturbedGrid, check_alpha
from trigperturb.core.interp import CardinalBasis, fourier_matrix
from trigperturb.core.numerics import MAX_SVD_SIZE, min_singular_value, signed_log_product, signed_log_products

ASYMPTOTIC_MIN_N = 32
ILL_CONDITIONED_SIGMA = 1e-14
REGION_SLACK = 1e-8


@dataclass(frozen=True)
class LebesgueSearch:
    """Search density and certification policy for Lebesgue and M_k maxima."""

    samples_per_interval: int = 64
    max_samples_per_interval: int = 1024
    mk_samples: int = 256
    xtol: float = 1e-10
    certify: bool = True
    certify_tol: float = 1e-6
    refine_top: int = 4

    def __post_init__(self):
        if self.samples_per_interval < 16:
            raise ValueError(f"samples_per_interval must be at least 16, got {self.samples_per_interval}")
        if self.mk_samples < 256:
            raise ValueError(f"mk_samples must be at least 256, got {self.mk_samples}")


DEFAULT_SEARCH = LebesgueSearch()


class TwoNormLebesgue(NamedTuple):
    value: float
    sigma_min: float
    ill_conditioned: bool


@dataclass(frozen=True)
class LebesgueReport:
    lambda_inf: float
    argmax_x: float
    bound_shape: float
    lambda_two: Optional[float] = None
    nine_sum: Optional[float] = None

    @property
    def bound_ratio(self) -> float:
        """lambda_inf / bound_shape; the only form in which the universal constant is reported."""
        if self.bound_shape == 0:
            return float("inf")
        return self.lambda_inf / self.bound_shape


@dataclass(frozen=True, eq=False)
class BoundTable:
    """Crossover points, regions and M_k values for one grid."""

    N: int
    alpha: float
    crossovers: np.ndarray = field(repr=False)
    regions: np.ndarray = field(repr=False)
    region_stars: np.ndarray = field(repr=False)
    mk: np.ndarray = field(repr=False)
    mk_bounds: np.ndarray = field(repr=False)

    @property
    def enforced(self) -> bool:
        """Whether N is large enough for the analytic M_k bounds to be asserted."""
        return self.N >= ASYMPTOTIC_MIN_N

    def crossover(self, k: int) -> float:
        return float(self.crossovers[k + self.N + 1])


def _chebyshev_fractions(m: int, endpoints: bool = False) -> np.ndarray:
    if endpoints:
        return (1 - np.cos(np.pi * np.arange(m) / (m - 1))) / 2
    return (1 - np.cos(np.pi * np.arange(1, m + 1) / (m + 1))) / 2


def lebesgue_function(pg: PerturbedGrid, x, basis: Optional[CardinalBasis] = None):
    """sum_k |l_k(x)|; exactly 1 at the nodes."""
    values = (basis or CardinalBasis(pg)).lebesgue(x)
    if np.ndim(x) == 0:
        return float(values[0])
    return values.reshape(np.shape(x))


def _wrap(x: float) -> float:
    return float((x + np.pi) % (2 * np.pi) - np.pi)


def _maximize(fun, lo: float, hi: float, xtol: float) -> Tuple[float, float]:
    res = optimize.minimize_scalar(lambda t: -fun(t), bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    return -float(res.fun), float(res.x)


def _search_lebesgue(basis: CardinalBasis, m: int, opts: LebesgueSearch) -> Tuple[float, float]:
    nodes = basis.nodes
    left = nodes
    right = np.append(nodes[1:], nodes[0] + 2 * np.pi)
    width = right - left
    t = _chebyshev_fractions(m)
    xs = left[:, np.newaxis] + width[:, np.newaxis] * t[np.newaxis, :]
    L = basis.lebesgue(xs.ravel()).reshape(xs.shape)

    per_interval = L.max(axis=1)
    best_val, best_x = 1.0, float(nodes[0])
    for i in np.argsort(per_interval)[::-1][: opts.refine_top]:
        j = int(np.argmax(L[i]))
        lo = xs[i, j - 1] if j > 0 else left[i]
        hi = xs[i, j + 1] if j + 1 < m else right[i]
        val, arg = _maximize(lambda s: float(basis.lebesgue(s)[0]), lo, hi, opts.xtol)
        if L[i, j] > val:
            val, arg = float(L[i, j]), float(xs[i, j])
        if val > best_val:
            best_val, best_x = val, arg
    return best_val, _wrap(best_x)


def lebesgue_constant(
    pg: PerturbedGrid,
    opts: LebesgueSearch = DEFAULT_SEARCH,
    basis: Optional[CardinalBasis] = None,
) -> Tuple[float, float]:
    """
    (Lambda_N, argmax) for the grid.

    The value is a certified lower bound: with ``opts.certify`` the sampling
    density is doubled until the result moves by less than ``certify_tol``.
    """
    basis = basis or CardinalBasis(pg)
    m = opts.samples_per_interval
    value, arg = _search_lebesgue(basis, m, opts)
    while opts.certify and m < opts.max_samples_per_interval:
        finer, finer_arg = _search_lebesgue(basis, 2 * m, opts)
        moved = abs(finer - value)
        m *= 2
        if finer > value:
            value, arg = finer, finer_arg
        if moved < opts.certify_tol:
            break
        logging.info(f"Lebesgue search for N={pg.N} moved by {moved:.2e}; doubling density to {m}")
    return value, arg


def bound_shape(N: int, alpha: float) -> float:
    """(N^{4 alpha} - 1) / (alpha (1 - 2 alpha)), or its limit 4 log N at alpha = 0."""
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    check_alpha(alpha)
    logN = np.log(N)
    if alpha == 0:
        return float(4 * logN)
    return float(np.expm1(4 * alpha * logN) / (alpha * (1 - 2 * alpha)))


def crossover_points(pg: PerturbedGrid) -> np.ndarray:
    """
    x*_k for k = -N-1..N, stored at index k + N + 1.

    x*_0 = 0 and x*_{-N-1} = -pi; the rest come from the closed arctan form,
    which depends on the grid only through x~_0. At alpha = 0 they reduce to k h.
    """
    N, h, alpha = pg.N, pg.h, pg.alpha
    k = np.arange(-N, N + 1)
    if alpha == 0:
        inner = k * h
    else:
        t = np.tan(pg.node(0) / 2)
        num = np.cos(k * h) - np.cos(alpha * h) + t * np.sin(k * h)
        den = t * (np.cos(k * h) + np.cos(alpha * h)) - np.sin(k * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = 2 * np.arctan(num / den)
        inner[N] = 0.0
    return np.concatenate([[-np.pi], inner])


def crossover_violations(pg: PerturbedGrid, xstar: Optional[np.ndarray] = None, tol: float = 1e-12) -> int:
    """Number of k in -N..N with x*_k outside [(k - alpha) h, (k + alpha) h]."""
    xstar = crossover_points(pg) if xstar is None else xstar
    k = np.arange(-pg.N, pg.N + 1)
    inner = xstar[1:]
    lo = (k - pg.alpha) * pg.h - tol
    hi = (k + pg.alpha) * pg.h + tol
    return int(np.count_nonzero((inner < lo) | (inner > hi) | ~np.isfinite(inner)))


def _check_mk_args(N: int, alpha: float, k: int) -> None:
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    if not 0 <= k <= N:
        raise ValueError(f"region index {k} outside [0, {N}]")


def _pk_factors(N: int, alpha: float, k: int, xs: np.ndarray) -> np.ndarray:
    h = 2 * np.pi / (2 * N + 1)
    shifts = np.concatenate([
        -(np.arange(1, N + 1) - alpha) * h,
        (np.arange(1, k + 1) - alpha) * h,
        (np.arange(k + 1, N + 1) + alpha) * h,
    ])
    return np.sin((xs[:, np.newaxis] + shifts[np.newaxis, :]) / 2)


def log_pk(N: int, alpha: float, k: int, x) -> np.ndarray:
    """log P_k(x); -inf where a factor vanishes."""
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    log_mag, _ = signed_log_products(_pk_factors(N, alpha, k, xs))
    return log_mag


def log_qk(N: int, alpha: float, k: int) -> float:
    h = 2 * np.pi / (2 * N + 1)
    args = np.concatenate([
        (2 * alpha - np.arange(1, N + 1)) * h,
        np.arange(1, k + 1) * h,
        (2 * alpha + np.arange(k + 1, N + 1)) * h,
    ])
    q = signed_log_product(np.abs(np.sin(args / 2)))
    if q.sign == 0:
        raise RuntimeError(f"Q_{k} vanished for N={N}, alpha={alpha}")
    return q.log_magnitude


def mk_region(N: int, alpha: float, k: int) -> Tuple[float, float]:
    """[-pi, 0] n R_k with R_k = [(-k-1-alpha) h, (-k+alpha) h]."""
    h = 2 * np.pi / (2 * N + 1)
    lo = max(-np.pi, (-k - 1 - alpha) * h)
    hi = min(0.0, (-k + alpha) * h)
    if not lo < hi:
        raise RuntimeError(f"empty search region for M_{k} (N={N}, alpha={alpha})")
    return lo, hi


def _search_mk(N: int, alpha: float, k: int, m: int, xtol: float) -> float:
    lo, hi = mk_region(N, alpha, k)
    xs = lo + (hi - lo) * _chebyshev_fractions(m, endpoints=True)
    logs = log_pk(N, alpha, k, xs)
    j = int(np.argmax(logs))
    best = float(logs[j])
    a = xs[j - 1] if j > 0 else lo
    b = xs[j + 1] if j + 1 < m else hi
    val, _ = _maximize(lambda s: float(log_pk(N, alpha, k, s)[0]), a, b, xtol)
    return max(best, val)


def mk_numeric(N: int, alpha: float, k: int, opts: LebesgueSearch = DEFAULT_SEARCH) -> float:
    """M_k = max P_k(x)/Q_k over [-pi, 0] n R_k, under the certified-search policy."""
    _check_mk_args(N, alpha, k)
    log_q = log_qk(N, alpha, k)
    m = opts.mk_samples
    value = _search_mk(N, alpha, k, m, opts.xtol)
    while opts.certify and m < 4 * opts.mk_samples:
        finer = _search_mk(N, alpha, k, 2 * m, opts.xtol)
        m *= 2
        moved = abs(np.expm1(finer - value))
        value = max(value, finer)
        if moved < opts.certify_tol:
            break
        logging.info(f"M_{k} search for N={N}, alpha={alpha} moved by {moved:.2e}; doubling density to {m}")
    return float(np.exp(value - log_q))


@functools.lru_cache(maxsize=256)
def mk_numeric_table(N: int, alpha: float, opts: LebesgueSearch = DEFAULT_SEARCH) -> Tuple[float, ...]:
    """M_0..M_N; independent of the grid, so cached per (N, alpha)."""
    return tuple(mk_numeric(N, alpha, k, opts) for k in range(N + 1))


def mk_analytic(N: int, alpha: float, k: int) -> float:
    """
    Analytic upper bound on M_k: 10 pi/(1 - 2 alpha) for k in {0, 1},
    3 pi (k+1)^{2 alpha} / ((1 - 2 alpha)(k-1)^{1 - 2 alpha}) for k >= 2.

    Valid for sufficiently large N only; see ``BoundTable.enforced``.
    """
    _check_mk_args(N, alpha, k)
    if N < ASYMPTOTIC_MIN_N:
        logging.debug(f"analytic M_{k} bound at N={N} is below the asymptotic regime N >= {ASYMPTOTIC_MIN_N}")
    if k < 2:
        return 10 * np.pi / (1 - 2 * alpha)
    return 3 * np.pi * (k + 1) ** (2 * alpha) / ((1 - 2 * alpha) * (k - 1) ** (1 - 2 * alpha))


def nine_sum_bound(N: int, alpha: float, opts: LebesgueSearch = DEFAULT_SEARCH) -> float:
    """9 sum_{k=0}^{N} M_k, an upper bound on the Lebesgue function of every admissible grid."""
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    return 9 * float(sum(mk_numeric_table(N, alpha, opts)))


def mk_violations(N: int, alpha: float, opts: LebesgueSearch = DEFAULT_SEARCH) -> int:
    """Number of k with numeric M_k above its analytic bound."""
    count = 0
    for k, mk in enumerate(mk_numeric_table(N, alpha, opts)):
        if mk > mk_analytic(N, alpha, k):
            count += 1
    if count and N < ASYMPTOTIC_MIN_N:
        logging.info(f"{count} M_k values exceed the analytic bound at N={N} < {ASYMPTOTIC_MIN_N} (informational)")
    return count


def bound_table(pg: PerturbedGrid, opts: LebesgueSearch = DEFAULT_SEARCH) -> BoundTable:
    N, alpha, h = pg.N, pg.alpha, pg.h
    xstar = crossover_points(pg)
    k = np.arange(N + 1)
    regions = np.column_stack([(-k - 1 - alpha) * h, (-k + alpha) * h])
    # R*_k = [x*_{-k-1}, x*_{-k}]
    stars = np.column_stack([xstar[N - k], xstar[N + 1 - k]])
    mk = np.array(mk_numeric_table(N, alpha, opts))
    bounds = np.array([mk_analytic(N, alpha, j) for j in range(N + 1)])
    return BoundTable(N, alpha, xstar, regions, stars, mk, bounds)


def region_violations(
    pg: PerturbedGrid,
    table: Optional[BoundTable] = None,
    samples_per_region: int = 64,
    basis: Optional[CardinalBasis] = None,
) -> int:
    """Sampled points x in R*_k where |l_0(x)| exceeds M_k (1 + 1e-8)."""
    table = table or bound_table(pg)
    basis = basis or CardinalBasis(pg)
    t = _chebyshev_fractions(samples_per_region, endpoints=True)
    lo, hi = table.region_stars[:, 0], table.region_stars[:, 1]
    xs = lo[:, np.newaxis] + (hi - lo)[:, np.newaxis] * t[np.newaxis, :]
    l0 = np.abs(basis.column(0, xs.ravel())).reshape(xs.shape)
    limit = table.mk[:, np.newaxis] * (1 + REGION_SLACK)
    return int(np.count_nonzero(l0 > limit))


def two_norm_lebesgue(pg: PerturbedGrid) -> TwoNormLebesgue:
    """sqrt(K) / sigma_min(A); ``ill_conditioned`` when sigma_min < 1e-14."""
    if pg.K > MAX_SVD_SIZE:
        raise ValueError(f"two-norm constant needs K <= {MAX_SVD_SIZE}, got {pg.K}")
    smin = min_singular_value(fourier_matrix(pg))
    ill = smin < ILL_CONDITIONED_SIGMA
    value = np.inf if smin == 0 else np.sqrt(pg.K) / smin
    if ill:
        logging.warning(f"two-norm Lebesgue constant at N={pg.N}, alpha={pg.alpha} is ill-conditioned (sigma_min={smin:.2e})")
    return TwoNormLebesgue(float(value), smin, ill)


def lebesgue_report(
    pg: PerturbedGrid,
    opts: LebesgueSearch = DEFAULT_SEARCH,
    two_norm: bool = False,
    nine_sum: bool = False,
) -> LebesgueReport:
    value, arg = lebesgue_constant(pg, opts)
    shape = bound_shape(pg.N, pg.alpha) if pg.N > 0 else float("nan")
    lam2 = two_norm_lebesgue(pg).value if two_norm else None
    nine = nine_sum_bound(pg.N, pg.alpha, opts) if nine_sum and pg.alpha > 0 else None
    return LebesgueReport(value, arg, shape, lam2, nine)
