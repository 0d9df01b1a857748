"""
Quadrature on periodic grids.

On the equispaced grid the interpolatory rule is the trapezoidal rule. On a
perturbed grid the weights w_k are the integrals of the cardinal functions,
i.e. 2 pi times the c_0 row of A^{-1}; one transposed solve gives them all.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from trigperturb.core.grid import Grid
from trigperturb.core.interp import fourier_matrix
from trigperturb.core.numerics import solve_dense

IMAG_RESIDUE_LIMIT = 1e-10


def trapezoid(samples, h: float) -> complex:
    """h * sum of the samples."""
    return complex(h * np.sum(np.asarray(samples, dtype=np.complex128)))


@dataclass(frozen=True, eq=False)
class QuadRule:
    grid: Grid
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.shape != (self.grid.K,):
            raise ValueError(f"expected {self.grid.K} weights, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def moment_residuals(self, max_freq: Optional[int] = None) -> np.ndarray:
        """|sum_k w_k exp(i j x~_k) - 2 pi delta_{j0}| for |j| <= max_freq (default N)."""
        J = self.grid.N if max_freq is None else max_freq
        freqs = np.arange(-J, J + 1)
        moments = np.exp(1j * np.outer(freqs, self.grid.nodes)) @ self.weights
        moments[J] -= 2 * np.pi
        return np.abs(moments)


def quad_weights(pg: Grid) -> QuadRule:
    """Interpolatory weights: w = 2 pi A^{-T} e_0, with e_0 selecting the c_0 row."""
    selector = np.zeros(pg.K, dtype=np.complex128)
    selector[pg.N] = 1.0
    w = 2 * np.pi * solve_dense(fourier_matrix(pg), selector, transpose=True)
    residue = float(np.max(np.abs(w.imag)))
    limit = IMAG_RESIDUE_LIMIT * max(1.0, float(np.max(np.abs(w.real))))
    if residue > limit:
        raise RuntimeError(f"quadrature weights carry imaginary residue {residue:.3e} above {limit:.1e}")
    if residue > 0.1 * limit:
        logging.warning(f"quadrature weights for N={pg.N} carry imaginary residue {residue:.3e}")
    return QuadRule(pg, w.real)


def quad_estimate(rule: QuadRule, samples) -> complex:
    """sum_k w_k f(x~_k)."""
    f = np.asarray(samples, dtype=np.complex128)
    if f.shape != (rule.grid.K,):
        raise ValueError(f"expected {rule.grid.K} samples, got shape {f.shape}")
    return complex(rule.weights @ f)


def polya_sum(rule: QuadRule) -> float:
    """sum_k |w_k|; bounded in N exactly when the rule converges for every continuous f."""
    return float(np.sum(np.abs(rule.weights)))
