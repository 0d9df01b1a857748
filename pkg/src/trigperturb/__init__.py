"""
trigperturb - trigonometric interpolation and quadrature on perturbed grids.

Builds perturbed equispaced grids, interpolates and integrates on them, and
measures how the Lebesgue constant grows with the degree for a given
perturbation size.

Basic usage:
    from trigperturb import equispaced_grid, perturb_grid, PerturbStrategy, lebesgue_constant

    pg = perturb_grid(equispaced_grid(64), PerturbStrategy.parse("uniform_random"), 0.2, seed=1)
    value, argmax = lebesgue_constant(pg)
    print(value)
"""

__version__ = "0.1.0"

from trigperturb.core.errors import NoConvergenceError, SingularSystemError
from trigperturb.core.grid import (
    EquispacedGrid,
    PerturbedGrid,
    PerturbStrategy,
    ScatteredGrid,
    StrategyTag,
    equispaced_grid,
    min_gap,
    perturb_grid,
    scattered_grid,
)
from trigperturb.core.interp import CardinalBasis, TrigPoly, cardinal, eval_poly, interpolate, sup_error
from trigperturb.core.lebesgue import (
    LebesgueSearch,
    bound_shape,
    bound_table,
    crossover_points,
    lebesgue_constant,
    lebesgue_report,
    mk_analytic,
    mk_numeric,
    nine_sum_bound,
    two_norm_lebesgue,
)
from trigperturb.core.quadrature import QuadRule, polya_sum, quad_estimate, quad_weights, trapezoid
from trigperturb.core.testfns import TestFunction, best_approx_proxy, make_analytic, make_smooth, resolve_function
from trigperturb.sweep.runner import SweepConfig, SweepRunner, run_sweep

try:
    from trigperturb.metrics.prometheus import PrometheusSweepRunner
except ImportError:
    # prometheus dependencies not installed
    pass

__all__ = [
    "EquispacedGrid",
    "PerturbedGrid",
    "PerturbStrategy",
    "ScatteredGrid",
    "StrategyTag",
    "equispaced_grid",
    "perturb_grid",
    "scattered_grid",
    "min_gap",
    "TrigPoly",
    "CardinalBasis",
    "interpolate",
    "eval_poly",
    "cardinal",
    "sup_error",
    "QuadRule",
    "quad_weights",
    "quad_estimate",
    "polya_sum",
    "trapezoid",
    "LebesgueSearch",
    "lebesgue_constant",
    "lebesgue_report",
    "two_norm_lebesgue",
    "bound_shape",
    "bound_table",
    "crossover_points",
    "mk_numeric",
    "mk_analytic",
    "nine_sum_bound",
    "TestFunction",
    "make_smooth",
    "make_analytic",
    "resolve_function",
    "best_approx_proxy",
    "SweepConfig",
    "SweepRunner",
    "run_sweep",
    "SingularSystemError",
    "NoConvergenceError",
]
