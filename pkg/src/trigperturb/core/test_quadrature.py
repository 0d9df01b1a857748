import unittest
from unittest.mock import patch

import numpy as np
from numpy.testing import assert_allclose

from trigperturb.core.grid import PerturbStrategy, StrategyTag, equispaced_grid, perturb_grid
from trigperturb.core.interp import cardinal, interpolate, sup_error
from trigperturb.core.numerics import adaptive_integrate
from trigperturb.core.quadrature import QuadRule, polya_sum, quad_estimate, quad_weights, trapezoid
from trigperturb.core.testfns import make_analytic, make_smooth

STRATEGIES = [t.value for t in StrategyTag if t is not StrategyTag.EXPLICIT]


def grid(N, alpha, seed=0, strategy="uniform_random"):
    return perturb_grid(equispaced_grid(N), PerturbStrategy.parse(strategy), alpha, seed=seed)


class TestQuadWeights(unittest.TestCase):

    def test_trapezoid_at_zero_alpha(self):
        for N in (0, 1, 8, 64):
            pg = grid(N, 0.0, strategy="none")
            assert_allclose(quad_weights(pg).weights, np.full(pg.K, pg.h), atol=1e-12)

    def test_weight_sum(self):
        for alpha in (0.1, 0.3, 0.45):
            for seed in range(5):
                pg = grid(32, alpha, seed=seed)
                w = quad_weights(pg).weights
                self.assertAlmostEqual(float(w.sum()), 2 * np.pi, delta=1e-9 * pg.K)

    def test_moments(self):
        for N in (4, 16, 64):
            for alpha in (0.0, 0.2, 0.45):
                for strategy in STRATEGIES:
                    pg = grid(N, alpha, seed=N, strategy=strategy)
                    residuals = quad_weights(pg).moment_residuals()
                    self.assertEqual(residuals.size, pg.K)
                    self.assertLessEqual(float(residuals.max()), 1e-8 * pg.K, f"N={N} alpha={alpha} {strategy}")

    def test_weights_integrate_cardinals(self):
        for N in (1, 4, 8):
            pg = grid(N, 0.4, seed=N)
            w = quad_weights(pg).weights
            for k in range(-N, N + 1):
                integral = adaptive_integrate(lambda x: cardinal(pg, k, x), -np.pi, np.pi, tol=1e-10)
                self.assertAlmostEqual(w[k + N], integral, delta=1e-8)

    def test_imaginary_residue(self):
        pg = grid(2, 0.1)
        with patch("trigperturb.core.quadrature.solve_dense", return_value=np.full(5, 0.2 + 0.1j)):
            with self.assertRaises(RuntimeError):
                quad_weights(pg)


class TestQuadEstimate(unittest.TestCase):

    def test_exact_for_trig_polynomials(self):
        pg = grid(4, 0.3, seed=2)
        rule = quad_weights(pg)
        f = np.cos(3 * pg.nodes) + 2 + np.sin(4 * pg.nodes)
        self.assertAlmostEqual(quad_estimate(rule, f).real, 4 * np.pi, places=11)

    def test_matches_constant_coefficient(self):
        rng = np.random.default_rng(21)
        for N, alpha, strategy in ((4, 0.2, "uniform_random"), (16, 0.45, "alternating_max"), (32, 0.3, "random_signs_max")):
            pg = grid(N, alpha, seed=N, strategy=strategy)
            samples = rng.standard_normal(pg.K) + 1j * rng.standard_normal(pg.K)
            via_rule = quad_estimate(quad_weights(pg), samples)
            via_coeffs = 2 * np.pi * interpolate(pg, samples).coeff(0)
            self.assertLessEqual(abs(via_rule - via_coeffs), 1e-8 * (1 + np.max(np.abs(samples))))

    def test_error_bounded_by_interpolation_error(self):
        for f in (make_smooth(3), make_analytic(1.25)):
            for alpha in (0.0, 0.3, 0.45):
                pg = grid(16, alpha, seed=3)
                samples = f(pg.nodes)
                rule = quad_weights(pg)
                err = sup_error(f, interpolate(pg, samples), resolution=40 * pg.K, grid=pg)
                quad_err = abs(f.exact_integral - quad_estimate(rule, samples))
                self.assertLessEqual(quad_err, (polya_sum(rule) + 2 * np.pi) * err + 1e-12, f"{f.label} alpha={alpha}")

    def test_length_mismatch(self):
        rule = quad_weights(grid(3, 0.2))
        with self.assertRaises(ValueError):
            quad_estimate(rule, np.ones(6))

    def test_rule_validation(self):
        with self.assertRaises(ValueError):
            QuadRule(grid(3, 0.2), np.ones(6))

    def test_trapezoid(self):
        g = equispaced_grid(5)
        self.assertAlmostEqual(trapezoid(np.ones(g.K), g.h).real, 2 * np.pi, places=13)

    def test_polya_sum(self):
        self.assertAlmostEqual(polya_sum(quad_weights(grid(10, 0.0))), 2 * np.pi, places=11)
        self.assertGreaterEqual(polya_sum(quad_weights(grid(10, 0.45, strategy="alternating_max"))), 2 * np.pi - 1e-9)


if __name__ == "__main__":
    unittest.main(argv=['first-arg-is-ignored'], exit=False)
