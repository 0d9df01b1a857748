import csv
import os
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from trigperturb.core.grid import (
    PerturbedGrid,
    PerturbStrategy,
    StrategyTag,
    equispaced_grid,
    min_gap,
    perturb_grid,
    scattered_grid,
    write_grid_csv,
)


class TestEquispacedGrid(unittest.TestCase):

    def test_layout(self):
        g = equispaced_grid(4)
        self.assertEqual(g.K, 9)
        self.assertAlmostEqual(g.h, 2 * np.pi / 9)
        self.assertEqual(g.nodes[4], 0.0)
        assert_allclose(g.nodes, -g.nodes[::-1], atol=1e-15)
        self.assertTrue(np.all(g.nodes >= -np.pi) and np.all(g.nodes < np.pi))

    def test_single_node(self):
        g = equispaced_grid(0)
        self.assertEqual(g.K, 1)
        assert_array_equal(g.nodes, [0.0])

    def test_invalid_degree(self):
        with self.assertRaises(ValueError):
            equispaced_grid(-1)
        with self.assertRaises(ValueError):
            equispaced_grid(2049)


class TestPerturbGrid(unittest.TestCase):

    def setUp(self):
        self.g = equispaced_grid(6)

    def test_none(self):
        pg = perturb_grid(self.g, PerturbStrategy.parse("none"), 0.3)
        assert_array_equal(pg.shifts, np.zeros(13))
        assert_array_equal(pg.nodes, self.g.nodes)

    def test_alternating(self):
        pg = perturb_grid(self.g, PerturbStrategy.parse("alternating_max"), 0.25)
        k = self.g.indices
        assert_allclose(pg.shifts, 0.25 * (-1.0) ** k)

    def test_all_plus(self):
        pg = perturb_grid(self.g, PerturbStrategy.parse("all_plus_max"), 0.4)
        assert_array_equal(pg.shifts, np.full(13, 0.4))

    def test_random_signs(self):
        pg = perturb_grid(self.g, PerturbStrategy.parse("random_signs_max"), 0.1, seed=3)
        assert_allclose(np.abs(pg.shifts), 0.1)

    def test_uniform_random_deterministic(self):
        strat = PerturbStrategy.parse("uniform_random")
        a = perturb_grid(self.g, strat, 0.3, seed=5, trial=2)
        b = perturb_grid(self.g, strat, 0.3, seed=5, trial=2)
        c = perturb_grid(self.g, strat, 0.3, seed=5, trial=3)
        assert_array_equal(a.shifts, b.shifts)
        self.assertFalse(np.array_equal(a.shifts, c.shifts))
        self.assertTrue(np.all(np.abs(a.shifts) <= 0.3))

    def test_order_independent(self):
        strat = PerturbStrategy.parse("uniform_random")
        alone = perturb_grid(equispaced_grid(16), strat, 0.2, seed=1, trial=4)
        for n in (4, 8, 32):
            perturb_grid(equispaced_grid(n), strat, 0.2, seed=1, trial=4)
        again = perturb_grid(equispaced_grid(16), strat, 0.2, seed=1, trial=4)
        assert_array_equal(alone.shifts, again.shifts)

    def test_explicit(self):
        shifts = np.linspace(-0.2, 0.2, 13)
        pg = perturb_grid(self.g, PerturbStrategy.explicit(shifts), 0.2)
        assert_allclose(pg.shifts, shifts)
        self.assertEqual(pg.strategy, StrategyTag.EXPLICIT)
        with self.assertRaises(ValueError):
            perturb_grid(self.g, PerturbStrategy.explicit(shifts[:-1]), 0.2)
        with self.assertRaises(ValueError):
            perturb_grid(self.g, PerturbStrategy.explicit(shifts), 0.1)

    def test_alpha_range(self):
        for alpha in (-0.1, 0.5, 0.7):
            with self.assertRaises(ValueError):
                perturb_grid(self.g, PerturbStrategy.parse("none"), alpha)

    def test_parse(self):
        with self.assertRaises(ValueError):
            PerturbStrategy.parse("explicit")
        with self.assertRaises(ValueError):
            PerturbStrategy.parse("jitter")

    def test_shifts_are_read_only(self):
        pg = perturb_grid(self.g, PerturbStrategy.parse("uniform_random"), 0.2)
        with self.assertRaises(ValueError):
            pg.shifts[0] = 0.0

    def test_direct_construction_validates(self):
        with self.assertRaises(ValueError):
            PerturbedGrid(self.g, 0.1, np.full(13, 0.2))
        with self.assertRaises(ValueError):
            PerturbedGrid(self.g, 0.1, np.zeros(12))

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(0, 64),
        st.floats(0.0, 0.499),
        st.sampled_from([t.value for t in StrategyTag if t is not StrategyTag.EXPLICIT]),
        st.integers(0, 2 ** 32),
    )
    def test_min_gap(self, N, alpha, strategy, seed):
        pg = perturb_grid(equispaced_grid(N), PerturbStrategy.parse(strategy), alpha, seed=seed)
        self.assertTrue(np.all(np.diff(pg.nodes) > 0))
        self.assertGreaterEqual(min_gap(pg), (1 - 2 * alpha) * pg.h - 1e-12)


class TestScatteredGrid(unittest.TestCase):

    def test_sorted_in_period(self):
        sg = scattered_grid(equispaced_grid(10), seed=2)
        self.assertEqual(sg.nodes.size, 21)
        self.assertTrue(np.all(np.diff(sg.nodes) >= 0))
        self.assertTrue(np.all(sg.nodes >= -np.pi) and np.all(sg.nodes < np.pi))
        self.assertFalse(sg.in_model)


class TestWriteGridCsv(unittest.TestCase):

    def test_exact_round_trip(self):
        pg = perturb_grid(equispaced_grid(5), PerturbStrategy.parse("uniform_random"), 0.3, seed=9)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "grid.csv")
            write_grid_csv(pg, path)
            with open(path, newline="") as fh:
                rows = list(csv.reader(fh))
        self.assertEqual(rows[0], ["k", "x_k", "s_k", "x_tilde_k"])
        self.assertEqual(len(rows), pg.K + 1)
        self.assertEqual([int(r[0]) for r in rows[1:]], list(range(-5, 6)))
        assert_array_equal([float(r[3]) for r in rows[1:]], pg.nodes)
        assert_array_equal([float(r[2]) for r in rows[1:]], pg.shifts)


if __name__ == "__main__":
    unittest.main(argv=['first-arg-is-ignored'], exit=False)
