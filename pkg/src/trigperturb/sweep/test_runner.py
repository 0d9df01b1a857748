import csv
import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np
import pytest

from trigperturb.core.errors import SingularSystemError
from trigperturb.core.testfns import resolve_function
from trigperturb.sweep.runner import Check, SweepConfig, SweepRunner, run_sweep


def data_lines(path):
    with open(path) as fh:
        return [line for line in fh if not line.startswith("#")]


def summary_lines(path):
    with open(path) as fh:
        return [line.rstrip("\n") for line in fh if line.startswith("#")]


class TestSweepConfig(unittest.TestCase):

    def test_validation(self):
        bad = [
            dict(command="plot", alphas=[0.1]),
            dict(command="quad-sweep", alphas=[]),
            dict(command="quad-sweep", alphas=[0.5]),
            dict(command="quad-sweep", alphas=[0.1], n_list=[16, 8]),
            dict(command="quad-sweep", alphas=[0.1], trials=0),
            dict(command="quad-sweep", alphas=[0.1], workers=0),
            dict(command="quad-sweep", alphas=[0.1], strategy="jitter"),
            dict(command="converge", alphas=[0.1]),
            dict(command="converge", alphas=[0.1], function="gauss:1"),
            dict(command="verify-bounds", alphas=[0.0, 0.2]),
        ]
        for kwargs in bad:
            with self.assertRaises(ValueError, msg=str(kwargs)):
                SweepConfig(**kwargs)

    def test_output_path(self):
        cfg = SweepConfig(command="quad-sweep", alphas=[0.1])
        with patch.dict(os.environ, {"TRIGPERTURB_OUTPUT_DIR": "/tmp/sweeps"}):
            self.assertEqual(cfg.resolved_out_path(), os.path.join("/tmp/sweeps", "quad-sweep.csv"))
        cfg.out_path = "mine.csv"
        self.assertEqual(cfg.resolved_out_path(), "mine.csv")

    def test_two_norm_cap(self):
        cfg = SweepConfig(command="two-norm-sweep", alphas=[0.1], n_list=[8, 256, 300])
        self.assertEqual(sorted({t.N for t in SweepRunner(cfg).tasks()}), [8, 256])


class TestSweepRunner(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def out(self, name):
        return os.path.join(self.tmp.name, name)

    def test_worker_count_does_not_change_rows(self):
        paths = []
        for workers in (1, 8):
            path = self.out(f"lebesgue_{workers}.csv")
            cfg = SweepConfig(
                command="lebesgue-sweep", alphas=[0.2, 0.3], n_list=[4, 8, 16], trials=3,
                seed=42, out_path=path, workers=workers, certify=False,
            )
            SweepRunner(cfg).run()
            paths.append(path)
        first, second = (data_lines(p) for p in paths)
        self.assertEqual(len(first), 1 + 2 * 3 * 3)
        self.assertEqual(first, second)

    def test_csv_layout(self):
        path = self.out("quad.csv")
        outcome = SweepRunner(SweepConfig(
            command="quad-sweep", alphas=[0.0, 0.3], n_list=[8, 16, 32], trials=2, out_path=path,
        )).run()
        self.assertEqual(outcome.exit_code, 0)
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if not r[0].startswith("#")]
        self.assertEqual(rows[0], ["alpha", "N", "trial", "seed", "strategy", "polya_sum", "max_weight", "min_weight"])
        self.assertEqual([(r[0], r[1], r[2]) for r in rows[1:4]], [("0", "8", "0"), ("0", "8", "1"), ("0", "16", "0")])
        summary = summary_lines(path)
        self.assertIn("# PASS sum of weights equals 2*pi: 0 violations in 12 rules", summary)
        self.assertTrue(any(line.startswith("# PASS weights reduce to h at alpha=0") for line in summary))
        self.assertTrue(summary[-1].startswith("# elapsed_seconds="))

    def test_two_norm_unitary(self):
        path = self.out("two.csv")
        outcome = SweepRunner(SweepConfig(command="two-norm-sweep", alphas=[0.0], n_list=[8, 16, 32], out_path=path)).run()
        self.assertEqual(outcome.exit_code, 0)
        self.assertTrue(any(c.name == "lambda_two equals 1 at alpha=0" and c.verdict == "PASS" for c in outcome.checks))

    def test_equispaced_growth_is_logarithmic(self):
        outcome = SweepRunner(SweepConfig(
            command="lebesgue-sweep", alphas=[0.0], n_list=[8, 16, 32, 64], out_path=self.out("leb.csv"),
        )).run()
        verdicts = {c.name: c.verdict for c in outcome.checks}
        self.assertEqual(verdicts["lambda_inf logarithmic growth alpha=0"], "PASS")
        self.assertTrue(all(row["nine_sum"] is None for row in outcome.rows))

    def test_verify_bounds(self):
        path = self.out("verify.csv")
        outcome = SweepRunner(SweepConfig(
            command="verify-bounds", alphas=[0.2, 0.4], n_list=[8, 16], trials=2, out_path=path,
        )).run()
        self.assertEqual(outcome.exit_code, 0, [c.line() for c in outcome.failed])
        self.assertEqual(data_lines(path)[0].strip(), ",".join([
            "alpha", "N", "trial", "seed", "strategy", "lambda_inf", "nine_sum",
            "crossover_violations", "region_violations", "mk_violations",
        ]))
        for row in outcome.rows:
            self.assertEqual(row["crossover_violations"], 0)
            self.assertEqual(row["region_violations"], 0)
            self.assertLessEqual(row["lambda_inf"], row["nine_sum"])

    def test_converge_analytic(self):
        outcome = SweepRunner(SweepConfig(
            command="converge", alphas=[0.0], n_list=[8, 12, 16, 20, 24], function="analytic:1.25",
            out_path=self.out("conv.csv"),
        )).run()
        verdicts = {c.name: c.verdict for c in outcome.checks}
        self.assertEqual(verdicts["sup_err rate alpha=0"], "PASS")
        self.assertEqual(verdicts["quad_err rate alpha=0"], "PASS")
        self.assertEqual(verdicts["best_proxy rate alpha=0"], "INFO")

    def test_runge_demo_is_informational(self):
        outcome = SweepRunner(SweepConfig(
            command="converge", alphas=[0.0], n_list=[4, 8, 16], function="smooth:3", runge_demo=True,
            out_path=self.out("runge.csv"),
        )).run()
        self.assertEqual(outcome.exit_code, 0)
        self.assertTrue(all(c.verdict == "INFO" for c in outcome.checks))
        self.assertTrue(all(row["function"].endswith("|scattered") for row in outcome.rows))

    def test_grids_single_file(self):
        path = self.out("grid.csv")
        SweepRunner(SweepConfig(command="grids", alphas=[0.1], n_list=[4], out_path=path)).run()
        self.assertEqual(len(data_lines(path)), 1 + 9)

    def test_grids_many_files(self):
        path = self.out("grid.csv")
        SweepRunner(SweepConfig(command="grids", alphas=[0.1], n_list=[4, 8], trials=2, out_path=path)).run()
        self.assertEqual(
            sorted(os.listdir(self.tmp.name)),
            ["grid_a0.1_N4_t0.csv", "grid_a0.1_N4_t1.csv", "grid_a0.1_N8_t0.csv", "grid_a0.1_N8_t1.csv"],
        )

    def test_task_failure_propagates(self):
        cfg = SweepConfig(command="quad-sweep", alphas=[0.1], n_list=[4, 8], workers=2, out_path=self.out("x.csv"))
        runner = SweepRunner(cfg)
        with patch("trigperturb.sweep.runner.quad_weights", side_effect=RuntimeError("boom")):
            with self.assertRaises(RuntimeError):
                runner.run()
        self.assertGreaterEqual(runner.metrics["failures"], 1)
        self.assertFalse(os.path.exists(self.out("x.csv")))

    def test_metrics_recorded(self):
        runner = SweepRunner(SweepConfig(command="quad-sweep", alphas=[0.1], n_list=[4, 8], trials=2, out_path=self.out("m.csv")))
        runner.run()
        self.assertEqual(runner.metrics["tasks"], 4)
        self.assertEqual(len(runner.metrics["task_times"]), 4)


class TestRunSweep(unittest.TestCase):

    def test_exit_codes(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "q.csv")
            cfg = SweepConfig(command="quad-sweep", alphas=[0.1], n_list=[4, 8, 16], out_path=path)
            self.assertEqual(run_sweep(cfg), 0)
            with patch.object(SweepRunner, "summarize", return_value=[Check("forced", "FAIL", "")]):
                self.assertEqual(run_sweep(cfg), 1)

            blocker = os.path.join(tmp, "file")
            open(blocker, "w").close()
            cfg.out_path = os.path.join(blocker, "q.csv")
            self.assertEqual(run_sweep(cfg), 2)

    def test_numerical_failure_exits_two(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = SweepConfig(command="quad-sweep", alphas=[0.1], n_list=[4, 8], out_path=os.path.join(tmp, "q.csv"))
            with patch("trigperturb.sweep.runner.quad_weights", side_effect=SingularSystemError("zero pivot")):
                self.assertEqual(run_sweep(cfg), 2)
            self.assertFalse(os.path.exists(cfg.out_path))


class TestSummaries(unittest.TestCase):

    def converge_runner(self, alpha):
        return SweepRunner(SweepConfig(command="converge", alphas=[alpha], function="analytic:1.25"))

    def test_quad_rate_is_two_sided_when_perturbed(self):
        f = resolve_function("analytic:1.25")
        a = f.smoothness.value
        ns = [8, 12, 16, 20]
        runner = self.converge_runner(0.3)
        too_fast = [(n, np.exp(-2 * a * n)) for n in ns]
        on_rate = [(n, np.exp(-1.05 * a * n)) for n in ns]
        self.assertEqual(runner._rate_check(f, 0.3, "quad_err", too_fast).verdict, "FAIL")
        self.assertEqual(runner._rate_check(f, 0.3, "quad_err", on_rate).verdict, "PASS")
        self.assertEqual(runner._rate_check(f, 0.3, "sup_err", too_fast).verdict, "FAIL")

    def test_quad_rate_may_double_on_equispaced_grid(self):
        f = resolve_function("analytic:1.25")
        a = f.smoothness.value
        points = [(n, np.exp(-2 * a * n)) for n in (8, 10, 12, 14)]
        self.assertEqual(self.converge_runner(0.0)._rate_check(f, 0.0, "quad_err", points).verdict, "PASS")

    def test_mk_violations_counted_once_per_grid_size(self):
        runner = SweepRunner(SweepConfig(command="verify-bounds", alphas=[0.2], n_list=[16, 32], trials=3))
        rows = [
            dict(alpha=0.2, N=N, trial=t, lambda_inf=2.0, nine_sum=50.0,
                 crossover_violations=0, region_violations=0, mk_violations=2)
            for N in (16, 32) for t in range(3)
        ]
        checks = {c.name: c for c in runner._summarize_verify_bounds(rows)}
        self.assertEqual(checks["numeric M_k <= analytic bound (N >= 32)"].detail, "2 violations")
        self.assertEqual(checks["numeric M_k vs analytic bound (N < 32)"].detail, "2 exceedances")



@pytest.mark.integration
class TestSweepAcceptance:
    """Desk-scale ensembles; minutes of runtime."""

    def test_polya_sums(self, tmp_path):
        cfg = SweepConfig(
            command="quad-sweep", alphas=[0.45], n_list=[32, 64, 128], trials=100,
            out_path=str(tmp_path / "polya.csv"), workers=4,
        )
        outcome = SweepRunner(cfg).run()
        assert outcome.exit_code == 0
        assert any(c.name.startswith("polya median ratio") for c in outcome.checks)

    def test_two_norm_below_quarter(self, tmp_path):
        cfg = SweepConfig(
            command="two-norm-sweep", alphas=[0.0, 0.15, 0.4], n_list=[16, 32, 64, 128, 256], trials=20,
            out_path=str(tmp_path / "two.csv"), workers=4,
        )
        outcome = SweepRunner(cfg).run()
        assert outcome.exit_code == 0, [c.line() for c in outcome.failed]
