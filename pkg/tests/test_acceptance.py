"""
Reproduction checks on the shipped scenarios.

The reference comparison always runs at 500 trajectory samples; the
full-resolution runs, ridge maps and timing need TABS_RUN_ACCEPTANCE=1.
"""

import os
import tempfile
import time
import unittest
from pathlib import Path

import numpy as np

from core.aperture import ApertureConfig
from core.baselines import TrackingPolicy, tracking_run
from core.metrics import multipoint_sweep, reliability_sweep
from core.phase_design import design_numeric
from core.trajectory import ParabolicTrajectory
from simulation.runner import RunSettings, ScenarioRunner
from simulation.scenario import load_scenario
from utils import config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def make_runner(name, tmp, samples=2000):
    settings = RunSettings(output_dir=Path(tmp), threads=os.cpu_count() or 1, samples=samples)
    return ScenarioRunner(load_scenario(SCENARIOS / f"{name}.json"), settings)


@unittest.skipUnless(config.acceptance_enabled(), "set TABS_RUN_ACCEPTANCE=1 to run")
class TestCausticTracking(unittest.TestCase):
    def check_ridge(self, name):
        with tempfile.TemporaryDirectory() as tmp:
            summary = make_runner(name, tmp).fieldmap()
        self.assertEqual((summary["nx"], summary["nz"]), (800, 800))
        self.assertLessEqual(summary["ridge_rms"], 2.0)

    def test_circular_ridge(self):
        self.check_ridge("circular_r80")

    def test_parabolic_ridge(self):
        self.check_ridge("parabolic_a1e-4")


class ReferenceChecks:
    """Reliability, multi-point and switching checks on the reference scenario."""

    samples = 2000

    @classmethod
    def setUpClass(cls):
        cls._tmp = tempfile.TemporaryDirectory()
        cls.runner = make_runner("reference_parabolic_n1001", cls._tmp.name, cls.samples)
        cls.tabs = cls.runner.weights_for("tabs")
        cls.focus = cls.runner.weights_for("focus")

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def sweep(self, weights, gammas):
        return reliability_sweep(weights, self.runner.cfg, self.runner.traj, gammas, count=self.samples).values

    def test_reliability_levels(self):
        gammas = [0.001, 0.0015, 0.005, 0.01]
        tabs, focus = self.sweep(self.tabs, gammas), self.sweep(self.focus, gammas)
        self.assertTrue(np.all(tabs[:2] >= 0.95))
        self.assertTrue(np.all(focus[:2] >= 0.95))
        self.assertGreaterEqual(tabs[2], 0.90)
        self.assertTrue(0.08 <= focus[2] <= 0.35)
        self.assertLessEqual(tabs[3], 0.10)
        self.assertLessEqual(focus[3], 0.10)

    def test_multipoint_trend(self):
        result = multipoint_sweep(self.tabs, self.runner.cfg, self.runner.traj, 0.007, 10, self.samples)
        values = result.multipoint
        self.assertGreater(values[4], values[0])
        self.assertLess(np.min(values[5:]), np.max(values[:5]))
        self.assertTrue(np.all(result.reference >= values))

    def test_tracking_switches(self):
        policy = TrackingPolicy(0.005, self.samples)
        cfg, traj = self.runner.cfg, self.runner.traj
        self.assertGreaterEqual(tracking_run(traj, cfg, policy, initial_weights=self.focus).switch_count, 1)
        self.assertEqual(tracking_run(traj, cfg, policy, initial_weights=self.tabs).switch_count, 0)


class TestReferenceScenarioReduced(ReferenceChecks, unittest.TestCase):
    samples = 500


@unittest.skipUnless(config.acceptance_enabled(), "set TABS_RUN_ACCEPTANCE=1 to run")
class TestReferenceScenario(ReferenceChecks, unittest.TestCase):
    samples = 2000


@unittest.skipUnless(config.acceptance_enabled(), "set TABS_RUN_ACCEPTANCE=1 to run")
class TestDesignScaling(unittest.TestCase):
    def test_design_time_is_linear_in_elements(self):
        traj = ParabolicTrajectory(z_start=100.0, z_end=1000.0, alpha=2.5e-4, apex_x=250.0)
        sizes = np.array([251, 501, 1001])
        times = []
        for n in sizes:
            cfg = ApertureConfig(num_elements=int(n))
            best = np.inf
            for _ in range(3):
                started = time.perf_counter()
                design_numeric(traj, cfg).weights()
                best = min(best, time.perf_counter() - started)
            times.append(best)
        times = np.array(times)
        slope, intercept = np.polyfit(sizes, times, 1)
        fitted = np.maximum(slope * sizes + intercept, 1e-9)
        ratio = times / fitted
        self.assertTrue(np.all((ratio >= 0.5) & (ratio <= 2.0)), msg=f"times={times}, fit={fitted}")


if __name__ == "__main__":
    unittest.main()
