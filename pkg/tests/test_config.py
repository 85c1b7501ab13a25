"""
Unit Tests for Configuration, Metrics and Charts
"""
import argparse
import os
import tempfile
import unittest
from fractions import Fraction

from src.config import ORACLE_HARD_CAP, RunConfig
from src.dashboard import plot_mass_curve, plot_refinement
from src.errors import ConfigError
from src.metrics import RefinementStats, RefinementTracker, StatsComparator


class TestRunConfig(unittest.TestCase):
    """Test run settings"""

    def test_defaults(self):
        """Test default values"""
        config = RunConfig().validate()
        self.assertEqual(config.state_bound, 10_000)
        self.assertEqual(config.oracle_bound, 8)
        self.assertEqual(config.output_format, "text")

    def test_invalid(self):
        """Test rejection of invalid settings"""
        for config in (RunConfig(state_bound=0), RunConfig(oracle_bound=ORACLE_HARD_CAP + 1),
                       RunConfig(output_format="xml"), RunConfig(workers=0), RunConfig(depth=-1)):
            with self.assertRaises(ConfigError):
                config.validate()

    def test_from_args(self):
        """Test building settings from parsed flags"""
        args = argparse.Namespace(bound=50, format="json", seed=0, depth=0)
        config = RunConfig.from_args(args)
        self.assertEqual(config.state_bound, 50)
        self.assertEqual(config.output_format, "json")
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.depth, 0)
        self.assertEqual(config.proptest_cases, 200)
        self.assertEqual(config.to_dict()["state_bound"], 50)


class TestMetrics(unittest.TestCase):
    """Test refinement tracking"""

    def setUp(self):
        """Set up a tracker with two rounds"""
        self.tracker = RefinementTracker()
        self.tracker.start_tracking()
        self.tracker.record_round(2, 4)
        self.tracker.record_round(2, 4)

    def test_stats(self):
        """Test the collected numbers"""
        stats = self.tracker.create_stats("pair", 4)
        self.assertEqual(stats.iterations, 2)
        self.assertEqual(stats.block_counts, [1, 2, 2])
        self.assertEqual(stats.final_blocks, 2)
        self.assertEqual(stats.signature_evaluations, 8)
        self.assertNotIn("time", str(stats))
        self.assertNotIn("execution_time_ms", stats.to_dict())

    def test_comparator(self):
        """Test the comparison table"""
        comparator = StatsComparator()
        self.assertEqual(comparator.get_comparison_table(), "No refinements to compare")
        comparator.add_stats(self.tracker.create_stats("small", 4))
        comparator.add_stats(RefinementStats("large", states=9, block_counts=[1, 3]))
        self.assertIn("small", comparator.get_comparison_table())
        self.assertEqual(comparator.get_largest().label, "large")
        comparator.clear()
        self.assertIsNone(comparator.get_largest())


class TestDashboard(unittest.TestCase):
    """Test chart output"""

    def test_charts(self):
        """Test that both charts are written"""
        with tempfile.TemporaryDirectory() as tmp:
            curve_path = os.path.join(tmp, "charts", "mass.png")
            masses = [1 - Fraction(1, 2 ** k) for k in range(8)]
            self.assertEqual(plot_mass_curve({"ell": masses}, curve_path), curve_path)
            self.assertTrue(os.path.exists(curve_path))

            stats = [RefinementStats("pair", states=5, iterations=2, block_counts=[1, 2, 2])]
            refinement_path = os.path.join(tmp, "refinement.png")
            plot_refinement(stats, refinement_path)
            self.assertTrue(os.path.exists(refinement_path))

    def test_empty(self):
        """Test rejection of empty input"""
        with self.assertRaises(ValueError):
            plot_mass_curve({}, "unused.png")


def run_tests():
    """Run all tests"""
    unittest.main()


if __name__ == '__main__':
    run_tests()
