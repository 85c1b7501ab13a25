"""
Unit Tests for the Command-Line Front End
"""
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from main import main
from src.catalog import E, H, OMEGA_A, OMEGA_HALF_A
from src.cli import (EXIT_BOUND, EXIT_INPUT, EXIT_OK, EXIT_QUERY, EXIT_UNEQUAL, cmd_check, cmd_diverge, cmd_lts,
                     cmd_minimize, cmd_witness, collect_terms)
from src.config import RunConfig
from src.syntax import NIL, parse


def run_main(*argv):
    """Run the entry point and capture both streams"""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestCheck(unittest.TestCase):
    """Test the check command"""

    def test_equal(self):
        """Test an equal pair"""
        code, report = cmd_check(parse(H), parse(E), RunConfig())
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Verdict: EQUAL", report)

    def test_not_equal(self):
        """Test an unequal pair with evidence"""
        code, report = cmd_check(parse(OMEGA_A), parse(OMEGA_HALF_A), RunConfig())
        self.assertEqual(code, EXIT_UNEQUAL)
        self.assertIn("Verdict: NOT EQUAL", report)
        self.assertIn("Evidence: divergence", report)

    def test_json_deterministic(self):
        """Test that two runs print the same document"""
        config = RunConfig(output_format="json")
        first = cmd_check(parse(H), parse(E), config)
        second = cmd_check(parse(H), parse(E), config)
        self.assertEqual(first, second)
        self.assertTrue(json.loads(first[1])["equal"])

    def test_ccs_checker(self):
        """Test the classical checker flag"""
        code, report = cmd_check(parse("tau.tau.a"), parse("tau.a"), RunConfig(), ccs=True)
        self.assertEqual(code, EXIT_OK)
        code, report = cmd_check(parse(OMEGA_HALF_A), parse("a"), RunConfig(), ccs=True)
        self.assertEqual(code, EXIT_INPUT)

    def test_bound(self):
        """Test the bound exit code"""
        code, report = cmd_check(parse("mu X. a.(X | X)"), NIL, RunConfig(state_bound=10))
        self.assertEqual(code, EXIT_BOUND)
        self.assertTrue(report.startswith("error:"))

    def test_syntax_error(self):
        """Test the input exit code"""
        code, out, err = run_main("check", "-e", "a +", "-e", "0")
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("syntax error", err)
        self.assertEqual(out, "")

    def test_wrong_term_count(self):
        """Test a check with one term"""
        code, _, _ = run_main("check", "-e", "a")
        self.assertEqual(code, EXIT_QUERY)

    def test_files(self):
        """Test reading terms from files after inline terms"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "e.rccs")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(E + "\n")
            terms = collect_terms([path], [H])
            self.assertEqual(terms, [parse(H), parse(E)])
            code, out, _ = run_main("check", path, "-e", H)
            self.assertEqual(code, EXIT_OK)

    def test_missing_file(self):
        """Test an unreadable input file"""
        code, _, _ = run_main("lts", "/nonexistent/term.rccs")
        self.assertEqual(code, EXIT_INPUT)


class TestOtherCommands(unittest.TestCase):
    """Test lts, minimize, witness and diverge"""

    def test_lts_json(self):
        """Test the state-space document"""
        code, report = cmd_lts(parse(OMEGA_A), RunConfig(output_format="json"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(json.loads(report)["states"]), 3)

    def test_lts_dot(self):
        """Test the Graphviz output"""
        code, out, _ = run_main("lts", "-e", OMEGA_HALF_A, "--format", "dot")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith("digraph"))

    def test_minimize(self):
        """Test that two equal terms share a block"""
        code, report = cmd_minimize([parse(H), parse(E)], RunConfig())
        self.assertEqual(code, EXIT_OK)
        self.assertIn("States: 5 -> 2", report)
        self.assertIn("Root blocks: 1", report)
        self.assertIn("Quotient verified: yes", report)

    def test_witness(self):
        """Test a label query"""
        code, report = cmd_witness(parse(OMEGA_HALF_A), RunConfig(), label="a", target=NIL)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Tree: regular", report)

    def test_witness_json(self):
        """Test the policy document through the entry point"""
        code, out, _ = run_main("witness", "-e", OMEGA_HALF_A, "--label", "a", "--target", "0", "--format", "json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["purpose"]["action"], "a")

    def test_no_witness(self):
        """Test a label the term never shows"""
        code, report = cmd_witness(parse(OMEGA_A), RunConfig(), label="b", target=NIL)
        self.assertEqual(code, EXIT_UNEQUAL)
        self.assertIn("no witness", report)

    def test_bad_queries(self):
        """Test the query exit code"""
        code, _ = cmd_witness(parse(OMEGA_A), RunConfig(), label="Foo", target=NIL)
        self.assertEqual(code, EXIT_QUERY)
        code, _ = cmd_witness(parse(OMEGA_A), RunConfig(), label="a", divergence=True)
        self.assertEqual(code, EXIT_QUERY)
        code, _ = cmd_witness(parse(OMEGA_A), RunConfig(), label="a")
        self.assertEqual(code, EXIT_QUERY)
        code, _ = cmd_witness(parse(OMEGA_A), RunConfig(), q="3/2", target=NIL)
        self.assertEqual(code, EXIT_QUERY)

    def test_divergence_witness(self):
        """Test a divergence query"""
        code, report = cmd_witness(parse(OMEGA_A), RunConfig(), divergence=True)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Tree: divergent", report)

    def test_diverge(self):
        """Test the divergence verdicts"""
        self.assertIn("divergent ε-tree exists", cmd_diverge(parse(OMEGA_A), RunConfig())[1])
        self.assertIn("no divergent ε-tree", cmd_diverge(parse("a"), RunConfig())[1])

    def test_proptest(self):
        """Test a short property run through the entry point"""
        code, out, _ = run_main("proptest", "--seed", "1", "--cases", "2")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("ALL PASS", out)

    def test_bad_config(self):
        """Test an oracle bound above the hard cap"""
        code, _, err = run_main("lts", "-e", "a", "--oracle-bound", "12")
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("oracle bound", err)


def run_tests():
    """Run all tests"""
    unittest.main()


if __name__ == '__main__':
    run_tests()
