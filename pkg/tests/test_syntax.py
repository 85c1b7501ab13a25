"""
Unit Tests for Term Syntax
"""
import unittest
from fractions import Fraction

from src.catalog import OMEGA_A, OMEGA_HALF
from src.errors import IllFormedError, IllFormedReason, RccsSyntaxError
from src.generator import TermGenerator
from src.syntax import (NIL, TAU, Choice, Fix, Par, Polarity, Prefix, RandomChoice, Restrict, Var, action,
                        alpha_normalize, choice, free_vars, is_ccs, is_finite_state, is_process, par, parse,
                        prefix, print_term, rand, substitute, tau, unfold, zero)


class TestParser(unittest.TestCase):
    """Test parsing and well-formedness"""

    def test_zero(self):
        """Test the empty sum"""
        self.assertEqual(parse("0"), NIL)
        self.assertEqual(parse("0"), Choice(()))

    def test_omega_a(self):
        """Test a recursive sum"""
        expected = Fix("X", Choice(((TAU, prefix("a")), (TAU, Var("X")))))
        self.assertEqual(parse("mu X. (tau.a.0 + tau.X)"), expected)

    def test_trailing_zero_optional(self):
        """Test that a means a.0"""
        self.assertEqual(parse("a"), parse("a.0"))
        self.assertEqual(parse("'a"), Choice(((Prefix(Polarity.OUTPUT, "a"), NIL),)))

    def test_random_choice(self):
        """Test a random choice"""
        t = parse("(1/3)tau.a (+) (2/3)tau.b")
        self.assertIsInstance(t, RandomChoice)
        self.assertEqual([p for p, _ in t.branches], [Fraction(1, 3), Fraction(2, 3)])

    def test_restriction_and_parallel(self):
        """Test localization over a composition"""
        t = parse("(new b)('b.0 | (a.0 + b.0))")
        self.assertIsInstance(t, Restrict)
        self.assertEqual(t.channel, "b")
        self.assertIsInstance(t.body, Par)

    def test_parallel_left_associative(self):
        """Test that | groups to the left"""
        self.assertEqual(parse("a | b | c"), Par(Par(prefix("a"), prefix("b")), prefix("c")))

    def test_probability_sum(self):
        """Test rejection of probabilities not summing to one"""
        with self.assertRaises(IllFormedError) as ctx:
            parse("(1/2)tau.a.0 (+) (1/3)tau.b.0")
        self.assertEqual(ctx.exception.reason, IllFormedReason.PROB_SUM_NOT_ONE)

    def test_probability_range(self):
        """Test rejection of a zero probability"""
        with self.assertRaises(IllFormedError) as ctx:
            parse("(0/1)tau.a (+) (1/1)tau.b")
        self.assertEqual(ctx.exception.reason, IllFormedReason.PROB_OUT_OF_RANGE)

    def test_singleton_random_choice(self):
        """Test rejection of a one-branch random choice"""
        with self.assertRaises(IllFormedError) as ctx:
            parse("(1/2)tau.a")
        self.assertEqual(ctx.exception.reason, IllFormedReason.SINGLETON_RANDOM_CHOICE)

    def test_unguarded_variable(self):
        """Test rejection of unguarded recursion"""
        for text in ("mu X. X", "mu X. (X | a)"):
            with self.assertRaises(IllFormedError) as ctx:
                parse(text)
            self.assertEqual(ctx.exception.reason, IllFormedReason.UNGUARDED_VARIABLE)

    def test_random_branch_guards(self):
        """Test that a random branch guards a variable"""
        self.assertIsInstance(parse(OMEGA_HALF), Fix)

    def test_syntax_error(self):
        """Test that malformed text reports a position"""
        with self.assertRaises(RccsSyntaxError) as ctx:
            parse("a +")
        self.assertIsInstance(ctx.exception.position, int)


class TestPrinter(unittest.TestCase):
    """Test canonical printing"""

    def test_zero(self):
        """Test printing 0"""
        self.assertEqual(print_term(NIL), "0")

    def test_omega_half(self):
        """Test printing a random fixpoint"""
        self.assertEqual(print_term(parse(OMEGA_HALF)), "mu X. ((1/2)tau.X (+) (1/2)tau.X)")

    def test_round_trip_examples(self):
        """Test parse after print on hand-written terms"""
        for text in (OMEGA_A, OMEGA_HALF, "(new b)('b.0 | (a.0 + b.0))", "a | (b | c)",
                     "tau.((1/4)tau.a (+) (3/4)tau.0)", "(a + b) | 'a"):
            t = parse(text)
            self.assertEqual(parse(print_term(t)), t)

    def test_round_trip_generated(self):
        """Test parse after print on generated terms"""
        generator = TermGenerator(3)
        for _ in range(1000):
            t = generator.process()
            self.assertEqual(parse(print_term(t)), t)


class TestBinders(unittest.TestCase):
    """Test free names, substitution and alpha normalization"""

    def setUp(self):
        """Set up the divergent example process"""
        self.omega_a = parse(OMEGA_A)

    def test_free_vars(self):
        """Test free variable sets"""
        self.assertEqual(free_vars(Var("X")), frozenset({"X"}))
        self.assertEqual(free_vars(self.omega_a), frozenset())
        self.assertEqual(free_vars(Par(Var("X"), Fix("X", prefix("a", Var("X"))))), frozenset({"X"}))

    def test_substitute_variable(self):
        """Test replacing a bare variable"""
        self.assertEqual(substitute(Var("X"), "X", NIL), NIL)

    def test_substitute_unfolds(self):
        """Test one-step unfolding"""
        expected = Choice(((TAU, prefix("a")), (TAU, self.omega_a)))
        self.assertEqual(substitute(self.omega_a.body, "X", self.omega_a), expected)
        self.assertEqual(unfold(self.omega_a), expected)

    def test_substitute_bound(self):
        """Test that bound occurrences are untouched"""
        t = Fix("X", prefix("a", Var("X")))
        self.assertEqual(substitute(t, "X", prefix("b")), t)

    def test_substitute_avoids_variable_capture(self):
        """Test renaming of a capturing fixpoint"""
        t = Fix("Y", prefix("a", Var("X")))
        self.assertEqual(substitute(t, "X", Var("Y")), Fix("Y_1", prefix("a", Var("Y"))))

    def test_substitute_avoids_channel_capture(self):
        """Test renaming of a capturing restriction"""
        t = Restrict("a", prefix("a", Var("X")))
        result = substitute(t, "X", prefix("a"))
        self.assertEqual(result, Restrict("a_1", prefix("a_1", prefix("a"))))

    def test_alpha_normalize_variables(self):
        """Test canonical variable names"""
        self.assertEqual(alpha_normalize(Fix("Y", prefix("a", Var("Y")))), Fix("X0", prefix("a", Var("X0"))))

    def test_alpha_normalize_channels(self):
        """Test canonical channel names"""
        t = Restrict("b", prefix(action("'b")))
        self.assertEqual(alpha_normalize(t), Restrict("c0", prefix(action("'c0"))))

    def test_alpha_normalize_idempotent(self):
        """Test idempotence on generated terms"""
        generator = TermGenerator(11)
        for _ in range(1000):
            once = alpha_normalize(generator.process())
            self.assertEqual(alpha_normalize(once), once)

    def test_alpha_equivalent_terms(self):
        """Test that renamed binders normalize identically"""
        first = parse("mu Y. (new d)('d | tau.Y)")
        second = parse("mu Z. (new e)('e | tau.Z)")
        self.assertEqual(alpha_normalize(first), alpha_normalize(second))

    def test_fragments(self):
        """Test CCS and finite-state classification"""
        self.assertTrue(is_ccs(self.omega_a))
        self.assertFalse(is_ccs(parse(OMEGA_HALF)))
        self.assertTrue(is_finite_state(self.omega_a))
        self.assertFalse(is_finite_state(parse("a | b")))

    def test_is_process(self):
        """Test closedness"""
        self.assertTrue(is_process(self.omega_a))
        self.assertFalse(is_process(Var("X")))
        self.assertFalse(is_process(prefix("a", Var("X"))))


class TestConstructors(unittest.TestCase):
    """Test building terms without the parser"""

    def test_zero_and_prefixes(self):
        """Test inaction, prefixes and sums"""
        self.assertEqual(zero(), NIL)
        self.assertEqual(tau(prefix("a")), parse("tau.a"))
        self.assertEqual(choice(prefix("a"), prefix("'b")), parse("a + 'b"))

    def test_rand(self):
        """Test a random choice from string probabilities"""
        self.assertEqual(rand(("1/3", prefix("a")), ("2/3", prefix("b"))), parse("(1/3)tau.a (+) (2/3)tau.b"))

    def test_par(self):
        """Test left-nested composition"""
        self.assertEqual(par(prefix("a"), prefix("b"), prefix("c")), parse("a | b | c"))
        self.assertEqual(par(prefix("a")), prefix("a"))


def run_tests():
    """Run all tests"""
    unittest.main()


if __name__ == '__main__':
    run_tests()
