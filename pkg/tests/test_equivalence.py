"""
Unit Tests for the Equivalence Checker
"""
import unittest
from fractions import Fraction

from src.catalog import (E, EQUAL_PAIRS, H, OMEGA_A, OMEGA_HALF, OMEGA_HALF_A, nondeterministic_ring,
                         probabilistic_ring, ring_nodes, term)
from src.equivalence import (Move, Partition, PartitionAnalysis, Signature, as_reach, check_equal,
                             has_ell_transition, has_q_transition, internal_moves, partition_from_pairs, quotient,
                             refine, refinement_rounds, signature, spaces_equivalent, weighted_prob)
from src.errors import PreconditionViolated, SameBlockError
from src.metrics import RefinementTracker
from src.semantics import build_joint_state_space, build_state_space
from src.syntax import NIL, TAU, Par, action, parse, prefix
from src.witness import Decision, DecisionKind


class TestPartition(unittest.TestCase):
    """Test partition values"""

    def test_blocks_numbered_by_least_member(self):
        """Test canonical block order"""
        P = Partition.from_blocks([{3, 1}, {2}, {0}])
        self.assertEqual(P.block_of, (0, 1, 2, 1))
        self.assertEqual(P, Partition.from_keys(["x", "y", "z", "y"]))

    def test_refines(self):
        """Test the refinement order"""
        self.assertTrue(Partition.discrete(3).refines(Partition.universal(3)))
        self.assertFalse(Partition.universal(3).refines(Partition.discrete(3)))

    def test_invalid_blocks(self):
        """Test rejection of overlapping blocks"""
        with self.assertRaises(ValueError):
            Partition.from_blocks([{0, 1}, {1}])

    def test_from_pairs(self):
        """Test equivalence closure of pairs"""
        space = build_state_space(parse(OMEGA_A))
        P = partition_from_pairs(space, [(2, 1)])
        self.assertEqual(len(P), 2)
        self.assertTrue(P.same_block(1, 2))


class TestWeightedProbability(unittest.TestCase):
    """Test weighted probabilities and q-transitions"""

    def setUp(self):
        """Set up the half-probability example space"""
        self.space = build_state_space(parse(OMEGA_HALF_A))
        self.discrete = Partition.discrete(len(self.space))
        self.a = self.space.index_of(prefix("a"))
        self.bundle = self.space.bundles[self.space.root][0]

    def test_conditional_probability(self):
        """Test conditioning on leaving the own block"""
        self.assertEqual(weighted_prob(self.space.root, self.bundle, self.a, self.discrete), 1)

    def test_own_block(self):
        """Test rejection of the own block"""
        with self.assertRaises(SameBlockError):
            weighted_prob(self.space.root, self.bundle, self.space.root, self.discrete)

    def test_undefined(self):
        """Test a firing that never leaves the block"""
        space = build_joint_state_space([parse(OMEGA_HALF), NIL])
        P = Partition.discrete(len(space))
        self.assertIsNone(weighted_prob(0, space.bundles[0][0], 1, P))

    def test_q_transition(self):
        """Test a zero-depth q-transition"""
        self.assertTrue(has_q_transition(self.space.root, Fraction(1), self.a, self.discrete, self.space))
        self.assertFalse(has_q_transition(self.space.root, Fraction(1, 2), self.a, self.discrete, self.space))

    def test_probabilistic_ring(self):
        """Test that only the top node reaches a1 with probability 1/2"""
        ring = parse(probabilistic_ring(3))
        space = build_state_space(ring)
        P = Partition.discrete(len(space))
        top, _, bottom = [space.index_of(node) for node in ring_nodes(ring, 3)]
        a1 = space.index_of(prefix("a1"))
        self.assertTrue(has_q_transition(top, Fraction(1, 2), a1, P, space))
        self.assertFalse(has_q_transition(bottom, Fraction(1, 2), a1, P, space))


class TestTransitions(unittest.TestCase):
    """Test l-transitions, reachability and divergence"""

    def test_as_reach_zero_depth(self):
        """Test that a good state reaches itself"""
        space = build_state_space(parse(OMEGA_A))
        found, policy = as_reach(space.root, Partition.universal(len(space)), [space.root], space)
        self.assertTrue(found)
        self.assertEqual(policy.decision(space.root).kind.value, "stop")

    def test_ell_transition_through_tau(self):
        """Test a visible action after internal steps"""
        space = build_state_space(parse("tau.a"))
        P = Partition.universal(len(space))
        self.assertTrue(has_ell_transition(space.root, action("a"), 0, P, space))
        self.assertFalse(has_ell_transition(space.root, action("b"), 0, P, space))

    def test_tau_into_own_block(self):
        """Test the vacuous tau query"""
        space = build_state_space(parse("tau.a"))
        with self.assertRaises(PreconditionViolated):
            has_ell_transition(space.root, TAU, 0, Partition.universal(len(space)), space)

    def test_divergence(self):
        """Test divergent epsilon-trees"""
        for text, expected in ((OMEGA_A, True), (OMEGA_HALF, True), (OMEGA_HALF_A, False), ("a", False)):
            space = build_state_space(parse(text))
            analysis = PartitionAnalysis(space, refine(space))
            self.assertEqual(analysis.has_divergent_tree(space.root), expected, text)

    def test_signature_of_zero(self):
        """Test that 0 has an empty signature"""
        space = build_state_space(NIL)
        self.assertEqual(signature(0, Partition.universal(1), space), Signature())

    def test_internal_moves(self):
        """Test the class-internal firings of the random examples"""
        loop = build_state_space(parse(OMEGA_HALF))
        self.assertEqual(internal_moves(loop.root, Partition.discrete(len(loop)), loop),
                         [Move(Decision(DecisionKind.TAKE_RANDOM, 0), frozenset({loop.root}))])

        space = build_state_space(parse(OMEGA_HALF_A))
        a_state = space.bundles[space.root][0].targets[0]
        self.assertEqual(internal_moves(space.root, Partition.discrete(len(space)), space), [])
        merged = partition_from_pairs(space, [(space.root, a_state)])
        self.assertEqual(internal_moves(space.root, merged, space),
                         [Move(Decision(DecisionKind.TAKE_RANDOM, 0), frozenset({space.root, a_state}))])
        self.assertEqual(internal_moves(a_state, merged, space), [])


class TestRefinement(unittest.TestCase):
    """Test partition refinement and equality checks"""

    def test_equal_pairs(self):
        """Test the equalities of the worked examples"""
        for left, right in EQUAL_PAIRS:
            self.assertTrue(check_equal(term(left), term(right)).equal, f"{left} vs {right}")

    def test_divergence_distinguishes(self):
        """Test a divergent process against a convergent one"""
        result = check_equal(parse(OMEGA_A), parse(OMEGA_HALF_A))
        self.assertFalse(result.equal)
        self.assertEqual(result.evidence.kind, "divergence")
        self.assertEqual(result.evidence.present_for, "first")

    def test_divergence_evidence_second(self):
        """Test that divergence evidence names the divergent side"""
        result = check_equal(parse(OMEGA_HALF_A), parse(OMEGA_A))
        self.assertEqual(result.evidence.kind, "divergence")
        self.assertEqual(result.evidence.present_for, "second")

    def test_visible_difference(self):
        """Test evidence for different actions"""
        result = check_equal(parse("a"), parse("b"))
        self.assertFalse(result.equal)
        self.assertEqual(result.evidence.kind, "visible")

    def test_symmetric(self):
        """Test that the verdict does not depend on argument order"""
        self.assertEqual(check_equal(parse(H), parse(E)).equal, check_equal(parse(E), parse(H)).equal)

    def test_omega_a_space(self):
        """Test that no two states of the divergent example are equal"""
        space = build_state_space(parse(OMEGA_A))
        self.assertEqual(len(refine(space)), 3)

    def test_rounds_refine(self):
        """Test that every round refines the previous one"""
        space = build_joint_state_space([parse(H), parse(E)])
        rounds = refinement_rounds(space)
        self.assertEqual(rounds[0], Partition.universal(len(space)))
        for before, after in zip(rounds, rounds[1:]):
            self.assertTrue(after.refines(before))
            self.assertGreater(len(after), len(before))

    def test_tracker(self):
        """Test round tracking"""
        tracker = RefinementTracker()
        space = build_state_space(parse(OMEGA_A))
        refine(space, tracker)
        stats = tracker.create_stats("omega_a", len(space))
        self.assertEqual(stats.block_counts[0], 1)
        self.assertEqual(stats.final_blocks, 3)

    def test_rings(self):
        """Test the probabilistic and the nondeterministic ring"""
        for source, separate in ((probabilistic_ring(3), True), (nondeterministic_ring(3), False)):
            ring = parse(source)
            space = build_state_space(ring)
            P = refine(space)
            blocks = {P.block_of[space.index_of(node)] for node in ring_nodes(ring, 3)}
            self.assertEqual(len(blocks), 3 if separate else 1, source)

    def test_parallel_context(self):
        """Test that equality survives composition"""
        self.assertTrue(check_equal(Par(parse(OMEGA_HALF_A), prefix("b")), Par(prefix("a"), prefix("b"))).equal)

    def test_json(self):
        """Test the result document"""
        document = check_equal(parse("a"), parse("b")).to_json()
        self.assertFalse(document["equal"])
        self.assertEqual(document["evidence"]["kind"], "visible")


class TestQuotient(unittest.TestCase):
    """Test minimization"""

    def test_quotient_equivalent(self):
        """Test that a quotient keeps the behaviour of its roots"""
        space = build_joint_state_space([parse(H), parse(E)])
        P = refine(space)
        minimal = quotient(space, P)
        self.assertEqual(len(minimal), len(P))
        self.assertEqual(minimal.roots[0], minimal.roots[1])
        self.assertTrue(spaces_equivalent(build_state_space(parse(H)), minimal))

    def test_quotient_of_random_space(self):
        """Test minimization of a probabilistic ring"""
        space = build_state_space(parse(probabilistic_ring(2)))
        minimal = quotient(space, refine(space))
        self.assertTrue(spaces_equivalent(space, minimal))


def run_tests():
    """Run all tests"""
    unittest.main()


if __name__ == '__main__':
    run_tests()
