"""
Quick Demo Script
Walks through the worked examples: equalities, inequalities, witnesses and rings
"""

from src.catalog import (EQUAL_PAIRS, OMEGA_A, OMEGA_HALF_A, nondeterministic_ring, probabilistic_ring,
                         ring_nodes, term)
from src.equivalence import check_equal, refine
from src.metrics import StatsComparator
from src.semantics import build_joint_state_space, build_state_space
from src.syntax import action, parse
from src.witness import Purpose, extract_witness, finite_mass


def quick_demo():
    """Quick demonstration of the equivalence checker"""
    print("=" * 80)
    print(" " * 28 + "RCCS WORKBENCH QUICK DEMO")
    print("=" * 80)
    print()

    comparator = StatsComparator()

    # Equalities from the worked examples
    print("Step 1: Equalities...")
    for left, right in EQUAL_PAIRS:
        result = check_equal(term(left), term(right))
        comparator.add_stats(result.stats)
        mark = '✓' if result.equal else '✗'
        print(f"  {mark} {left} = {right}")

    # A divergent process against a convergent one
    print("\nStep 2: Omega_a vs Omega_(1/2)a...")
    result = check_equal(parse(OMEGA_A), parse(OMEGA_HALF_A))
    comparator.add_stats(result.stats)
    print(f"  equal: {result.equal}")
    if result.evidence:
        print(f"  evidence: {result.evidence}")

    # Regular witness tree and its finite mass
    print("\nStep 3: Witness for Omega_(1/2)a doing a...")
    space = build_joint_state_space([parse(OMEGA_HALF_A), parse("0")])
    partition = refine(space)
    policy = extract_witness(space, partition, space.root,
                             Purpose.ell(action("a"), partition.block_of[space.roots[1]]))
    for k in (1, 2, 5, 10):
        print(f"  P^{k} = {finite_mass(policy, k, space)}")

    # Rings
    print("\nStep 4: Rings of size 3...")
    for name, source in (("probabilistic", probabilistic_ring(3)), ("nondeterministic", nondeterministic_ring(3))):
        ring = parse(source)
        nodes = ring_nodes(ring, 3)
        space = build_state_space(ring)
        partition = refine(space)
        blocks = {partition.block_of[space.index_of(node)] for node in nodes}
        print(f"  {name}: {len(nodes)} nodes in {len(blocks)} block(s)")

    print("\n" + comparator.get_comparison_table())
    print("\n" + "=" * 80)
    print("Demo complete. Try: python main.py check -e TERM -e TERM")
    print("=" * 80)


if __name__ == "__main__":
    quick_demo()
