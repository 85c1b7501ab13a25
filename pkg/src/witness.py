"""
Witness Module
Positional policies for epsilon-trees, their truncations and probabilities
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import networkx as nx

from src.semantics import FORMAT_TAG, BundleKind, StateSpace
from src.syntax import Prefix, print_term

log = logging.getLogger(__name__)

DEFAULT_DIAGRAM_DEPTH = 12
MAX_DIAGRAM_NODES = 400


class DecisionKind(Enum):
    STOP = "stop"
    TAKE_TAU = "tau"
    TAKE_RANDOM = "random"


@dataclass(frozen=True)
class Decision:
    kind: DecisionKind
    bundle_index: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is DecisionKind.STOP:
            return "stop"
        return f"{self.kind.value}:{self.bundle_index}"


STOP = Decision(DecisionKind.STOP)


class PurposeKind(Enum):
    ELL = "ell"
    Q = "q"
    DIVERGENCE = "divergence"


@dataclass(frozen=True)
class Purpose:
    """What the leaves of a witness tree must be able to do"""
    kind: PurposeKind
    action: Optional[Prefix] = None     # ELL: the action (tau included)
    q: Optional[Fraction] = None        # Q: weighted probability
    target_block: Optional[int] = None  # ELL / Q: block the leaf step lands in

    @staticmethod
    def ell(action: Prefix, target_block: int) -> "Purpose":
        return Purpose(PurposeKind.ELL, action=action, target_block=target_block)

    @staticmethod
    def q_jump(q: Fraction, target_block: int) -> "Purpose":
        return Purpose(PurposeKind.Q, q=Fraction(q), target_block=target_block)

    @staticmethod
    def divergence() -> "Purpose":
        return Purpose(PurposeKind.DIVERGENCE)

    def to_json(self) -> dict:
        data: Dict[str, object] = {"kind": self.kind.value}
        if self.action is not None:
            data["action"] = str(self.action)
        if self.q is not None:
            data["q"] = f"{self.q.numerator}/{self.q.denominator}"
        if self.target_block is not None:
            data["target_block"] = self.target_block
        return data


@dataclass
class WitnessPolicy:
    """
    Finite encoding of an epsilon-tree: one decision per state

    Every state reachable from root under decide lies in root's block; Stop
    states meet the purpose's leaf obligation (divergence policies never stop).
    """
    root: int
    decide: Dict[int, Decision]
    purpose: Optional[Purpose] = None

    def decision(self, state: int) -> Decision:
        return self.decide.get(state, STOP)

    def children(self, state: int, space: StateSpace) -> List[Tuple[Fraction, int]]:
        """Weighted children a state contributes to the tree"""
        decision = self.decision(state)
        if decision.kind is DecisionKind.STOP:
            return []
        bundle = space.bundles[state][decision.bundle_index]
        return list(bundle.branches)

    def reachable(self, space: StateSpace) -> List[int]:
        seen = {self.root}
        frontier = [self.root]
        while frontier:
            state = frontier.pop()
            for _, child in self.children(state, space):
                if child not in seen:
                    seen.add(child)
                    frontier.append(child)
        return sorted(seen)


@dataclass(frozen=True, eq=False)
class TreeNode:
    """
    Node of a truncated tree; children carry their incoming edge probability

    Identical (state, remaining depth) subtrees are shared, so a truncation is
    stored as a DAG even though it denotes a tree.
    """
    state: int
    children: Tuple[Tuple[Fraction, "TreeNode"], ...] = ()
    stopped: bool = False


@dataclass(frozen=True)
class TreeTruncation:
    root: TreeNode
    depth: int


def unroll(policy: WitnessPolicy, k: int, space: StateSpace) -> TreeTruncation:
    """
    Truncation of the policy's tree to height k

    Random decisions contribute every branch of the bundle as children, tau
    decisions exactly one child; Stop states become leaves at any height.
    """
    if k < 0:
        raise ValueError("depth must be non-negative")
    memo: Dict[Tuple[int, int], TreeNode] = {}

    def build(state: int, remaining: int) -> TreeNode:
        key = (state, remaining)
        if key in memo:
            return memo[key]
        decision = policy.decision(state)
        if decision.kind is DecisionKind.STOP:
            node = TreeNode(state, (), True)
        elif remaining == 0:
            node = TreeNode(state)
        else:
            node = TreeNode(state, tuple(
                (p, build(child, remaining - 1)) for p, child in policy.children(state, space)
            ))
        memo[key] = node
        return node

    return TreeTruncation(build(policy.root, k), k)


def tree_prob(t: TreeTruncation) -> Fraction:
    """Sum over maximal paths of the product of edge probabilities"""
    memo: Dict[int, Fraction] = {}

    def prob(node: TreeNode) -> Fraction:
        if id(node) not in memo:
            if not node.children:
                memo[id(node)] = Fraction(1)
            else:
                memo[id(node)] = sum((p * prob(child) for p, child in node.children), Fraction(0))
        return memo[id(node)]

    return prob(t.root)


def mass_curve(policy: WitnessPolicy, space: StateSpace, depth: int) -> List[Fraction]:
    """Probability of the finite branches of length <= k, for k = 0..depth"""
    curve: List[Fraction] = []
    stopped = Fraction(0)
    layer: Dict[int, Fraction] = {policy.root: Fraction(1)}
    for _ in range(depth + 1):
        following: Dict[int, Fraction] = {}
        for state, mass in sorted(layer.items()):
            if policy.decision(state).kind is DecisionKind.STOP:
                stopped += mass
                continue
            for p, child in policy.children(state, space):
                following[child] = following.get(child, Fraction(0)) + mass * p
        curve.append(stopped)
        layer = following
    return curve


def finite_mass(policy: WitnessPolicy, k: int, space: StateSpace) -> Fraction:
    """Total probability of branches that stop at height <= k"""
    if k < 0:
        raise ValueError("depth must be non-negative")
    return mass_curve(policy, space, k)[-1]


class TreeClass(Enum):
    REGULAR = "regular"
    DIVERGENT = "divergent"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Classification:
    kind: TreeClass
    depth: int
    mass: Fraction


def policy_graph(policy: WitnessPolicy, space: StateSpace) -> nx.DiGraph:
    """States reachable under the policy with an edge per tree edge"""
    graph = nx.DiGraph()
    for state in policy.reachable(space):
        graph.add_node(state, stop=policy.decision(state).kind is DecisionKind.STOP)
        for _, child in policy.children(state, space):
            graph.add_edge(state, child)
    return graph


def classify(policy: WitnessPolicy, space: StateSpace, m: int = 20, max_depth: int = 10_000) -> Classification:
    """
    Regular / divergent classification of a policy's tree

    Decided on the policy graph: regular iff every reachable state can reach a
    Stop state, divergent iff no Stop state is reachable. For regular trees the
    finite mass is reported at the first depth k with 1 - P^k < 2^-m.
    """
    if m < 1:
        raise ValueError("tolerance exponent must be at least 1")
    graph = policy_graph(policy, space)
    stops = {state for state, is_stop in graph.nodes(data="stop") if is_stop}
    if not stops:
        return Classification(TreeClass.DIVERGENT, 0, Fraction(0))

    can_stop = set(stops)
    for state in stops:
        can_stop |= nx.ancestors(graph, state)
    kind = TreeClass.REGULAR if can_stop >= set(graph.nodes) else TreeClass.INDETERMINATE

    tolerance = Fraction(1, 2 ** m)
    stopped = Fraction(0)
    layer: Dict[int, Fraction] = {policy.root: Fraction(1)}
    depth = 0
    while True:
        following: Dict[int, Fraction] = {}
        for state, mass in layer.items():
            if state in stops:
                stopped += mass
            else:
                for p, child in policy.children(state, space):
                    following[child] = following.get(child, Fraction(0)) + mass * p
        if kind is TreeClass.REGULAR and 1 - stopped < tolerance:
            break
        if depth >= max_depth or (kind is TreeClass.INDETERMINATE and depth >= 8 * m):
            break
        layer = following
        depth += 1
    log.debug(f"classified policy at {policy.root} as {kind.value} (depth {depth}, mass {stopped})")
    return Classification(kind, depth, stopped)


def validate_policy(policy: WitnessPolicy, space: StateSpace, partition) -> None:
    """
    Raise ValueError unless the policy encodes an epsilon-tree for its purpose

    Checks that reachable states stay in the root's block, that decisions use
    class-internal bundles of the right kind, and that every Stop state
    meets the leaf obligation of the purpose.
    """
    from src.equivalence import weighted_prob

    home = partition.block_of[policy.root]
    for state in policy.reachable(space):
        if partition.block_of[state] != home:
            raise ValueError(f"state {state} leaves the root's block")
        decision = policy.decision(state)
        if decision.kind is DecisionKind.STOP:
            if policy.purpose is None:
                continue
            if policy.purpose.kind is PurposeKind.DIVERGENCE:
                raise ValueError(f"divergence policy stops at {state}")
            if not _meets_obligation(state, policy.purpose, space, partition, weighted_prob):
                raise ValueError(f"leaf {state} cannot perform the required step")
            continue
        bundle = space.bundles[state][decision.bundle_index]
        expected = BundleKind.TAU if decision.kind is DecisionKind.TAKE_TAU else BundleKind.RANDOM
        if bundle.kind is not expected:
            raise ValueError(f"decision at {state} names a {bundle.kind.value} bundle")


def _meets_obligation(state, purpose: Purpose, space: StateSpace, partition, weighted_prob) -> bool:
    for bundle in space.bundles[state]:
        if purpose.kind is PurposeKind.ELL:
            if bundle.kind is BundleKind.RANDOM:
                continue
            action_matches = bundle.kind is BundleKind.TAU if purpose.action.is_tau else bundle.action == purpose.action
            if action_matches and partition.block_of[bundle.target] == purpose.target_block:
                return True
        elif bundle.kind is BundleKind.RANDOM:
            if weighted_prob(state, bundle, purpose.target_block, partition) == purpose.q:
                return True
    return False


def extract_witness(space: StateSpace, partition, state: int, purpose: Purpose) -> Optional[WitnessPolicy]:
    """Positional witness policy for an l-, q- or divergence query, None when none exists"""
    from src.equivalence import PartitionAnalysis

    analysis = PartitionAnalysis(space, partition)
    if purpose.kind is PurposeKind.ELL:
        return analysis.ell_witness(state, purpose.action, purpose.target_block)
    if purpose.kind is PurposeKind.Q:
        return analysis.q_witness(state, purpose.q, purpose.target_block)
    return analysis.divergence_witness(state)


# ===== Export =====

def policy_to_json(policy: WitnessPolicy) -> dict:
    return {
        "format": FORMAT_TAG,
        "root": policy.root,
        "decisions": [{"state": state, "action": str(decision)} for state, decision in sorted(policy.decide.items())],
        "purpose": policy.purpose.to_json() if policy.purpose else None,
    }


def to_dot(t: TreeTruncation, space: StateSpace) -> str:
    """
    Graphviz picture of a truncated epsilon-tree

    Edge labels are probabilities, leaves are double-circled, and a state
    that repeats one of its ancestors is drawn as an ellipsis.
    """
    lines = ["digraph epsilon_tree {", "    node [fontname=\"monospace\"];"]
    counter = [0]

    def emit(node: TreeNode, ancestors: Tuple[int, ...]) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        label = print_term(space.term(node.state)).replace('"', '\\"')
        if node.state in ancestors and node.children:
            lines.append(f'    {name} [label="... s{node.state}" shape=plaintext];')
            return name
        shape = "doublecircle" if node.stopped else "ellipse"
        lines.append(f'    {name} [label="s{node.state}: {label}" shape={shape}];')
        for p, child in node.children:
            if counter[0] >= MAX_DIAGRAM_NODES:
                lines.append(f"    // truncated at {MAX_DIAGRAM_NODES} nodes")
                break
            child_name = emit(child, ancestors + (node.state,))
            lines.append(f'    {name} -> {child_name} [label="{p}"];')
        return name

    emit(t.root, ())
    lines.append("}")
    return "\n".join(lines) + "\n"
