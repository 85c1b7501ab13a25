"""
Oracle Module
Brute-force ground truth: definitional bisimulation checks over all partitions
of a small state space, and the classical CCS branching-bisimilarity checker
"""
import hashlib
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Set, Tuple, Union

import networkx as nx

from src.equivalence import Partition, PartitionAnalysis, weighted_prob
from src.errors import OracleBoundExceeded, RandomTermInCCSOracle
from src.semantics import (DEFAULT_STATE_BOUND, FORMAT_TAG, BundleKind, StateSpace,
                           build_joint_state_space, to_json)
from src.syntax import TAU, Prefix, Term, is_ccs, print_term

log = logging.getLogger(__name__)

DEFAULT_ORACLE_BOUND = 8


# ===== Partition enumeration =====

def partitions(n: int) -> Iterator[Tuple[int, ...]]:
    """
    All set partitions of 0..n-1 as restricted-growth strings

    A string a has a[0] = 0 and a[i] <= 1 + max(a[:i]); a[i] is the block of i.
    """
    if n == 0:
        yield ()
        return
    rgs = [0] * n

    def extend(i: int, highest: int) -> Iterator[Tuple[int, ...]]:
        if i == n:
            yield tuple(rgs)
            return
        for block in range(highest + 2):
            rgs[i] = block
            yield from extend(i + 1, max(highest, block))

    yield from extend(1, 0)


def join(p1: Partition, p2: Partition) -> Partition:
    """Equivalence closure of the union of two partitions"""
    if len(p1.block_of) != len(p2.block_of):
        raise ValueError("partitions of different state sets")
    graph = nx.Graph()
    graph.add_nodes_from(range(len(p1.block_of)))
    for P in (p1, p2):
        for block in P.blocks:
            members = sorted(block)
            graph.add_edges_from((members[0], other) for other in members[1:])
    return Partition.from_blocks(nx.connected_components(graph))


# ===== Definitional check =====

def _check_size(space: StateSpace, bound: int) -> None:
    if len(space) > bound:
        raise OracleBoundExceeded(bound)


def _actions(space: StateSpace) -> List[Prefix]:
    seen: Dict[Prefix, None] = {}
    for state_bundles in space.bundles:
        for bundle in state_bundles:
            if bundle.kind is BundleKind.VISIBLE:
                seen.setdefault(bundle.action, None)
    return sorted(seen, key=str)


def is_branching_bisim(P: Partition, space: StateSpace, bound: int = DEFAULT_ORACLE_BOUND) -> bool:
    """
    Whether P is a codivergent branching bisimulation

    Every pair in every block is checked against the transfer clauses for
    every action and target block, the q-clause for every weighted
    probability a random bundle of the block realizes, and codivergence.
    """
    _check_size(space, bound)
    analysis = PartitionAnalysis(space, P)
    actions = _actions(space)
    for bid, block in enumerate(P.blocks):
        members = sorted(block)
        if len(members) == 1:
            continue
        if len({analysis.has_divergent_tree(x) for x in members}) > 1:
            log.debug(f"block {bid} violates codivergence")
            return False
        for C in range(len(P)):
            for act in actions + [TAU]:
                if act.is_tau and C == bid:
                    continue
                answers = {analysis.has_ell_transition(x, act, C) for x in members}
                if len(answers) > 1:
                    log.debug(f"block {bid} disagrees on {act} into block {C}")
                    return False
            if C == bid:
                continue
            qs: Set[Fraction] = set()
            for x in members:
                for bundle in space.bundles[x]:
                    if bundle.kind is BundleKind.RANDOM and any(P.block_of[t] == C for t in bundle.targets):
                        q = weighted_prob(x, bundle, C, P)
                        if q is not None:
                            qs.add(q)
            for q in sorted(qs):
                if len({analysis.has_q_transition(x, q, C) for x in members}) > 1:
                    log.debug(f"block {bid} disagrees on q={q} into block {C}")
                    return False
    return True


def passing_partitions(space: StateSpace, bound: int = DEFAULT_ORACLE_BOUND) -> List[Partition]:
    """Every partition of the state set that is a codivergent branching bisimulation"""
    _check_size(space, bound)
    passing = []
    for count, rgs in enumerate(partitions(len(space)), 1):
        candidate = Partition.from_keys(rgs)
        if is_branching_bisim(candidate, space, bound):
            passing.append(candidate)
        if count % 1000 == 0:
            log.debug(f"oracle: {count} partitions checked, {len(passing)} passing")
    log.info(f"oracle: {len(passing)} passing partitions over {len(space)} states")
    return passing


@dataclass
class OracleResult:
    coarsest: Partition
    passing_count: int
    join_passes: bool


def enumerate_bisimulations(space: StateSpace, bound: int = DEFAULT_ORACLE_BOUND) -> OracleResult:
    """Join of all passing partitions, with a check that the join passes too"""
    passing = passing_partitions(space, bound)
    coarsest = Partition.discrete(len(space))
    for candidate in passing:
        coarsest = join(coarsest, candidate)
    join_passes = is_branching_bisim(coarsest, space, bound)
    if not join_passes:
        log.warning("join of passing partitions is not a bisimulation")
    return OracleResult(coarsest, len(passing), join_passes)


def coarsest_by_enumeration(space: StateSpace, bound: int = DEFAULT_ORACLE_BOUND) -> Partition:
    return enumerate_bisimulations(space, bound).coarsest


# ===== Classical CCS baseline =====

def _tau_graph(space: StateSpace, P: Partition, block: int) -> nx.DiGraph:
    graph = nx.DiGraph()
    members = P.blocks[block]
    graph.add_nodes_from(members)
    for x in members:
        for bundle in space.bundles[x]:
            if bundle.kind is BundleKind.TAU and bundle.target in members:
                graph.add_edge(x, bundle.target)
    return graph


def _ccs_signatures(space: StateSpace, P: Partition) -> List[Tuple[int, frozenset, bool]]:
    keys: List[Tuple[int, frozenset, bool]] = [None] * len(space)
    for bid in range(len(P)):
        graph = _tau_graph(space, P, bid)
        looping = set()
        for component in nx.strongly_connected_components(graph):
            if len(component) > 1 or any(graph.has_edge(x, x) for x in component):
                looping |= component
        for s in P.blocks[bid]:
            inert = nx.descendants(graph, s) | {s}
            items = set()
            for x in inert:
                for bundle in space.bundles[x]:
                    C = P.block_of[bundle.target]
                    if bundle.kind is BundleKind.VISIBLE:
                        items.add((str(bundle.action), C))
                    elif C != bid:
                        items.add(("tau", C))
            keys[s] = (bid, frozenset(items), bool(inert & looping))
    return keys


def ccs_partition(space: StateSpace) -> Partition:
    """Coarsest divergence-sensitive branching bisimulation of a random-free space"""
    if space.has_random():
        raise RandomTermInCCSOracle("state space contains a random choice")
    current = Partition.universal(len(space))
    while True:
        following = Partition.from_keys(_ccs_signatures(space, current))
        if len(following) == len(current):
            return current
        current = following


def ccs_equal(t1: Term, t2: Term, bound: int = DEFAULT_STATE_BOUND) -> bool:
    """
    Decide t1 =CCS t2

    Raises:
        RandomTermInCCSOracle: a term contains a random choice
        BoundExceeded: the joint space has more than bound states
    """
    for t in (t1, t2):
        if not is_ccs(t):
            raise RandomTermInCCSOracle(f"not a CCS term: {print_term(t)}")
    space = build_joint_state_space([t1, t2], bound)
    return ccs_partition(space).same_block(*space.roots)


# ===== Golden files =====

def space_hash(space: StateSpace) -> str:
    canonical = json.dumps(to_json(space), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_golden(path: Union[str, Path], space: StateSpace, bound: int = DEFAULT_ORACLE_BOUND) -> dict:
    """Record the oracle's verdict on a space; returns the written document"""
    result = enumerate_bisimulations(space, bound)
    document = {
        "format": FORMAT_TAG,
        "roots": [print_term(space.term(root)) for root in space.roots],
        "space_hash": space_hash(space),
        "coarsest_partition": [sorted(block) for block in result.coarsest.blocks],
        "passing_count": result.passing_count,
    }
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    return document


def read_golden(path: Union[str, Path]) -> dict:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    for key in ("space_hash", "coarsest_partition", "passing_count"):
        if key not in document:
            raise ValueError(f"golden file {path} lacks {key}")
    return document
