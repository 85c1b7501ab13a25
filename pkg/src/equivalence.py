"""
Equivalence Module
Codivergent branching bisimilarity on finite state spaces by signature refinement
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple, Union

from src.errors import PreconditionViolated, SameBlockError
from src.metrics import RefinementStats, RefinementTracker
from src.semantics import (DEFAULT_STATE_BOUND, FORMAT_TAG, Bundle, BundleKind, Label, LabelKind,
                           StateSpace, build_joint_state_space)
from src.syntax import TAU, Polarity, Prefix, Term, action, print_term
from src.witness import STOP, Decision, DecisionKind, Purpose, WitnessPolicy

log = logging.getLogger(__name__)


# ===== Partitions =====

@dataclass(frozen=True)
class Partition:
    """
    Equivalence classes of state ids

    Blocks are numbered by their least member, so equal partitions compare
    equal and print the same way.
    """
    block_of: Tuple[int, ...]
    blocks: Tuple[FrozenSet[int], ...]

    @staticmethod
    def from_blocks(groups: Iterable[Iterable[int]]) -> "Partition":
        ordered = sorted((frozenset(group) for group in groups if group), key=min)
        size = sum(len(group) for group in ordered)
        block_of = [-1] * size
        for bid, group in enumerate(ordered):
            for sid in group:
                if not 0 <= sid < size or block_of[sid] != -1:
                    raise ValueError(f"blocks do not partition 0..{size - 1}")
                block_of[sid] = bid
        return Partition(tuple(block_of), tuple(ordered))

    @staticmethod
    def from_keys(keys: Sequence[Hashable]) -> "Partition":
        """Group state ids with equal keys"""
        groups: Dict[Hashable, List[int]] = {}
        for sid, key in enumerate(keys):
            groups.setdefault(key, []).append(sid)
        return Partition.from_blocks(groups.values())

    @staticmethod
    def universal(n: int) -> "Partition":
        return Partition((0,) * n, (frozenset(range(n)),))

    @staticmethod
    def discrete(n: int) -> "Partition":
        return Partition(tuple(range(n)), tuple(frozenset({sid}) for sid in range(n)))

    def __len__(self) -> int:
        return len(self.blocks)

    def same_block(self, s: int, t: int) -> bool:
        return self.block_of[s] == self.block_of[t]

    def members(self, block: int) -> List[int]:
        return sorted(self.blocks[block])

    def refines(self, other: "Partition") -> bool:
        """True when every block of self lies inside a block of other"""
        return all(len({other.block_of[sid] for sid in block}) == 1 for block in self.blocks)

    def to_json(self) -> dict:
        return {"format": FORMAT_TAG, "blocks": [sorted(block) for block in self.blocks]}


def partition_from_pairs(space: StateSpace, pairs: Iterable[Tuple[int, int]]) -> Partition:
    """Equivalence closure of a relation given as state pairs"""
    parent = list(space.state_ids())

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return Partition.from_keys([find(sid) for sid in space.state_ids()])


# ===== Per-partition analyses =====

@dataclass(frozen=True)
class Move:
    """A class-internal firing usable inside an epsilon-tree"""
    decision: Decision
    targets: FrozenSet[int]


@dataclass(frozen=True)
class Signature:
    visible: FrozenSet[Tuple[Prefix, int]] = frozenset()
    taujumps: FrozenSet[int] = frozenset()
    qjumps: FrozenSet[Tuple[Fraction, int]] = frozenset()
    divergent: bool = False


@dataclass
class _BlockTable:
    """Every candidate signature item of one block with the states that have it"""
    visible: Dict[Tuple[Prefix, int], FrozenSet[int]] = field(default_factory=dict)
    taujumps: Dict[int, FrozenSet[int]] = field(default_factory=dict)
    qjumps: Dict[Tuple[Fraction, int], FrozenSet[int]] = field(default_factory=dict)
    divergent: FrozenSet[int] = frozenset()


def _as_prefix(ell: Union[Prefix, Label, str]) -> Prefix:
    if isinstance(ell, Prefix):
        return ell
    if isinstance(ell, str):
        return action(ell)
    if ell.kind is LabelKind.PTAU:
        raise ValueError("p tau is not an l-transition label")
    if ell.kind is LabelKind.TAU:
        return TAU
    polarity = Polarity.OUTPUT if ell.kind is LabelKind.OUTPUT else Polarity.INPUT
    return Prefix(polarity, ell.channel)


def weighted_prob(s: int, bundle: Bundle, C: int, P: Partition) -> Optional[Fraction]:
    """
    Probability of reaching block C by a random firing, conditioned on leaving s's block

    Returns None when every branch stays in s's block.

    Raises:
        SameBlockError: C is s's own block
    """
    own = P.block_of[s]
    if C == own:
        raise SameBlockError(f"block {C} is the source's own block")
    if bundle.kind is not BundleKind.RANDOM:
        raise ValueError("weighted probability is defined for random bundles only")
    into = sum((p for p, t in bundle.branches if P.block_of[t] == C), Fraction(0))
    stay = sum((p for p, t in bundle.branches if P.block_of[t] == own), Fraction(0))
    if stay == 1:
        return None
    return into / (1 - stay)


class PartitionAnalysis:
    """
    Exact l-, q- and divergence analyses for one fixed partition

    Winning regions are computed once per (block, goal) and shared by every
    state of the block.
    """

    def __init__(self, space: StateSpace, partition: Partition):
        if len(partition.block_of) != len(space):
            raise ValueError("partition does not cover the state space")
        self.space = space
        self.partition = partition
        self._moves: Dict[int, List[Move]] = {}
        self._regions: Dict[Tuple[int, FrozenSet[int]], Tuple[FrozenSet[int], Dict[int, Decision]]] = {}
        self._divergent: Dict[int, Tuple[FrozenSet[int], Dict[int, Decision]]] = {}
        self._tables: Dict[int, _BlockTable] = {}

    def internal_moves(self, s: int) -> List[Move]:
        if s not in self._moves:
            own = self.partition.block_of[s]
            moves = []
            for index, bundle in enumerate(self.space.bundles[s]):
                if bundle.kind is BundleKind.VISIBLE:
                    continue
                if all(self.partition.block_of[t] == own for t in bundle.targets):
                    kind = DecisionKind.TAKE_TAU if bundle.kind is BundleKind.TAU else DecisionKind.TAKE_RANDOM
                    moves.append(Move(Decision(kind, index), frozenset(bundle.targets)))
            self._moves[s] = moves
        return self._moves[s]

    # ----- fixpoints -----

    def reach_region(self, block: int, good: FrozenSet[int]) -> Tuple[FrozenSet[int], Dict[int, Decision]]:
        """
        States of block with a regular epsilon-tree whose leaves are all good

        Greatest fixpoint over a least fixpoint: the inner loop collects the
        states that can reach good with positive probability while staying in
        the candidate set, the outer loop drops the states that cannot.
        """
        key = (block, good)
        if key in self._regions:
            return self._regions[key]
        candidates = set(self.partition.blocks[block])
        while True:
            level = set(good) & candidates
            choice: Dict[int, Decision] = {x: STOP for x in level}
            grown = True
            while grown:
                grown = False
                for x in sorted(candidates - level):
                    for move in self.internal_moves(x):
                        if move.targets <= candidates and move.targets & level:
                            level.add(x)
                            choice[x] = move.decision
                            grown = True
                            break
            if level == candidates:
                break
            candidates = level
        result = (frozenset(candidates), choice)
        self._regions[key] = result
        return result

    def divergent_region(self, block: int) -> Tuple[FrozenSet[int], Dict[int, Decision]]:
        """Greatest set D of the block where every state has an internal move staying in D"""
        if block not in self._divergent:
            region = set(self.partition.blocks[block])
            while True:
                choice: Dict[int, Decision] = {}
                for x in sorted(region):
                    for move in self.internal_moves(x):
                        if move.targets <= region:
                            choice[x] = move.decision
                            break
                if len(choice) == len(region):
                    break
                region = set(choice)
            self._divergent[block] = (frozenset(region), choice)
        return self._divergent[block]

    # ----- leaf obligations -----

    def ell_good(self, block: int, act: Prefix, C: int) -> FrozenSet[int]:
        good = set()
        for x in self.partition.blocks[block]:
            for bundle in self.space.bundles[x]:
                if bundle.kind is BundleKind.RANDOM:
                    continue
                matches = bundle.kind is BundleKind.TAU if act.is_tau else bundle.action == act
                if matches and self.partition.block_of[bundle.target] == C:
                    good.add(x)
                    break
        return frozenset(good)

    def q_good(self, block: int, q: Fraction, C: int) -> FrozenSet[int]:
        good = set()
        for x in self.partition.blocks[block]:
            for bundle in self.space.bundles[x]:
                if bundle.kind is BundleKind.RANDOM and weighted_prob(x, bundle, C, self.partition) == q:
                    good.add(x)
                    break
        return frozenset(good)

    # ----- queries -----

    def as_reach(self, s: int, good: Iterable[int]) -> Tuple[bool, Optional[WitnessPolicy]]:
        good = frozenset(good)
        block = self.partition.block_of[s]
        if any(self.partition.block_of[x] != block for x in good):
            raise ValueError("good states must lie in the source's block")
        region, choice = self.reach_region(block, good)
        if s not in region:
            return False, None
        return True, self._policy(s, choice, None)

    def has_ell_transition(self, s: int, ell, C: int) -> bool:
        act = _as_prefix(ell)
        block = self.partition.block_of[s]
        if act.is_tau and C == block:
            raise PreconditionViolated("tau into the source's own block is vacuous")
        region, _ = self.reach_region(block, self.ell_good(block, act, C))
        return s in region

    def has_q_transition(self, s: int, q: Fraction, C: int) -> bool:
        q = Fraction(q)
        block = self.partition.block_of[s]
        if C == block:
            raise SameBlockError(f"block {C} is the source's own block")
        if not 0 < q <= 1:
            raise ValueError(f"q = {q} outside (0,1]")
        region, _ = self.reach_region(block, self.q_good(block, q, C))
        return s in region

    def has_divergent_tree(self, s: int) -> bool:
        region, _ = self.divergent_region(self.partition.block_of[s])
        return s in region

    # ----- witnesses -----

    def _policy(self, root: int, choice: Dict[int, Decision], purpose: Optional[Purpose]) -> WitnessPolicy:
        policy = WitnessPolicy(root, dict(choice), purpose)
        reachable = policy.reachable(self.space)
        policy.decide = {state: choice[state] for state in reachable}
        return policy

    def ell_witness(self, s: int, act: Prefix, C: int) -> Optional[WitnessPolicy]:
        block = self.partition.block_of[s]
        if act.is_tau and C == block:
            raise PreconditionViolated("tau into the source's own block is vacuous")
        region, choice = self.reach_region(block, self.ell_good(block, act, C))
        if s not in region:
            return None
        return self._policy(s, choice, Purpose.ell(act, C))

    def q_witness(self, s: int, q: Fraction, C: int) -> Optional[WitnessPolicy]:
        block = self.partition.block_of[s]
        if C == block:
            raise SameBlockError(f"block {C} is the source's own block")
        region, choice = self.reach_region(block, self.q_good(block, Fraction(q), C))
        if s not in region:
            return None
        return self._policy(s, choice, Purpose.q_jump(q, C))

    def divergence_witness(self, s: int) -> Optional[WitnessPolicy]:
        region, choice = self.divergent_region(self.partition.block_of[s])
        if s not in region:
            return None
        return self._policy(s, choice, Purpose.divergence())

    # ----- signatures -----

    def _table(self, block: int) -> _BlockTable:
        if block in self._tables:
            return self._tables[block]
        P = self.partition
        visible_good: Dict[Tuple[Prefix, int], Set[int]] = {}
        tau_good: Dict[int, Set[int]] = {}
        q_good: Dict[Tuple[Fraction, int], Set[int]] = {}
        for x in sorted(P.blocks[block]):
            for bundle in self.space.bundles[x]:
                if bundle.kind is BundleKind.VISIBLE:
                    visible_good.setdefault((bundle.action, P.block_of[bundle.target]), set()).add(x)
                elif bundle.kind is BundleKind.TAU:
                    if P.block_of[bundle.target] != block:
                        tau_good.setdefault(P.block_of[bundle.target], set()).add(x)
                else:
                    for C in {P.block_of[t] for t in bundle.targets} - {block}:
                        q = weighted_prob(x, bundle, C, P)
                        if q is not None:
                            q_good.setdefault((q, C), set()).add(x)

        table = _BlockTable()
        for item, good in visible_good.items():
            table.visible[item] = self.reach_region(block, frozenset(good))[0]
        for C, good in tau_good.items():
            table.taujumps[C] = self.reach_region(block, frozenset(good))[0]
        for item, good in q_good.items():
            table.qjumps[item] = self.reach_region(block, frozenset(good))[0]
        table.divergent = self.divergent_region(block)[0]
        self._tables[block] = table
        return table

    def signature(self, s: int) -> Signature:
        table = self._table(self.partition.block_of[s])
        return Signature(
            visible=frozenset(item for item, region in table.visible.items() if s in region),
            taujumps=frozenset(C for C, region in table.taujumps.items() if s in region),
            qjumps=frozenset(item for item, region in table.qjumps.items() if s in region),
            divergent=s in table.divergent,
        )


# ===== Module-level operations =====

def internal_moves(s: int, P: Partition, space: StateSpace) -> List[Move]:
    return PartitionAnalysis(space, P).internal_moves(s)


def as_reach(s: int, P: Partition, good: Iterable[int], space: StateSpace) -> Tuple[bool, Optional[WitnessPolicy]]:
    """
    Whether s has a regular epsilon-tree in its block with every leaf in good

    Returns:
        (found, policy); the policy's leaves are the good states it stops at
    """
    return PartitionAnalysis(space, P).as_reach(s, good)


def has_ell_transition(s: int, ell, C: int, P: Partition, space: StateSpace) -> bool:
    return PartitionAnalysis(space, P).has_ell_transition(s, ell, C)


def has_q_transition(s: int, q: Fraction, C: int, P: Partition, space: StateSpace) -> bool:
    return PartitionAnalysis(space, P).has_q_transition(s, q, C)


def has_divergent_tree(s: int, P: Partition, space: StateSpace) -> bool:
    return PartitionAnalysis(space, P).has_divergent_tree(s)


def signature(s: int, P: Partition, space: StateSpace) -> Signature:
    return PartitionAnalysis(space, P).signature(s)


# ===== Refinement =====

def refinement_rounds(space: StateSpace, tracker: Optional[RefinementTracker] = None) -> List[Partition]:
    """
    Successive partitions from the universal one to the stable one

    Each round splits every block by the signatures its states have under the
    previous partition; a round that splits nothing ends the refinement.
    """
    current = Partition.universal(len(space))
    history = [current]
    if tracker is not None:
        tracker.start_tracking(len(current))
    while True:
        analysis = PartitionAnalysis(space, current)
        keys = [(current.block_of[s], analysis.signature(s)) for s in space.state_ids()]
        following = Partition.from_keys(keys)
        if tracker is not None:
            tracker.record_round(len(following), len(space))
        log.debug(f"refinement round {len(history)}: {len(current)} -> {len(following)} blocks")
        if len(following) == len(current):
            return history
        history.append(following)
        current = following


def refine(space: StateSpace, tracker: Optional[RefinementTracker] = None) -> Partition:
    """Coarsest codivergent branching bisimulation of a state space"""
    return refinement_rounds(space, tracker)[-1]


# ===== Equality with evidence =====

@dataclass(frozen=True)
class Evidence:
    """
    A signature item one state has and the other lacks

    present_for names the side ("first" or "second") that has the item.
    """
    kind: str
    present_for: str
    detail: Dict[str, object]

    def to_json(self) -> dict:
        return {"kind": self.kind, "present_for": self.present_for, **self.detail}

    def __str__(self) -> str:
        detail = ", ".join(f"{key}={value}" for key, value in self.detail.items())
        return f"{self.kind} item present for the {self.present_for} term ({detail})"


def _block_terms(space: StateSpace, P: Partition, block: int) -> List[str]:
    return [print_term(space.term(sid)) for sid in P.members(block)]


def _signature_difference(space: StateSpace, P: Partition, first: Signature, second: Signature) -> Optional[Evidence]:
    # divergence first
    if first.divergent != second.divergent:
        return Evidence("divergence", "first" if first.divergent else "second", {"divergent": True})
    for mine, theirs, side in ((first, second, "first"), (second, first, "second")):
        for act, C in sorted(mine.visible - theirs.visible, key=lambda item: (str(item[0]), item[1])):
            return Evidence("visible", side, {"action": str(act), "target": _block_terms(space, P, C)})
        for C in sorted(mine.taujumps - theirs.taujumps):
            return Evidence("tau", side, {"target": _block_terms(space, P, C)})
        for q, C in sorted(mine.qjumps - theirs.qjumps, key=lambda item: (item[1], item[0])):
            return Evidence("q", side, {"q": f"{q.numerator}/{q.denominator}", "target": _block_terms(space, P, C)})
    return None


def distinguish(space: StateSpace, partition: Partition, s: int, t: int) -> Evidence:
    """
    First signature item that separates two inequivalent states

    Evidence comes from the refinement round that split s from t, so the
    blocks it mentions are those of that round.
    """
    if partition.same_block(s, t):
        raise ValueError(f"states {s} and {t} are in the same block")
    analysis = PartitionAnalysis(space, partition)
    found = _signature_difference(space, partition, analysis.signature(s), analysis.signature(t))
    if found is not None:
        return found
    for P in refinement_rounds(space):
        if P.same_block(s, t):
            analysis = PartitionAnalysis(space, P)
            found = _signature_difference(space, P, analysis.signature(s), analysis.signature(t))
            if found is not None:
                return found
    raise ValueError(f"states {s} and {t} are not separated by refinement")


@dataclass
class EqualityResult:
    equal: bool
    space: StateSpace
    partition: Partition
    stats: RefinementStats
    evidence: Optional[Evidence] = None

    def to_json(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "equal": self.equal,
            "partition": self.partition.to_json()["blocks"],
            "evidence": self.evidence.to_json() if self.evidence else None,
        }


def check_equal(t1: Term, t2: Term, bound: int = DEFAULT_STATE_BOUND) -> EqualityResult:
    """
    Decide t1 =RCCS t2 on their joint state space

    Raises:
        BoundExceeded: the joint space has more than bound states
    """
    space = build_joint_state_space([t1, t2], bound)
    tracker = RefinementTracker()
    partition = refine(space, tracker)
    stats = tracker.create_stats(f"{print_term(t1)} vs {print_term(t2)}", len(space))
    first, second = space.roots
    equal = partition.same_block(first, second)
    evidence = None if equal else distinguish(space, partition, first, second)
    log.info(f"equality check on {len(space)} states: {'equal' if equal else 'not equal'}")
    return EqualityResult(equal, space, partition, stats, evidence)


# ===== Minimization =====

def quotient(space: StateSpace, partition: Partition) -> StateSpace:
    """
    Minimized state space with one state per block

    Each block's state is its least member's term. Bundles of all members are
    redirected to blocks, branch by branch; moves that never leave the block
    are dropped and replaced by a single tau self-loop on divergent blocks.
    """
    analysis = PartitionAnalysis(space, partition)
    states = tuple(space.term(min(block)) for block in partition.blocks)
    bundles: List[Tuple[Bundle, ...]] = []
    for bid, block in enumerate(partition.blocks):
        seen: Dict[Bundle, None] = {}
        for x in sorted(block):
            for bundle in space.bundles[x]:
                reduced = bundle.map_targets(lambda t: partition.block_of[t])
                if bundle.kind is not BundleKind.VISIBLE and set(reduced.targets) == {bid}:
                    continue
                seen.setdefault(reduced, None)
        if analysis.has_divergent_tree(min(block)):
            seen.setdefault(Bundle.tau(bid), None)
        bundles.append(tuple(seen))
    roots = tuple(partition.block_of[r] for r in space.roots)
    log.info(f"quotient: {len(space)} states -> {len(states)}")
    return StateSpace(states, tuple(bundles), roots, space.bound)


def disjoint_union(first: StateSpace, second: StateSpace) -> StateSpace:
    """Side-by-side copy of two spaces; roots are first.root and the shifted second.root"""
    offset = len(first)
    shifted = tuple(
        tuple(b.map_targets(lambda t: t + offset) for b in state_bundles)
        for state_bundles in second.bundles
    )
    return StateSpace(first.states + second.states, first.bundles + shifted,
                      (first.root, second.root + offset), first.bound + second.bound)


def spaces_equivalent(first: StateSpace, second: StateSpace) -> bool:
    """Whether the roots of two separately built spaces are equivalent"""
    union = disjoint_union(first, second)
    partition = refine(union)
    return partition.same_block(*union.roots)
