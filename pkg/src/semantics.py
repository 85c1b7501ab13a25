"""
Operational Semantics Module
Transition bundles of terms and breadth-first state-space construction
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from src.errors import BoundExceeded, OpenTermError, VisibleInPathError
from src.syntax import (Choice, Fix, Par, Polarity, Prefix, RandomChoice, Restrict, Term, Var,
                        alpha_normalize, free_vars, print_term, unfold)

log = logging.getLogger(__name__)

DEFAULT_STATE_BOUND = 10_000
FORMAT_TAG = "rccs-lab/1"


class LabelKind(Enum):
    INPUT = "input"
    OUTPUT = "output"
    TAU = "tau"
    PTAU = "ptau"


@dataclass(frozen=True)
class Label:
    """Transition label: a, 'a, tau, or p tau with 0 < p < 1"""
    kind: LabelKind
    channel: Optional[str] = None
    p: Optional[Fraction] = None

    @staticmethod
    def of_prefix(prefix: Prefix) -> "Label":
        if prefix.is_tau:
            return Label(LabelKind.TAU)
        kind = LabelKind.OUTPUT if prefix.polarity is Polarity.OUTPUT else LabelKind.INPUT
        return Label(kind, prefix.channel)

    @staticmethod
    def ptau(p: Fraction) -> "Label":
        """p tau; 1 tau is the plain tau label"""
        p = Fraction(p)
        if p == 1:
            return Label(LabelKind.TAU)
        if not 0 < p < 1:
            raise ValueError(f"probability {p} outside (0,1]")
        return Label(LabelKind.PTAU, p=p)

    @property
    def is_silent(self) -> bool:
        return self.kind in (LabelKind.TAU, LabelKind.PTAU)

    def __str__(self) -> str:
        if self.kind is LabelKind.PTAU:
            return f"{self.p}tau"
        if self.kind is LabelKind.TAU:
            return "tau"
        return f"'{self.channel}" if self.kind is LabelKind.OUTPUT else self.channel


class BundleKind(Enum):
    VISIBLE = "visible"
    TAU = "tau"
    RANDOM = "random"


@dataclass(frozen=True)
class Bundle:
    """
    One firing of a transition rule

    Visible and Tau bundles carry a single branch of probability 1. A Random
    bundle is the collective silent transition of one random choice: all of
    its branches, unmerged, in summand order. Targets are Terms in raw step
    results and state ids inside a StateSpace.
    """
    kind: BundleKind
    branches: Tuple[Tuple[Fraction, Any], ...]
    action: Optional[Prefix] = None

    @staticmethod
    def visible(action: Prefix, target: Any) -> "Bundle":
        return Bundle(BundleKind.VISIBLE, ((Fraction(1), target),), action)

    @staticmethod
    def tau(target: Any) -> "Bundle":
        return Bundle(BundleKind.TAU, ((Fraction(1), target),))

    @staticmethod
    def random(branches: Iterable[Tuple[Fraction, Any]]) -> "Bundle":
        return Bundle(BundleKind.RANDOM, tuple(branches))

    @property
    def target(self) -> Any:
        """Sole target of a Visible or Tau bundle"""
        if self.kind is BundleKind.RANDOM:
            raise ValueError("a random bundle has several targets")
        return self.branches[0][1]

    @property
    def targets(self) -> Tuple[Any, ...]:
        return tuple(target for _, target in self.branches)

    def map_targets(self, fn: Callable[[Any], Any]) -> "Bundle":
        return Bundle(self.kind, tuple((p, fn(target)) for p, target in self.branches), self.action)

    def describe(self, show: Callable[[Any], str] = str) -> str:
        if self.kind is BundleKind.RANDOM:
            return "random[" + ", ".join(f"{p}:{show(t)}" for p, t in self.branches) + "]"
        name = "tau" if self.kind is BundleKind.TAU else str(self.action)
        return f"{name} -> {show(self.target)}"


def labels_of(bundle: Bundle) -> List[Label]:
    """Labels of the individual transitions a bundle groups"""
    if bundle.kind is BundleKind.VISIBLE:
        return [Label.of_prefix(bundle.action)]
    if bundle.kind is BundleKind.TAU:
        return [Label(LabelKind.TAU)]
    return [Label.ptau(p) for p, _ in bundle.branches]


# ===== Transition rules =====

def step(t: Term) -> List[Bundle]:
    """
    Outgoing bundles of a closed term, in a fixed order

    Raises:
        OpenTermError: t has free variables
    """
    if free_vars(t):
        raise OpenTermError(f"term has free variables: {sorted(free_vars(t))}")
    return _step(t)


def _step(t: Term) -> List[Bundle]:
    if isinstance(t, Choice):
        return [Bundle.tau(cont) if p.is_tau else Bundle.visible(p, cont) for p, cont in t.branches]

    if isinstance(t, RandomChoice):
        return [Bundle.random(t.branches)]

    if isinstance(t, Par):
        left, right = _step(t.left), _step(t.right)
        # Communication needs complementary visible actions; random branches never synchronize
        bundles = [
            Bundle.tau(Par(lb.target, rb.target))
            for lb in left if lb.kind is BundleKind.VISIBLE
            for rb in right if rb.kind is BundleKind.VISIBLE and rb.action == lb.action.complement()
        ]
        bundles += [lb.map_targets(lambda x: Par(x, t.right)) for lb in left]
        bundles += [rb.map_targets(lambda x: Par(t.left, x)) for rb in right]
        return bundles

    if isinstance(t, Restrict):
        return [
            b.map_targets(lambda x: Restrict(t.channel, x))
            for b in _step(t.body)
            if not (b.kind is BundleKind.VISIBLE and b.action.channel == t.channel)
        ]

    if isinstance(t, Fix):
        return _step(unfold(t))

    if isinstance(t, Var):
        raise OpenTermError(f"free variable {t.name}")
    raise TypeError(f"not a term: {t!r}")


def seq_probability(path: Sequence[Label]) -> Fraction:
    """Probability p1...pk of a silent transition sequence (tau counts as 1)"""
    result = Fraction(1)
    for label in path:
        if not label.is_silent:
            raise VisibleInPathError(f"visible label {label} in a silent path")
        if label.kind is LabelKind.PTAU:
            result *= label.p
    return result


# ===== State space =====

@dataclass(frozen=True)
class StateSpace:
    """
    Finite probabilistic LTS over alpha-normalized closed terms

    Attributes:
        states: State terms indexed by state id
        bundles: Per-state bundles, targets are state ids
        roots: Ids of the terms exploration started from
        bound: Maximum number of states that was allowed
    """
    states: Tuple[Term, ...]
    bundles: Tuple[Tuple[Bundle, ...], ...]
    roots: Tuple[int, ...]
    bound: int = DEFAULT_STATE_BOUND
    _index: Dict[Term, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {term: sid for sid, term in enumerate(self.states)})

    @property
    def root(self) -> int:
        return self.roots[0]

    def __len__(self) -> int:
        return len(self.states)

    def state_ids(self) -> range:
        return range(len(self.states))

    def term(self, sid: int) -> Term:
        return self.states[sid]

    def index_of(self, term: Term) -> Optional[int]:
        """State id of a term (up to alpha-conversion), None if unreachable"""
        return self._index.get(alpha_normalize(term))

    def successors(self, sid: int) -> List[int]:
        return sorted({target for bundle in self.bundles[sid] for target in bundle.targets})

    def has_random(self) -> bool:
        return any(b.kind is BundleKind.RANDOM for bundles in self.bundles for b in bundles)


def build_state_space(root: Term, bound: int = DEFAULT_STATE_BOUND) -> StateSpace:
    """
    Breadth-first closure of step from root

    Raises:
        BoundExceeded: more than bound distinct states are reachable
        OpenTermError: root has free variables
    """
    return build_joint_state_space([root], bound)


def build_joint_state_space(roots: Sequence[Term], bound: int = DEFAULT_STATE_BOUND) -> StateSpace:
    """One state space over several roots with a shared state table"""
    for term in roots:
        if free_vars(term):
            raise OpenTermError(f"not a process: {print_term(term)}")

    index: Dict[Term, int] = {}
    states: List[Term] = []
    queue: deque = deque()

    def intern(term: Term) -> int:
        normal = alpha_normalize(term)
        sid = index.get(normal)
        if sid is None:
            if len(states) >= bound:
                raise BoundExceeded(bound)
            sid = len(states)
            index[normal] = sid
            states.append(normal)
            queue.append(sid)
        return sid

    root_ids = tuple(intern(term) for term in roots)
    edges: Dict[int, Tuple[Bundle, ...]] = {}

    # BFS over the frontier
    while queue:
        current = queue.popleft()
        edges[current] = tuple(b.map_targets(intern) for b in _step(states[current]))

    log.info(f"explored {len(states)} states from {len(roots)} root(s)")
    return StateSpace(tuple(states), tuple(edges[sid] for sid in range(len(states))), root_ids, bound)


# ===== Export =====

def to_json(space: StateSpace) -> dict:
    """JSON-ready dictionary of a state space"""
    bundles = []
    for source, state_bundles in enumerate(space.bundles):
        for bundle in state_bundles:
            entry: Dict[str, Any] = {"source": source, "kind": bundle.kind.value}
            if bundle.kind is BundleKind.RANDOM:
                entry["branches"] = [
                    {"p": f"{p.numerator}/{p.denominator}", "target": target}
                    for p, target in bundle.branches
                ]
            else:
                if bundle.kind is BundleKind.VISIBLE:
                    entry["action"] = str(bundle.action)
                entry["target"] = bundle.target
            bundles.append(entry)
    return {
        "format": FORMAT_TAG,
        "states": [{"id": sid, "term": print_term(term)} for sid, term in enumerate(space.states)],
        "root": space.root,
        "roots": list(space.roots),
        "bundles": bundles,
    }


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(space: StateSpace) -> str:
    """Graphviz rendering; each random bundle fans out from a point node reached by a dashed arc"""
    lines = ["digraph lts {", "    rankdir=LR;", "    node [shape=ellipse fontname=\"monospace\"];"]
    for sid, term in enumerate(space.states):
        shape = " peripheries=2" if sid in space.roots else ""
        lines.append(f'    s{sid} [label="s{sid}: {_dot_escape(print_term(term))}"{shape}];')
    for source, state_bundles in enumerate(space.bundles):
        for k, bundle in enumerate(state_bundles):
            if bundle.kind is BundleKind.RANDOM:
                hub = f"r{source}_{k}"
                lines.append(f"    {hub} [shape=point];")
                lines.append(f"    s{source} -> {hub} [style=dashed arrowhead=none];")
                for p, target in bundle.branches:
                    lines.append(f'    {hub} -> s{target} [label="p={p.numerator}/{p.denominator}"];')
            else:
                name = "tau" if bundle.kind is BundleKind.TAU else str(bundle.action)
                lines.append(f'    s{source} -> s{bundle.target} [label="{_dot_escape(name)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_text(space: StateSpace) -> str:
    """Plain listing of states and bundles"""
    lines = [f"{len(space)} states, roots {list(space.roots)}"]
    for sid, term in enumerate(space.states):
        lines.append(f"s{sid}: {print_term(term)}")
        for bundle in space.bundles[sid]:
            lines.append(f"    {bundle.describe(lambda t: f's{t}')}")
    return "\n".join(lines) + "\n"
