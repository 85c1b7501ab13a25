"""
Property Test Runner Module
Seeded congruence, oracle-agreement and conservativity checks over generated terms
"""
import logging
import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from src.config import RunConfig
from src.equivalence import check_equal, refine
from src.errors import BoundExceeded, IllFormedError
from src.generator import TermGenerator, case_generator
from src.oracle import ccs_equal, is_branching_bisim, join, passing_partitions
from src.semantics import build_joint_state_space
from src.syntax import (NIL, Choice, Fix, Par, Prefix, RandomChoice, Restrict, Term, check_well_formed,
                        free_vars, is_ccs, print_term)

log = logging.getLogger(__name__)

CONGRUENCE_PROPERTIES = ("par-right", "par-left", "restrict", "sum", "random")
UNION_SAMPLES = 50
PROPTEST_ORACLE_STATES = 6
SHRINK_BUDGET = 200


@dataclass(frozen=True)
class ClosingContext:
    """The pieces each congruence closure wraps a pair in"""
    parallel: Term
    channel: str
    alpha: Prefix
    summand: Choice
    p: Fraction
    other: Term

    def closures(self) -> Dict[str, Callable[[Term], Term]]:
        return {
            "par-right": lambda t: Par(t, self.parallel),
            "par-left": lambda t: Par(self.parallel, t),
            "restrict": lambda t: Restrict(self.channel, t),
            "sum": lambda t: Choice(((self.alpha, t),) + self.summand.branches),
            "random": lambda t: RandomChoice(((self.p, t), (1 - self.p, self.other))),
        }


@dataclass
class PropertyFailure:
    case: int
    prop: str
    first: Term
    second: Term
    detail: str = ""

    def __str__(self) -> str:
        return (f"case {self.case} [{self.prop}]: {print_term(self.first)}  vs  "
                f"{print_term(self.second)}" + (f" ({self.detail})" if self.detail else ""))


@dataclass
class PropertyReport:
    """Outcome of a property run; contains no timings"""
    seed: int
    cases: int
    checked: Dict[str, int] = field(default_factory=dict)
    equal_pairs: int = 0
    skipped: int = 0
    failures: List[PropertyFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: "PropertyReport"):
        for name, count in other.checked.items():
            self.checked[name] = self.checked.get(name, 0) + count
        self.equal_pairs += other.equal_pairs
        self.skipped += other.skipped
        self.failures.extend(other.failures)

    def count(self, name: str, amount: int = 1):
        self.checked[name] = self.checked.get(name, 0) + amount

    def __str__(self) -> str:
        lines = [
            f"\n{'=' * 60}",
            f"Property run: seed {self.seed}, {self.cases} cases",
            f"{'=' * 60}",
            f"Equal pairs: {self.equal_pairs}",
            f"Skipped (bound exceeded): {self.skipped}",
        ]
        for name in sorted(self.checked):
            lines.append(f"{name:<24} {self.checked[name]:>6} checks")
        lines.append(f"Result: {'ALL PASS' if self.passed else f'{len(self.failures)} FAILURE(S)'}")
        for failure in sorted(self.failures, key=lambda f: (f.case, f.prop)):
            lines.append(f"  {failure}")
        lines.append("=" * 60)
        return "\n".join(lines) + "\n"


def closing_context(generator: TermGenerator) -> ClosingContext:
    return ClosingContext(
        parallel=generator.context_process(),
        channel=generator.choose_channel(),
        alpha=generator.action(),
        summand=generator.guarded_summand(),
        p=generator.probability(),
        other=generator.context_process(),
    )


# ===== Single checks =====

def _equal(first: Term, second: Term, bound: int) -> bool:
    return check_equal(first, second, bound).equal


def congruence_holds(first: Term, second: Term, prop: str, context: ClosingContext, bound: int) -> bool:
    """False only when first = second but the closed pair is unequal"""
    if not _equal(first, second, bound):
        return True
    wrap = context.closures()[prop]
    return _equal(wrap(first), wrap(second), bound)


def check_oracle_agreement(first: Term, second: Term, config: RunConfig,
                           rng: Optional[random.Random] = None,
                           oracle_states: int = PROPTEST_ORACLE_STATES) -> Optional[str]:
    """
    Compare refinement with brute-force enumeration on a small joint space

    Returns a description of the disagreement, or None. Sampled pairs of
    passing partitions are also checked for closure under join.
    """
    space = build_joint_state_space([first, second], config.state_bound)
    if len(space) > min(config.oracle_bound, oracle_states):
        return None
    passing = passing_partitions(space, config.oracle_bound)
    refined = refine(space)
    coarsest = refined
    for candidate in passing:
        coarsest = join(coarsest, candidate)
    if coarsest != refined or refined not in passing:
        return f"refine gives {refined.to_json()['blocks']}, oracle gives {coarsest.to_json()['blocks']}"
    rng = rng or random.Random(0)
    for _ in range(min(UNION_SAMPLES, len(passing))):
        left, right = rng.choice(passing), rng.choice(passing)
        if not is_branching_bisim(join(left, right), space, config.oracle_bound):
            return f"join of {left.to_json()['blocks']} and {right.to_json()['blocks']} fails"
    return None


def conservativity_holds(first: Term, second: Term, bound: int) -> bool:
    return ccs_equal(first, second, bound) == _equal(first, second, bound)


# ===== Shrinking =====

def _smaller(t: Term) -> Iterator[Term]:
    """Closed terms strictly smaller than t, most aggressive first"""
    if t != NIL:
        yield NIL
    if isinstance(t, Choice):
        for i in range(len(t.branches)):
            if len(t.branches) > 1:
                yield Choice(t.branches[:i] + t.branches[i + 1:])
        for i, (p, cont) in enumerate(t.branches):
            if not free_vars(cont):
                yield cont
            for smaller in _smaller(cont):
                yield Choice(t.branches[:i] + ((p, smaller),) + t.branches[i + 1:])
    elif isinstance(t, RandomChoice):
        for p, cont in t.branches:
            if not free_vars(cont):
                yield cont
        for i, (p, cont) in enumerate(t.branches):
            for smaller in _smaller(cont):
                yield RandomChoice(t.branches[:i] + ((p, smaller),) + t.branches[i + 1:])
    elif isinstance(t, Par):
        yield t.left
        yield t.right
        for smaller in _smaller(t.left):
            yield Par(smaller, t.right)
        for smaller in _smaller(t.right):
            yield Par(t.left, smaller)
    elif isinstance(t, Restrict):
        yield t.body
        for smaller in _smaller(t.body):
            yield Restrict(t.channel, smaller)
    elif isinstance(t, Fix):
        for smaller in _smaller(t.body):
            yield Fix(t.var, smaller)


def _well_formed(t: Term) -> bool:
    if free_vars(t):
        return False
    try:
        check_well_formed(t)
    except IllFormedError:
        return False
    return True


def shrink_pair(first: Term, second: Term, still_fails: Callable[[Term, Term], bool],
                budget: int = SHRINK_BUDGET) -> Tuple[Term, Term]:
    """
    Greedy delta debugging of a failing pair

    Repeatedly replaces one side by a smaller closed term while the
    failure persists; stops when no replacement helps or the budget is spent.
    """
    attempts = 0
    improved = True
    while improved and attempts < budget:
        improved = False
        for side in (0, 1):
            current = (first, second)[side]
            for candidate in _smaller(current):
                if attempts >= budget:
                    break
                if not _well_formed(candidate):
                    continue
                attempts += 1
                trial = (candidate, second) if side == 0 else (first, candidate)
                try:
                    fails = still_fails(*trial)
                except BoundExceeded:
                    continue
                if fails:
                    first, second = trial
                    improved = True
                    break
            if improved:
                break
    log.debug(f"shrinking used {attempts} checks")
    return first, second


# ===== Runner =====

def run_case(case: int, config: RunConfig) -> PropertyReport:
    """All properties for one seeded case"""
    report = PropertyReport(config.seed, 1)
    generator = case_generator(config.seed, case)
    first, second = generator.pair()
    context = closing_context(generator)
    bound = config.state_bound
    try:
        equal = _equal(first, second, bound)
        if equal:
            report.equal_pairs += 1
            for prop in CONGRUENCE_PROPERTIES:
                report.count(prop)
                if not congruence_holds(first, second, prop, context, bound):
                    a, b = shrink_pair(first, second,
                                       lambda x, y: not congruence_holds(x, y, prop, context, bound))
                    report.failures.append(PropertyFailure(case, prop, a, b, "closure is not equal"))
        report.count("oracle-agreement")
        disagreement = check_oracle_agreement(first, second, config, random.Random(case))
        if disagreement:
            report.failures.append(PropertyFailure(case, "oracle-agreement", first, second, disagreement))
    except BoundExceeded:
        report.skipped += 1

    ccs_first, ccs_second = case_generator(config.seed, case, allow_random=False).pair()
    if is_ccs(ccs_first) and is_ccs(ccs_second):
        try:
            report.count("conservativity")
            if not conservativity_holds(ccs_first, ccs_second, bound):
                a, b = shrink_pair(ccs_first, ccs_second,
                                   lambda x, y: not conservativity_holds(x, y, bound))
                report.failures.append(PropertyFailure(case, "conservativity", a, b, "CCS and RCCS verdicts differ"))
        except BoundExceeded:
            report.skipped += 1
    return report


class PropertyRunner:
    """
    Run property cases on worker threads and merge their reports

    Case seeds are derived from the run seed and the case index, so the merged
    report does not depend on the number of workers.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.results: Dict[int, PropertyReport] = {}
        self.threads: List[threading.Thread] = []
        self._lock = threading.Lock()

    def _run_slice(self, cases: List[int]):
        """Thread worker for a slice of case indices"""
        for case in cases:
            try:
                result = run_case(case, self.config)
            except Exception as e:
                log.exception(f"case {case} raised")
                result = self._error_report(case, f"{type(e).__name__}: {e}")
            with self._lock:
                self.results[case] = result

    def _error_report(self, case: int, detail: str) -> PropertyReport:
        """A one-case report whose only entry is the error that stopped the case"""
        try:
            first, second = case_generator(self.config.seed, case).pair()
        except Exception:
            first, second = NIL, NIL
        report = PropertyReport(self.config.seed, 1)
        report.failures.append(PropertyFailure(case, "error", first, second, detail))
        return report

    def run(self) -> PropertyReport:
        self.results.clear()
        self.threads.clear()
        workers = max(1, self.config.workers)
        indices = list(range(self.config.proptest_cases))
        for w in range(workers):
            thread = threading.Thread(target=self._run_slice, args=(indices[w::workers],))
            self.threads.append(thread)
        for thread in self.threads:
            thread.start()
        for thread in self.threads:
            thread.join()

        for case in indices:
            if case not in self.results:
                self.results[case] = self._error_report(case, "case did not run")
        assert len(self.results) == self.config.proptest_cases

        report = PropertyReport(self.config.seed, self.config.proptest_cases)
        for case in sorted(self.results):
            report.merge(self.results[case])
        log.info(f"property run finished: {len(report.failures)} failure(s)")
        return report


def run_properties(config: RunConfig) -> PropertyReport:
    return PropertyRunner(config).run()
