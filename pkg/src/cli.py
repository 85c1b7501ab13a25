"""
Command Module
Subcommand implementations returning an exit code and a report
"""
import json
import logging
from fractions import Fraction
from functools import wraps
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from src.config import RunConfig
from src.equivalence import PartitionAnalysis, check_equal, quotient, refine, spaces_equivalent
from src.errors import (BoundExceeded, ConfigError, IllFormedError, OpenTermError, OracleBoundExceeded,
                        PreconditionViolated, QueryError, RandomTermInCCSOracle, RccsSyntaxError,
                        SameBlockError)
from src.metrics import RefinementTracker
from src.oracle import ccs_equal
from src.proptest import run_properties
from src.semantics import (FORMAT_TAG, StateSpace, build_joint_state_space, build_state_space, to_dot,
                           to_json, to_text)
from src.syntax import CHANNEL_PATTERN, KEYWORDS, Prefix, Term, action, parse, print_term
from src.witness import (Purpose, classify, extract_witness, mass_curve, policy_to_json, unroll,
                         to_dot as tree_to_dot)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEQUAL = 1
EXIT_BOUND = 2
EXIT_INPUT = 3
EXIT_QUERY = 4

CommandResult = Tuple[int, str]


def _rule(title: str) -> List[str]:
    return ["=" * 60, title, "=" * 60]


def _json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=False) + "\n"


def guarded(command: Callable[..., CommandResult]) -> Callable[..., CommandResult]:
    """Map workbench errors to exit codes and a one-line report"""

    @wraps(command)
    def run(*args, **kwargs) -> CommandResult:
        try:
            return command(*args, **kwargs)
        except (RccsSyntaxError, IllFormedError, OpenTermError, RandomTermInCCSOracle, ConfigError, OSError) as e:
            return EXIT_INPUT, f"error: {e}\n"
        except (BoundExceeded, OracleBoundExceeded) as e:
            return EXIT_BOUND, f"error: {e}\n"
        except (QueryError, PreconditionViolated, SameBlockError) as e:
            return EXIT_QUERY, f"error: {e}\n"

    return run


def read_term(source: str, inline: bool = False) -> Term:
    """Parse a term given inline or as a UTF-8 file path"""
    if inline:
        return parse(source)
    return parse(Path(source).read_text(encoding="utf-8"))


def collect_terms(files: Sequence[str], inline: Sequence[str]) -> List[Term]:
    """Inline terms first, then file contents, in command-line order"""
    return [read_term(text, inline=True) for text in inline or []] + [read_term(path) for path in files or []]


# ===== check =====

@guarded
def cmd_check(t1: Term, t2: Term, config: RunConfig, ccs: bool = False) -> CommandResult:
    if ccs:
        equal = ccs_equal(t1, t2, config.state_bound)
        verdict = "EQUAL" if equal else "NOT EQUAL"
        if config.output_format == "json":
            return (EXIT_OK if equal else EXIT_UNEQUAL), _json({"format": FORMAT_TAG, "equal": equal, "checker": "ccs"})
        lines = _rule("CCS branching bisimilarity") + [
            f"First:  {print_term(t1)}", f"Second: {print_term(t2)}", f"Verdict: {verdict}", "=" * 60]
        return (EXIT_OK if equal else EXIT_UNEQUAL), "\n".join(lines) + "\n"

    result = check_equal(t1, t2, config.state_bound)
    code = EXIT_OK if result.equal else EXIT_UNEQUAL
    if config.output_format == "json":
        document = result.to_json()
        document["stats"] = result.stats.to_dict()
        return code, _json(document)
    if config.output_format == "dot":
        return code, to_dot(result.space)

    lines = _rule("Equality check") + [
        f"First:  {print_term(t1)}",
        f"Second: {print_term(t2)}",
        f"Verdict: {'EQUAL' if result.equal else 'NOT EQUAL'}",
        f"States: {len(result.space)}",
        f"Blocks: {len(result.partition)}",
        f"Iterations: {result.stats.iterations}",
    ]
    if result.evidence is not None:
        lines.append(f"Evidence: {result.evidence.kind}")
        lines.append(f"  {result.evidence}")
    lines.append("=" * 60)
    return code, "\n".join(lines) + "\n"


# ===== lts =====

@guarded
def cmd_lts(t: Term, config: RunConfig) -> CommandResult:
    space = build_state_space(t, config.state_bound)
    if config.output_format == "json":
        return EXIT_OK, _json(to_json(space))
    if config.output_format == "dot":
        return EXIT_OK, to_dot(space)
    return EXIT_OK, to_text(space)


# ===== minimize =====

@guarded
def cmd_minimize(terms: Sequence[Term], config: RunConfig, chart: Optional[str] = None) -> CommandResult:
    """Quotient of the (joint) state space of one or more terms under refine"""
    if not terms:
        raise QueryError("minimize needs at least one term")
    space = build_joint_state_space(list(terms), config.state_bound)
    tracker = RefinementTracker()
    partition = refine(space, tracker)
    stats = tracker.create_stats(" | ".join(print_term(t) for t in terms), len(space))
    minimal = quotient(space, partition)
    verified = all(
        spaces_equivalent(_rooted(space, r), _rooted(minimal, partition.block_of[r])) for r in space.roots
    )
    if chart:
        from src.dashboard import plot_refinement
        plot_refinement([stats], chart)
    code = EXIT_OK if verified else EXIT_UNEQUAL

    if config.output_format == "json":
        document = to_json(minimal)
        document["root_blocks"] = sorted(set(minimal.roots))
        document["verified"] = verified
        return code, _json(document)
    if config.output_format == "dot":
        return code, to_dot(minimal)
    lines = _rule("Minimization") + [
        f"States: {len(space)} -> {len(minimal)}",
        f"Root blocks: {len(set(minimal.roots))}",
        f"Iterations: {stats.iterations}",
        f"Quotient verified: {'yes' if verified else 'NO'}",
        "=" * 60,
    ]
    return code, "\n".join(lines) + "\n" + to_text(minimal)


def _rooted(space: StateSpace, root: int) -> StateSpace:
    """The same space with a single root"""
    return StateSpace(space.states, space.bundles, (root,), space.bound)


# ===== witness =====

def _query_action(text: str) -> Prefix:
    name = text[1:] if text.startswith("'") else text
    if text != "tau" and (not CHANNEL_PATTERN.fullmatch(name) or name in KEYWORDS):
        raise QueryError(f"unknown label {text!r}")
    return action(text)


def _query_q(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise QueryError(f"not a rational: {text!r}")
    if not 0 < q <= 1:
        raise QueryError(f"q = {q} outside (0,1]")
    return q


@guarded
def cmd_witness(t: Term, config: RunConfig, label: Optional[str] = None, q: Optional[str] = None,
                target: Optional[Term] = None, divergence: bool = False,
                chart: Optional[str] = None) -> CommandResult:
    """Witness epsilon-tree for an l-, q- or divergence query under the final partition"""
    if divergence == (label is not None or q is not None) or (label is not None and q is not None):
        raise QueryError("give exactly one of --label, --q, --divergence")
    roots = [t] if divergence else [t, _require(target)]
    space = build_joint_state_space(roots, config.state_bound)
    partition = refine(space)
    root = space.roots[0]
    if divergence:
        purpose = Purpose.divergence()
    else:
        target_block = partition.block_of[space.roots[1]]
        if label is not None:
            purpose = Purpose.ell(_query_action(label), target_block)
        else:
            purpose = Purpose.q_jump(_query_q(q), target_block)

    policy = extract_witness(space, partition, root, purpose)
    if policy is None:
        return EXIT_UNEQUAL, f"no witness: {print_term(t)} has no such epsilon-tree\n"
    curve = mass_curve(policy, space, config.depth)
    if chart:
        from src.dashboard import plot_mass_curve
        plot_mass_curve({purpose.kind.value: curve}, chart)

    if config.output_format == "json":
        return EXIT_OK, _json(policy_to_json(policy))
    if config.output_format == "dot":
        return EXIT_OK, tree_to_dot(unroll(policy, config.depth, space), space)
    kind = classify(policy, space)
    lines = _rule("Witness policy") + [
        f"Root: s{root} {print_term(space.term(root))}",
        f"Purpose: {json.dumps(purpose.to_json())}",
        f"Tree: {kind.kind.value}",
        f"Finite mass at depth {config.depth}: {curve[-1]}",
        "Decisions:",
    ]
    for state, decision in sorted(policy.decide.items()):
        lines.append(f"  s{state} {print_term(space.term(state))}: {decision}")
    lines.append("=" * 60)
    return EXIT_OK, "\n".join(lines) + "\n"


def _require(target: Optional[Term]) -> Term:
    if target is None:
        raise QueryError("--target is required for label and q queries")
    return target


# ===== diverge =====

@guarded
def cmd_diverge(t: Term, config: RunConfig) -> CommandResult:
    space = build_state_space(t, config.state_bound)
    partition = refine(space)
    divergent = PartitionAnalysis(space, partition).has_divergent_tree(space.root)
    if config.output_format == "json":
        return EXIT_OK, _json({"format": FORMAT_TAG, "term": print_term(t), "divergent": divergent})
    verdict = "divergent ε-tree exists" if divergent else "no divergent ε-tree"
    return EXIT_OK, f"{print_term(t)}: {verdict}\n"


# ===== proptest =====

@guarded
def cmd_proptest(config: RunConfig) -> CommandResult:
    report = run_properties(config)
    if config.output_format == "json":
        document = {
            "format": FORMAT_TAG,
            "seed": report.seed,
            "cases": report.cases,
            "checked": report.checked,
            "equal_pairs": report.equal_pairs,
            "skipped": report.skipped,
            "failures": [str(f) for f in report.failures],
        }
        return (EXIT_OK if report.passed else EXIT_UNEQUAL), _json(document)
    return (EXIT_OK if report.passed else EXIT_UNEQUAL), str(report)
