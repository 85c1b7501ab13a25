"""
Term Syntax Module
AST, concrete grammar, parser, printer and binders for CCS / RCCS terms
"""
import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple, Union

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from src.errors import IllFormedError, IllFormedReason, RccsSyntaxError

log = logging.getLogger(__name__)

CHANNEL_PATTERN = re.compile(r"[a-z][A-Za-z0-9_]*")
VARIABLE_PATTERN = re.compile(r"[A-Z][A-Za-z0-9_]*")
KEYWORDS = frozenset({"tau", "mu", "new"})


class Polarity(Enum):
    """Direction of a prefix action"""
    INPUT = "input"
    OUTPUT = "output"
    TAU = "tau"


@dataclass(frozen=True)
class Prefix:
    """An action a, 'a (co-name) or tau"""
    polarity: Polarity
    channel: Optional[str] = None

    @property
    def is_tau(self) -> bool:
        return self.polarity is Polarity.TAU

    def complement(self) -> "Prefix":
        """Co-action: a <-> 'a (tau has no complement)"""
        if self.is_tau:
            raise ValueError("tau has no complement")
        flipped = Polarity.OUTPUT if self.polarity is Polarity.INPUT else Polarity.INPUT
        return Prefix(flipped, self.channel)

    def __str__(self) -> str:
        if self.is_tau:
            return "tau"
        if self.polarity is Polarity.OUTPUT:
            return f"'{self.channel}"
        return self.channel


TAU = Prefix(Polarity.TAU)


def action(text: str) -> Prefix:
    """Build a Prefix from its ASCII form ('tau', 'a' or "'a")"""
    if text == "tau":
        return TAU
    if text.startswith("'"):
        return Prefix(Polarity.OUTPUT, text[1:])
    return Prefix(Polarity.INPUT, text)


class Term:
    """Base class of all AST nodes; every node is an immutable value"""

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Choice(Term):
    """Nondeterministic sum of prefixed terms; no branches is 0"""
    branches: Tuple[Tuple[Prefix, Term], ...] = ()


@dataclass(frozen=True)
class RandomChoice(Term):
    """Random silent choice (+) p_i tau.T_i"""
    branches: Tuple[Tuple[Fraction, Term], ...]


@dataclass(frozen=True)
class Par(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Restrict(Term):
    """Localization (new a) T, binding both a and 'a"""
    channel: str
    body: Term


@dataclass(frozen=True)
class Fix(Term):
    var: str
    body: Term


NIL = Choice(())


# ===== Convenience constructors =====

def zero() -> Choice:
    return NIL


def prefix(act: Union[str, Prefix], cont: Optional[Term] = None) -> Choice:
    """act.cont as a one-branch Choice (cont defaults to 0)"""
    if isinstance(act, str):
        act = action(act)
    return Choice(((act, cont if cont is not None else NIL),))


def tau(cont: Optional[Term] = None) -> Choice:
    return prefix(TAU, cont)


def choice(*summands: Choice) -> Choice:
    """Merge prefixed terms into one sum"""
    branches = []
    for summand in summands:
        if not isinstance(summand, Choice):
            raise TypeError(f"summand must be a prefixed term, got {summand!r}")
        branches.extend(summand.branches)
    return Choice(tuple(branches))


def rand(*pairs: Tuple[Union[Fraction, str], Term]) -> RandomChoice:
    """Random choice from (probability, continuation) pairs; probabilities may be 'n/d' strings"""
    return RandomChoice(tuple((Fraction(p), cont) for p, cont in pairs))


def par(first: Term, *rest: Term) -> Term:
    """Left-nested parallel composition"""
    result = first
    for term in rest:
        result = Par(result, term)
    return result


# ===== Parser =====

GRAMMAR = r"""
    ?start: term

    ?term: par
         | choice
         | random

    choice: prefixed ("+" prefixed)+
    random: rbranch ("(+)" rbranch)*
    rbranch: "(" rational ")" "tau" "." unary
    rational: INT "/" INT

    ?par: unary
        | par "|" unary

    ?unary: prefixed
          | restrict
          | fix
          | atom

    prefixed: action "." unary
            | action
    restrict: "(" "new" CHAN ")" unary
    fix: "mu" PVAR "." unary

    ?atom: zero
         | var
         | "(" term ")"
    zero: "0"
    var: PVAR

    action: CHAN        -> input_action
          | "'" CHAN    -> output_action
          | "tau"       -> tau_action

    CHAN: /(?!(?:tau|mu|new)(?![A-Za-z0-9_]))[a-z][A-Za-z0-9_]*/
    PVAR: /[A-Z][A-Za-z0-9_]*/

    %import common.INT
    %import common.WS
    %ignore WS
"""

_parser = Lark(GRAMMAR, start="start", parser="earley")


class _TermBuilder(Transformer):
    """Turns the lark parse tree into Term values"""

    def zero(self, _items):
        return NIL

    def var(self, items):
        return Var(str(items[0]))

    def input_action(self, items):
        return Prefix(Polarity.INPUT, str(items[0]))

    def output_action(self, items):
        return Prefix(Polarity.OUTPUT, str(items[0]))

    def tau_action(self, _items):
        return TAU

    def prefixed(self, items):
        cont = items[1] if len(items) > 1 else NIL
        return Choice(((items[0], cont),))

    def choice(self, items):
        return Choice(tuple(branch for summand in items for branch in summand.branches))

    def rational(self, items):
        numerator, denominator = int(items[0]), int(items[1])
        if denominator == 0:
            raise IllFormedError(IllFormedReason.PROB_OUT_OF_RANGE, f"{numerator}/0")
        return Fraction(numerator, denominator)

    def rbranch(self, items):
        return (items[0], items[1])

    def random(self, items):
        return RandomChoice(tuple(items))

    def par(self, items):
        return Par(items[0], items[1])

    def restrict(self, items):
        return Restrict(str(items[0]), items[1])

    def fix(self, items):
        return Fix(str(items[0]), items[1])


def parse(text: str) -> Term:
    """
    Parse a term and check that it is well formed

    Args:
        text: Term in the ASCII grammar ("mu X. (tau.a.0 + tau.X)")

    Returns:
        The term's AST

    Raises:
        RccsSyntaxError: text does not match the grammar
        IllFormedError: probabilities or guardedness are violated
    """
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as err:
        position = getattr(err, "pos_in_stream", None)
        if position is None or position < 0:
            position = len(text)
        raise RccsSyntaxError(position, str(err).strip().splitlines()[0]) from None
    try:
        term = _TermBuilder().transform(tree)
    except VisitError as err:
        raise err.orig_exc from None
    check_well_formed(term)
    return term


# ===== Printer =====

def print_term(t: Term) -> str:
    """Canonical text of a term; parse(print_term(t)) == t"""
    if isinstance(t, Choice) and len(t.branches) >= 2:
        return " + ".join(_print_prefixed(p, cont) for p, cont in t.branches)
    if isinstance(t, RandomChoice):
        return " (+) ".join(
            f"({p.numerator}/{p.denominator})tau.{_print_unary(cont)}"
            for p, cont in t.branches
        )
    if isinstance(t, Par):
        left = print_term(t.left) if isinstance(t.left, Par) else _print_unary(t.left)
        return f"{left} | {_print_unary(t.right)}"
    return _print_unary(t)


def _print_prefixed(p: Prefix, cont: Term) -> str:
    return f"{p}.{_print_unary(cont)}"


def _print_unary(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Choice) and not t.branches:
        return "0"
    if isinstance(t, Choice) and len(t.branches) == 1:
        return _print_prefixed(*t.branches[0])
    if isinstance(t, Restrict):
        return f"(new {t.channel}){_print_unary(t.body)}"
    if isinstance(t, Fix):
        return f"mu {t.var}. {_print_unary(t.body)}"
    return f"({print_term(t)})"


# ===== Free names =====

@lru_cache(maxsize=65536)
def free_vars(t: Term) -> FrozenSet[str]:
    """Process variables not bound by an enclosing mu"""
    if isinstance(t, Var):
        return frozenset({t.name})
    if isinstance(t, (Choice, RandomChoice)):
        return frozenset().union(*(free_vars(cont) for _, cont in t.branches))
    if isinstance(t, Par):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, Restrict):
        return free_vars(t.body)
    if isinstance(t, Fix):
        return free_vars(t.body) - {t.var}
    raise TypeError(f"not a term: {t!r}")


@lru_cache(maxsize=65536)
def free_channels(t: Term) -> FrozenSet[str]:
    """Channels not bound by an enclosing restriction"""
    if isinstance(t, Var):
        return frozenset()
    if isinstance(t, Choice):
        names = {p.channel for p, _ in t.branches if not p.is_tau}
        return frozenset(names).union(*(free_channels(cont) for _, cont in t.branches))
    if isinstance(t, RandomChoice):
        return frozenset().union(*(free_channels(cont) for _, cont in t.branches))
    if isinstance(t, Par):
        return free_channels(t.left) | free_channels(t.right)
    if isinstance(t, Restrict):
        return free_channels(t.body) - {t.channel}
    if isinstance(t, Fix):
        return free_channels(t.body)
    raise TypeError(f"not a term: {t!r}")


def _all_names(t: Term) -> Set[str]:
    """Every variable and channel name occurring in t, bound or free"""
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Choice):
        names = {p.channel for p, _ in t.branches if not p.is_tau}
        for _, cont in t.branches:
            names |= _all_names(cont)
        return names
    if isinstance(t, RandomChoice):
        names: Set[str] = set()
        for _, cont in t.branches:
            names |= _all_names(cont)
        return names
    if isinstance(t, Par):
        return _all_names(t.left) | _all_names(t.right)
    if isinstance(t, Restrict):
        return _all_names(t.body) | {t.channel}
    return _all_names(t.body) | {t.var}


def _fresh(stem: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    n = 1
    while f"{stem}_{n}" in avoid:
        n += 1
    return f"{stem}_{n}"


def is_process(t: Term) -> bool:
    return not free_vars(t)


def is_ccs(t: Term) -> bool:
    """True when no random choice occurs anywhere in t"""
    if isinstance(t, RandomChoice):
        return False
    if isinstance(t, Choice):
        return all(is_ccs(cont) for _, cont in t.branches)
    if isinstance(t, Par):
        return is_ccs(t.left) and is_ccs(t.right)
    if isinstance(t, (Restrict, Fix)):
        return is_ccs(t.body)
    return True


def is_finite_state(t: Term) -> bool:
    """Neither composition nor localization occurs in t"""
    if isinstance(t, (Par, Restrict)):
        return False
    if isinstance(t, (Choice, RandomChoice)):
        return all(is_finite_state(cont) for _, cont in t.branches)
    if isinstance(t, Fix):
        return is_finite_state(t.body)
    return True


# ===== Substitution =====

def rename_channel(t: Term, old: str, new_name: str) -> Term:
    """Rename free occurrences of channel old; new_name must not be bound in t"""
    if isinstance(t, Var):
        return t
    if isinstance(t, Choice):
        branches = []
        for p, cont in t.branches:
            if p.channel == old:
                p = Prefix(p.polarity, new_name)
            branches.append((p, rename_channel(cont, old, new_name)))
        return Choice(tuple(branches))
    if isinstance(t, RandomChoice):
        return RandomChoice(tuple((p, rename_channel(cont, old, new_name)) for p, cont in t.branches))
    if isinstance(t, Par):
        return Par(rename_channel(t.left, old, new_name), rename_channel(t.right, old, new_name))
    if isinstance(t, Restrict):
        if t.channel == old:
            return t
        return Restrict(t.channel, rename_channel(t.body, old, new_name))
    return Fix(t.var, rename_channel(t.body, old, new_name))


def substitute(t: Term, name: str, replacement: Term) -> Term:
    """
    Replace the free occurrences of variable name by replacement

    Bound variables and channels of t are renamed when they would capture
    a free name of replacement.
    """
    return _substitute(t, name, replacement, free_vars(replacement), free_channels(replacement))


def _substitute(t: Term, name: str, r: Term, r_vars: FrozenSet[str], r_chans: FrozenSet[str]) -> Term:
    if name not in free_vars(t):
        return t
    if isinstance(t, Var):
        return r
    if isinstance(t, Choice):
        return Choice(tuple((p, _substitute(cont, name, r, r_vars, r_chans)) for p, cont in t.branches))
    if isinstance(t, RandomChoice):
        return RandomChoice(tuple((p, _substitute(cont, name, r, r_vars, r_chans)) for p, cont in t.branches))
    if isinstance(t, Par):
        return Par(_substitute(t.left, name, r, r_vars, r_chans),
                   _substitute(t.right, name, r, r_vars, r_chans))
    if isinstance(t, Restrict):
        channel, body = t.channel, t.body
        if channel in r_chans:
            fresh = _fresh(channel, _all_names(body) | r_chans | r_vars)
            body = rename_channel(body, channel, fresh)
            channel = fresh
        return Restrict(channel, _substitute(body, name, r, r_vars, r_chans))
    # Fix binding a different variable (name is free in the body)
    bound, body = t.var, t.body
    if bound in r_vars:
        fresh = _fresh(bound, _all_names(body) | r_vars | r_chans)
        body = _substitute(body, bound, Var(fresh), frozenset({fresh}), frozenset())
        bound = fresh
    return Fix(bound, _substitute(body, name, r, r_vars, r_chans))


def unfold(t: Fix) -> Term:
    """One-step unfolding T{mu X.T/X}"""
    return substitute(t.body, t.var, t)


# ===== Alpha normalization =====

def _canonical_offset(names: Iterable[str], stem: str) -> int:
    taken = [int(n[len(stem):]) for n in names if re.fullmatch(stem + r"\d+", n)]
    return max(taken) + 1 if taken else 0


def alpha_normalize(t: Term) -> Term:
    """
    Rename bound variables to X<k> and bound channels to c<k>

    k is the binder's nesting depth among binders of the same kind, shifted
    past any free name of the same shape, so alpha-equivalent terms map to
    identical ASTs.
    """
    var_offset = _canonical_offset(free_vars(t), "X")
    chan_offset = _canonical_offset(free_channels(t), "c")
    return _normalize(t, {}, {}, var_offset, chan_offset)


def _normalize(t: Term, venv: Dict[str, str], cenv: Dict[str, str], vnext: int, cnext: int) -> Term:
    if isinstance(t, Var):
        return Var(venv.get(t.name, t.name))
    if isinstance(t, Choice):
        branches = []
        for p, cont in t.branches:
            if not p.is_tau and p.channel in cenv:
                p = Prefix(p.polarity, cenv[p.channel])
            branches.append((p, _normalize(cont, venv, cenv, vnext, cnext)))
        return Choice(tuple(branches))
    if isinstance(t, RandomChoice):
        return RandomChoice(tuple((p, _normalize(cont, venv, cenv, vnext, cnext)) for p, cont in t.branches))
    if isinstance(t, Par):
        return Par(_normalize(t.left, venv, cenv, vnext, cnext),
                   _normalize(t.right, venv, cenv, vnext, cnext))
    if isinstance(t, Restrict):
        canonical = f"c{cnext}"
        return Restrict(canonical, _normalize(t.body, venv, {**cenv, t.channel: canonical}, vnext, cnext + 1))
    canonical = f"X{vnext}"
    return Fix(canonical, _normalize(t.body, {**venv, t.var: canonical}, cenv, vnext + 1, cnext))


# ===== Well-formedness =====

def _unguarded_vars(t: Term) -> FrozenSet[str]:
    """Free variables with an occurrence not under a prefix or a random branch"""
    if isinstance(t, Var):
        return frozenset({t.name})
    if isinstance(t, (Choice, RandomChoice)):
        return frozenset()
    if isinstance(t, Par):
        return _unguarded_vars(t.left) | _unguarded_vars(t.right)
    if isinstance(t, Restrict):
        return _unguarded_vars(t.body)
    return _unguarded_vars(t.body) - {t.var}


def check_well_formed(t: Term) -> None:
    """
    Raise IllFormedError unless every random choice has at least two branches
    with probabilities in (0,1) summing to 1 and every fixpoint is guarded
    """
    if isinstance(t, Var):
        return
    if isinstance(t, Choice):
        for p, cont in t.branches:
            if not p.is_tau:
                _check_name(p.channel, CHANNEL_PATTERN)
            check_well_formed(cont)
    elif isinstance(t, RandomChoice):
        if len(t.branches) < 2:
            raise IllFormedError(IllFormedReason.SINGLETON_RANDOM_CHOICE, print_term(t))
        for p, cont in t.branches:
            if not 0 < p < 1:
                raise IllFormedError(IllFormedReason.PROB_OUT_OF_RANGE, str(p))
            check_well_formed(cont)
        total = sum(p for p, _ in t.branches)
        if total != 1:
            raise IllFormedError(IllFormedReason.PROB_SUM_NOT_ONE, f"probabilities sum to {total}")
    elif isinstance(t, Par):
        check_well_formed(t.left)
        check_well_formed(t.right)
    elif isinstance(t, Restrict):
        _check_name(t.channel, CHANNEL_PATTERN)
        check_well_formed(t.body)
    elif isinstance(t, Fix):
        if t.var in _unguarded_vars(t.body):
            raise IllFormedError(IllFormedReason.UNGUARDED_VARIABLE,
                                 f"{t.var} is unguarded in {print_term(t)}")
        check_well_formed(t.body)
    else:
        raise TypeError(f"not a term: {t!r}")


def _check_name(name: Optional[str], pattern: re.Pattern) -> None:
    if name is None or not pattern.fullmatch(name) or name in KEYWORDS:
        raise ValueError(f"invalid name {name!r}")
