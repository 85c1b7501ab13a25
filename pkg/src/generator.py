"""
Term Generator Module
Seeded random processes, candidate equal pairs and closing contexts
"""
import random
from fractions import Fraction
from typing import List, Sequence, Tuple

from src.syntax import (NIL, TAU, Choice, Fix, Par, Polarity, Prefix, RandomChoice, Restrict, Term, Var,
                        check_well_formed, free_channels)

PROBABILITIES = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4))
DEFAULT_CHANNELS = ("a", "b")


class TermGenerator:
    """
    Random closed, well-formed terms with small state spaces

    Recursion nests at most max_depth binders, at most two parallel
    components appear, and random choices are binary with probabilities
    drawn from PROBABILITIES.
    """

    def __init__(self, seed: int, channels: Sequence[str] = DEFAULT_CHANNELS,
                 max_depth: int = 3, allow_random: bool = True):
        self.rng = random.Random(seed)
        self.channels = tuple(channels)
        self.max_depth = max_depth
        self.allow_random = allow_random
        self._binders = 0

    # ----- building blocks -----

    def action(self, allow_tau: bool = True) -> Prefix:
        options = [Prefix(Polarity.INPUT, c) for c in self.channels]
        options += [Prefix(Polarity.OUTPUT, c) for c in self.channels]
        if allow_tau:
            options += [TAU, TAU]
        return self.rng.choice(options)

    def probability(self) -> Fraction:
        return self.rng.choice(PROBABILITIES)

    def sequential(self, depth: int, scope: Tuple[str, ...] = ()) -> Term:
        """A term without parallel composition or restriction"""
        roll = self.rng.random()
        if depth <= 0 or roll < 0.2:
            if scope and self.rng.random() < 0.5:
                return Choice(((self.action(), Var(self.rng.choice(scope))),))
            return NIL if self.rng.random() < 0.4 else Choice(((self.action(), NIL),))
        if roll < 0.55:
            width = self.rng.choice((1, 1, 2))
            return Choice(tuple((self.action(), self._continuation(depth - 1, scope)) for _ in range(width)))
        if roll < 0.75 and self.allow_random:
            p = self.probability()
            return RandomChoice(((p, self._continuation(depth - 1, scope)),
                                 (1 - p, self._continuation(depth - 1, scope))))
        if self._binders < self.max_depth:
            name = f"X{len(scope)}"
            self._binders += 1
            body = self.guarded(depth - 1, scope + (name,))
            return Fix(name, body)
        return Choice(((self.action(), self._continuation(depth - 1, scope)),))

    def guarded(self, depth: int, scope: Tuple[str, ...]) -> Term:
        """A prefixed sum or random choice; variables only occur under a prefix"""
        if self.allow_random and self.rng.random() < 0.4:
            p = self.probability()
            return RandomChoice(((p, self._continuation(depth, scope)),
                                 (1 - p, self._continuation(depth, scope))))
        width = self.rng.choice((1, 2, 2))
        return Choice(tuple((self.action(), self._continuation(depth, scope)) for _ in range(width)))

    def _continuation(self, depth: int, scope: Tuple[str, ...]) -> Term:
        if scope and self.rng.random() < 0.45:
            return Var(self.rng.choice(scope))
        return self.sequential(depth, scope)

    # ----- processes -----

    def process(self, depth: int = 3) -> Term:
        """A closed process, occasionally a composition or a localization"""
        self._binders = 0
        roll = self.rng.random()
        if roll < 0.15:
            left = self.sequential(depth - 1)
            self._binders = 0
            term = Par(left, self.sequential(depth - 1))
        elif roll < 0.25:
            term = Restrict(self.rng.choice(self.channels), self.sequential(depth))
        else:
            term = self.sequential(depth)
        check_well_formed(term)
        return term

    def guarded_summand(self) -> Choice:
        """One prefixed summand g for the + context"""
        self._binders = 0
        return Choice(((self.action(), self.sequential(1)),))

    def context_process(self) -> Term:
        """A small process to compose in parallel with a pair"""
        self._binders = 0
        return self.sequential(2)

    def pair(self) -> Tuple[Term, Term]:
        """A candidate pair, built to be equivalent more often than not"""
        a = self.process()
        roll = self.rng.random()
        if roll < 0.2:
            return a, a
        if roll < 0.45 and self.allow_random:
            p = self.probability()
            loop = Fix("Y", RandomChoice(((p, a), (1 - p, Var("Y")))))
            return a, loop
        if roll < 0.6:
            return a, Par(a, NIL)
        if roll < 0.75:
            unused = self.fresh_channel(a)
            return a, Restrict(unused, a)
        return a, self.process()

    def fresh_channel(self, *terms: Term) -> str:
        taken = set()
        for t in terms:
            taken |= free_channels(t)
        n = 0
        while f"z{n}" in taken:
            n += 1
        return f"z{n}"

    def choose_channel(self) -> str:
        return self.rng.choice(self.channels)


def generate_pairs(seed: int, count: int, allow_random: bool = True) -> List[Tuple[Term, Term]]:
    """count candidate pairs from one seed"""
    generator = TermGenerator(seed, allow_random=allow_random)
    return [generator.pair() for _ in range(count)]


def case_generator(seed: int, case: int, allow_random: bool = True) -> TermGenerator:
    """Generator for one property case; each case has its own derived seed"""
    return TermGenerator(seed * 1_000_003 + case, allow_random=allow_random)
