"""
Error Types Module
Exceptions raised by the parser, the semantics and the equivalence checkers
"""
from enum import Enum


class RccsError(Exception):
    """Base class for every error raised by the workbench"""


class RccsSyntaxError(RccsError):
    """Input text does not match the term grammar"""

    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"syntax error at position {position}: {message}")


class IllFormedReason(Enum):
    """Reasons a syntactically valid term is rejected"""
    PROB_SUM_NOT_ONE = "ProbSumNotOne"
    PROB_OUT_OF_RANGE = "ProbOutOfRange"
    UNGUARDED_VARIABLE = "UnguardedVariable"
    SINGLETON_RANDOM_CHOICE = "SingletonRandomChoice"


class IllFormedError(RccsError):
    """Term violates a well-formedness condition"""

    def __init__(self, reason: IllFormedReason, detail: str = ""):
        self.reason = reason
        self.detail = detail
        message = f"ill-formed term ({reason.value})"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class OpenTermError(RccsError):
    """Operation needs a process but the term has free variables"""


class BoundExceeded(RccsError):
    """State-space exploration hit the configured state bound"""

    def __init__(self, bound: int):
        self.bound = bound
        super().__init__(f"state space exceeds the bound of {bound} states")


class VisibleInPathError(RccsError):
    """A silent-sequence probability was asked for a path with a visible label"""


class PreconditionViolated(RccsError):
    """A query was made for a vacuous (tau, own class) pair"""


class SameBlockError(RccsError):
    """A q-transition or weighted probability was asked for the source's own block"""


class OracleBoundExceeded(RccsError):
    """State space too large for brute-force partition enumeration"""

    def __init__(self, bound: int):
        self.bound = bound
        super().__init__(f"oracle limited to {bound} states")


class RandomTermInCCSOracle(RccsError):
    """The CCS baseline checker was given a term with a random choice"""


class ConfigError(RccsError):
    """Invalid run configuration"""


class QueryError(RccsError):
    """Unknown label or class in a command-line query"""
