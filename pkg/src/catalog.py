"""
Process Catalog Module
Named processes used by the worked examples, demos and test fixtures
"""
from typing import Dict, List

from src.semantics import BundleKind, step
from src.syntax import Term, parse

OMEGA_A = "mu X. (tau.a + tau.X)"
OMEGA_HALF = "mu X. ((1/2)tau.X (+) (1/2)tau.X)"
OMEGA_HALF_A = "mu X. ((1/2)tau.a (+) (1/2)tau.X)"
G = "mu X. ((1/3)tau.(a + tau.X) (+) (2/3)tau.X)"
G_A = f"a + tau.{G}"
H = "mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))"
H_A = f"a + tau.{H}"
H_B = f"b + tau.{H}"
E = "mu X. (a + b + tau.X)"

CATALOG: Dict[str, str] = {
    "omega_a": OMEGA_A,
    "omega_half": OMEGA_HALF,
    "omega_half_a": OMEGA_HALF_A,
    "g": G,
    "g_a": G_A,
    "h": H,
    "h_a": H_A,
    "h_b": H_B,
    "e": E,
}

# Pairs the worked examples declare equal
EQUAL_PAIRS = [
    ("omega_half_a", "a"),
    ("g", "g_a"),
    ("h", "h_a"),
    ("h", "h_b"),
    ("h", "e"),
]


def term(name: str) -> Term:
    """Parse a catalog entry by name, or any term text"""
    return parse(CATALOG.get(name, name))


def probabilistic_ring(k: int) -> str:
    """mu X. ((1/2)tau.a1 (+) (1/2)tau.( ... ((1/2)tau.ak (+) (1/2)tau.X) ... ))"""
    if k < 1:
        raise ValueError("ring size must be positive")
    body = "X"
    for i in range(k, 0, -1):
        body = f"((1/2)tau.a{i} (+) (1/2)tau.{body})"
    return f"mu X. {body}"


def nondeterministic_ring(k: int) -> str:
    """mu X. (a1 + tau.(a2 + tau.( ... (ak + tau.X) ... )))"""
    if k < 1:
        raise ValueError("ring size must be positive")
    body = "X"
    for i in range(k, 0, -1):
        body = f"(a{i} + tau.{body})"
    return f"mu X. {body}"


def ring_nodes(ring: Term, k: int) -> List[Term]:
    """
    The k nodes of a ring, starting at the ring term itself

    Each node's successor is the target of its last silent bundle branch.
    """
    nodes = [ring]
    while len(nodes) < k:
        silent = [b for b in step(nodes[-1]) if b.kind is not BundleKind.VISIBLE]
        nodes.append(silent[-1].branches[-1][1])
    return nodes
