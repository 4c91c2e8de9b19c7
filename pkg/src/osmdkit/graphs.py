"""Directed feedback graphs: observability, independence number, revealer sums.

An edge (i, j) means "playing arm i reveals the loss of arm j".  The
independence number is taken on the undirected support without self-loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import math

import numpy as np

EXACT_INDEPENDENCE_LIMIT = 24


@dataclass(frozen=True)
class GraphSpec:
    k: int
    edges: frozenset  # of (i, j) pairs, 0-indexed
    observes: tuple = field(init=False)
    revealers: tuple = field(init=False)

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < self.k and 0 <= j < self.k):
                raise ValueError(f"edge ({i}, {j}) outside vertex range [0, {self.k})")
        obs = [set() for _ in range(self.k)]
        rev = [set() for _ in range(self.k)]
        for i, j in self.edges:
            obs[i].add(j)
            rev[j].add(i)
        object.__setattr__(self, "observes", tuple(frozenset(s) for s in obs))
        object.__setattr__(self, "revealers", tuple(frozenset(s) for s in rev))

    def has_self_loop(self, i: int) -> bool:
        return i in self.revealers[i]


def make_graph(k: int, edges) -> GraphSpec:
    return GraphSpec(k=k, edges=frozenset((int(i), int(j)) for i, j in edges))


def bandit_graph(k: int) -> GraphSpec:
    return make_graph(k, [(i, i) for i in range(k)])


def full_information_graph(k: int) -> GraphSpec:
    return make_graph(k, [(i, j) for i in range(k) for j in range(k)])


def complete_graph(k: int, self_loops: bool = False) -> GraphSpec:
    edges = [(i, j) for i in range(k) for j in range(k) if i != j]
    if self_loops:
        edges += [(i, i) for i in range(k)]
    return make_graph(k, edges)


def cycle_graph(k: int, self_loops: bool = True) -> GraphSpec:
    edges = []
    for i in range(k):
        edges.append((i, (i + 1) % k))
        edges.append(((i + 1) % k, i))
        if self_loops:
            edges.append((i, i))
    return make_graph(k, edges)


def erdos_renyi_graph(
    k: int, prob: float, rng: np.random.Generator, self_loops: bool = True
) -> GraphSpec:
    edges = [(i, i) for i in range(k)] if self_loops else []
    for i in range(k):
        for j in range(k):
            if i != j and rng.random() < prob:
                edges.append((i, j))
    return make_graph(k, edges)


def load_graph(path) -> GraphSpec:
    """Edge-list file: first line k, then 1-indexed 'i j' pairs."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    k = int(lines[0])
    edges = []
    for ln in lines[1:]:
        i, j = ln.split()
        edges.append((int(i) - 1, int(j) - 1))
    return make_graph(k, edges)


def is_strongly_observable(g: GraphSpec) -> bool:
    """Every vertex is revealed by itself or by all other vertices."""
    for i in range(g.k):
        if g.has_self_loop(i):
            continue
        if all(j in g.revealers[i] for j in range(g.k) if j != i):
            continue
        return False
    return True


def _undirected_adjacency(g: GraphSpec) -> list[int]:
    """Bitmask adjacency of the symmetrised graph without self-loops."""
    adj = [0] * g.k
    for i, j in g.edges:
        if i != j:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
    return adj


class IndependenceNumber(NamedTuple):
    value: int
    exact: bool


def independence_number(g: GraphSpec) -> IndependenceNumber:
    """Largest set of pairwise non-adjacent vertices.

    Exact branch-and-bound up to EXACT_INDEPENDENCE_LIMIT vertices, greedy
    lower bound beyond that.
    """
    adj = _undirected_adjacency(g)
    if g.k > EXACT_INDEPENDENCE_LIMIT:
        return IndependenceNumber(_greedy_independent(adj), exact=False)

    order = sorted(range(g.k), key=lambda v: -bin(adj[v]).count("1"))
    best = 0

    def grow(candidates: int, size: int):
        nonlocal best
        if size + bin(candidates).count("1") <= best:
            return
        if candidates == 0:
            best = max(best, size)
            return
        for v in order:
            bit = 1 << v
            if candidates & bit:
                grow(candidates & ~bit & ~adj[v], size + 1)
                candidates &= ~bit
                if size + bin(candidates).count("1") <= best:
                    return
        best = max(best, size)

    grow((1 << g.k) - 1, 0)
    return IndependenceNumber(best, exact=True)


def _greedy_independent(adj: list[int]) -> int:
    remaining = set(range(len(adj)))
    count = 0
    while remaining:
        v = min(remaining, key=lambda u: bin(adj[u]).count("1"))
        count += 1
        remaining.discard(v)
        remaining -= {u for u in remaining if adj[v] & (1 << u)}
    return count


def revealer_ratio_sum(g: GraphSpec, p: np.ndarray) -> float:
    """sum_i p_i / (mass of p on the revealers of i)."""
    p = np.asarray(p, dtype=float)
    total = 0.0
    for i in range(g.k):
        rev = g.revealers[i]
        if not rev:
            raise ValueError(f"vertex {i} has no revealers; ratio undefined")
        total += p[i] / sum(p[j] for j in rev)
    return total


def revealer_ratio_bound(g: GraphSpec, p: np.ndarray) -> float:
    """4 a log(4k / (a min_i p_i)) with a the independence number."""
    p = np.asarray(p, dtype=float)
    a = independence_number(g).value
    return 4.0 * a * math.log(4.0 * g.k / (a * float(np.min(p))))
