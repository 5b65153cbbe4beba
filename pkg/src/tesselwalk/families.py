"""Named graph families used by the CLI generator and the test suites."""

from __future__ import annotations

import numpy as np

from .errors import BadParams, UnknownFamily
from .multigraph import BipartiteMultigraph

# Edges of the four-vertex chain used throughout the worked examples (1-based).
_KITE_EDGES = ((1, 2), (1, 3), (2, 3), (2, 4), (3, 4))


def complete_bipartite(m: int, n: int) -> BipartiteMultigraph:
    if m < 1 or n < 1:
        raise BadParams("complete_bipartite needs m, n >= 1")
    return BipartiteMultigraph.from_pairs(m, n, [(u, v) for u in range(m) for v in range(n)])


def kite_chain() -> np.ndarray:
    """Simple random walk on the kite graph, column-stochastic, 0-based."""
    adj = np.zeros((4, 4))
    for a, b in _KITE_EDGES:
        adj[a - 1, b - 1] = adj[b - 1, a - 1] = 1.0
    return adj / adj.sum(axis=0)


def kite_cover() -> BipartiteMultigraph:
    """Bipartite double cover of the kite chain: 4 + 4 vertices, 10 edges."""
    pairs = []
    for a, b in _KITE_EDGES:
        pairs.append((a - 1, b - 1))
        pairs.append((b - 1, a - 1))
    return BipartiteMultigraph.from_pairs(4, 4, sorted(pairs))


def kite_cover_multiedge() -> BipartiteMultigraph:
    """:func:`kite_cover` plus a second parallel edge between 1 in V1 and 2 in V2."""
    return kite_cover().with_multiedge(0, 1)


def even_cycle(length: int) -> BipartiteMultigraph:
    """Cycle on ``length`` vertices; even positions form V1, odd positions V2."""
    if length < 4 or length % 2:
        raise BadParams("even_cycle needs an even length >= 4")
    k = length // 2
    pairs = [(i, i) for i in range(k)] + [(i, (i - 1) % k) for i in range(k)]
    return BipartiteMultigraph.from_pairs(k, k, sorted(pairs))


def random_bipartite(n1: int, n2: int, density: float, multiplicity: int, seed: int,
                     connected: bool = True) -> BipartiteMultigraph:
    """Seeded random bipartite multigraph.

    Every pair ``(u, v)`` is an edge with probability ``density``; each edge
    gets a multiplicity drawn uniformly from ``1..multiplicity``.  With
    ``connected`` a random spanning tree is laid down first.
    """
    if n1 < 1 or n2 < 1 or not 0.0 <= density <= 1.0 or multiplicity < 1:
        raise BadParams("random_bipartite needs n1, n2 >= 1, density in [0, 1], multiplicity >= 1")
    rng = np.random.default_rng(seed)
    present = rng.random((n1, n2)) < density
    if connected:
        # grow a spanning tree over the n1 + n2 vertices, always joining opposite parts
        order = [(1, u) for u in range(n1)] + [(2, v) for v in range(n2)]
        order = [order[i] for i in rng.permutation(len(order))]
        first = next(i for i, x in enumerate(order) if x[0] != order[0][0])
        order.insert(1, order.pop(first))
        placed = {1: [], 2: []}
        for part, x in order:
            other = placed[3 - part]
            if other:
                y = other[int(rng.integers(len(other)))]
                u, v = (x, y) if part == 1 else (y, x)
                present[u, v] = True
            placed[part].append(x)
    if not present.any():
        present[0, 0] = True
    mult = rng.integers(1, multiplicity + 1, size=(n1, n2))
    pairs = [(u, v) for u in range(n1) for v in range(n2) if present[u, v] for _ in range(mult[u, v])]
    return BipartiteMultigraph.from_pairs(n1, n2, pairs)


FAMILIES = {
    "complete_bipartite": complete_bipartite,
    "kite_cover": kite_cover,
    "kite_cover_multiedge": kite_cover_multiedge,
    "even_cycle": even_cycle,
    "random_bipartite": random_bipartite,
}


def generate(family: str, params=(), seed: int = 0) -> BipartiteMultigraph:
    """Build a family member from positional numeric ``params``."""
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise UnknownFamily(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    try:
        if family == "random_bipartite":
            n1, n2, density, multiplicity = params
            return builder(int(n1), int(n2), float(density), int(multiplicity), seed)
        if family == "complete_bipartite":
            m, n = params
            return builder(int(m), int(n))
        if family == "even_cycle":
            (length,) = params
            return builder(int(length))
        if params:
            raise BadParams(f"{family} takes no parameters")
        return builder()
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadParams):
            raise
        raise BadParams(f"bad parameters for {family}: {list(params)}") from None
