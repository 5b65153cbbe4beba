"""Bipartite multigraphs, their line graphs and 2-tessellation covers.

A bipartite multigraph has parts ``V1 = {0..n1-1}`` and ``V2 = {0..n2-1}``;
each multiedge is a triple ``(u, v, e)`` where ``e`` numbers the parallel
edges between ``u`` and ``v`` densely from zero.  Its line graph has one
vertex per multiedge, and the cliques ``alpha_u`` (multiedges at ``u``) and
``beta_v`` (multiedges at ``v``) form the two tessellations that cover it.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CoverMismatch, EmptyMarkedSet, InvalidGraph, ParseError

#: Largest part size accepted when a graph is built or loaded.
MAX_PART_SIZE = 256

Multiedge = tuple[int, int, int]


@dataclass(frozen=True)
class BipartiteMultigraph:
    """Immutable bipartite multigraph with labeled multiedges.

    Multiedges are stored sorted lexicographically, which makes the
    multiedge index a canonical address used by every other module.
    """

    n1: int
    n2: int
    multiedges: tuple[Multiedge, ...]

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidGraph(f"both parts must be nonempty, got n1={self.n1}, n2={self.n2}")
        if self.n1 > MAX_PART_SIZE or self.n2 > MAX_PART_SIZE:
            raise InvalidGraph(f"part sizes are capped at {MAX_PART_SIZE}")
        edges = tuple(sorted((int(u), int(v), int(e)) for u, v, e in self.multiedges))
        if not edges:
            raise InvalidGraph("a multigraph needs at least one multiedge")
        if len(set(edges)) != len(edges):
            raise InvalidGraph("duplicate multiedge label")
        counts: Counter = Counter()
        for u, v, e in edges:
            if not (0 <= u < self.n1 and 0 <= v < self.n2):
                raise InvalidGraph(f"multiedge {(u, v, e)} has an endpoint out of range")
            if e < 0:
                raise InvalidGraph(f"multiedge {(u, v, e)} has a negative label")
            counts[u, v] += 1
        for u, v, e in edges:
            if e >= counts[u, v]:
                raise InvalidGraph(f"labels for pair {(u, v)} are not 0..{counts[u, v] - 1}")
        object.__setattr__(self, "multiedges", edges)

    @classmethod
    def from_pairs(cls, n1: int, n2: int, pairs) -> "BipartiteMultigraph":
        """Build from ``(u, v)`` pairs; repeated pairs become parallel multiedges."""
        seen: Counter = Counter()
        edges = []
        for u, v in pairs:
            edges.append((u, v, seen[u, v]))
            seen[u, v] += 1
        return cls(n1, n2, tuple(edges))

    @property
    def num_multiedges(self) -> int:
        return len(self.multiedges)

    @cached_property
    def multiplicity(self) -> np.ndarray:
        """``n1 x n2`` integer matrix of edge multiplicities."""
        m = np.zeros((self.n1, self.n2), dtype=int)
        for u, v, _ in self.multiedges:
            m[u, v] += 1
        return m

    @property
    def max_multiplicity(self) -> int:
        return int(self.multiplicity.max())

    @property
    def adjacency(self) -> np.ndarray:
        """Boolean ``n1 x n2`` adjacency of the underlying simple graph."""
        return self.multiplicity > 0

    def degree1(self) -> np.ndarray:
        """Simple-graph degrees of the V1 vertices."""
        return self.adjacency.sum(axis=1)

    def degree2(self) -> np.ndarray:
        return self.adjacency.sum(axis=0)

    @cached_property
    def is_connected(self) -> bool:
        adj = self.adjacency
        seen1 = np.zeros(self.n1, dtype=bool)
        seen2 = np.zeros(self.n2, dtype=bool)
        seen1[0] = True
        frontier1, frontier2 = [0], []
        while frontier1 or frontier2:
            nxt2 = [v for u in frontier1 for v in np.flatnonzero(adj[u]) if not seen2[v]]
            for v in nxt2:
                seen2[v] = True
            nxt1 = [u for v in frontier2 for u in np.flatnonzero(adj[:, v]) if not seen1[u]]
            for u in nxt1:
                seen1[u] = True
            frontier1, frontier2 = sorted(set(nxt1)), sorted(set(nxt2))
        return bool(seen1.all() and seen2.all())

    def edge_index(self) -> dict[Multiedge, int]:
        return {edge: k for k, edge in enumerate(self.multiedges)}

    def swapped(self) -> "BipartiteMultigraph":
        """Same multigraph with the roles of V1 and V2 exchanged."""
        return BipartiteMultigraph(self.n2, self.n1, tuple((v, u, e) for u, v, e in self.multiedges))

    def with_multiedge(self, u: int, v: int) -> "BipartiteMultigraph":
        """Return a copy with one more parallel edge between ``u`` and ``v``."""
        e = int(self.multiplicity[u, v]) if u < self.n1 and v < self.n2 else 0
        return BipartiteMultigraph(self.n1, self.n2, self.multiedges + ((u, v, e),))

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "multiedges": [list(x) for x in self.multiedges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": ")) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "BipartiteMultigraph":
        try:
            n1, n2, edges = data["n1"], data["n2"], data["multiedges"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"graph object is missing field {exc}") from None
        if not all(isinstance(x, int) for x in (n1, n2)):
            raise ParseError("n1 and n2 must be integers")
        try:
            triples = tuple((int(u), int(v), int(e)) for u, v, e in edges)
        except (TypeError, ValueError):
            raise ParseError("multiedges must be [u, v, e] integer triples") from None
        return cls(n1, n2, triples)

    @classmethod
    def from_json(cls, text: str) -> "BipartiteMultigraph":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "BipartiteMultigraph":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def edge_label(edge: Multiedge) -> str:
    """Display label in 1-based notation, one prime per extra parallel edge (``12'``)."""
    u, v, e = edge
    sep = "" if u < 9 and v < 9 else ","
    return f"{u + 1}{sep}{v + 1}" + "'" * e


@dataclass(frozen=True)
class LineGraph:
    """Line graph of a bipartite multigraph.

    ``vertices[k]`` is the source multiedge of line-graph vertex ``k`` and
    ``adjacency`` is the symmetric boolean matrix over those vertices.
    """

    vertices: tuple[Multiedge, ...]
    adjacency: np.ndarray = field(compare=False, repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def edges(self) -> set[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return set(zip(i.tolist(), j.tolist()))

    def labels(self) -> list[str]:
        return [edge_label(x) for x in self.vertices]


@dataclass(frozen=True)
class TessellationCover:
    """Two tessellations of a line graph, cliques given as sorted vertex-index tuples.

    For a cover produced by :func:`line_graph`, ``t1[u]`` is ``alpha_u`` and
    ``t2[v]`` is ``beta_v``.
    """

    t1: tuple[tuple[int, ...], ...]
    t2: tuple[tuple[int, ...], ...]

    def clique_edges(self) -> set[tuple[int, int]]:
        out = set()
        for clique in itertools.chain(self.t1, self.t2):
            out.update(itertools.combinations(sorted(clique), 2))
        return out

    def validate(self, lg: LineGraph) -> None:
        """Raise :class:`CoverMismatch` unless this is a tessellation cover of ``lg``."""
        n = lg.num_vertices
        for name, tess in (("t1", self.t1), ("t2", self.t2)):
            members = [x for clique in tess for x in clique]
            if any(len(c) == 0 for c in tess):
                raise CoverMismatch(f"{name} contains an empty clique")
            if sorted(members) != list(range(n)):
                raise CoverMismatch(f"{name} is not a partition of the line-graph vertices")
            for clique in tess:
                for x, y in itertools.combinations(clique, 2):
                    if not lg.adjacency[x, y]:
                        raise CoverMismatch(f"{name} clique {clique} is not a clique")
        missing = lg.edges() - self.clique_edges()
        if missing:
            raise CoverMismatch(f"line-graph edges {sorted(missing)[:5]} are not covered")


def line_graph(g: BipartiteMultigraph) -> tuple[LineGraph, TessellationCover]:
    """Line graph plus its alpha/beta tessellation cover.

    Isolated vertices would become empty cliques, so they are rejected.
    """
    m = g.multiplicity
    if not (m.sum(axis=1).all() and m.sum(axis=0).all()):
        raise InvalidGraph("every vertex needs an incident multiedge to appear in the line graph")
    edges = g.multiedges
    us = np.array([u for u, _, _ in edges])
    vs = np.array([v for _, v, _ in edges])
    adj = (us[:, None] == us[None, :]) | (vs[:, None] == vs[None, :])
    np.fill_diagonal(adj, False)
    t1 = tuple(tuple(np.flatnonzero(us == u).tolist()) for u in range(g.n1))
    t2 = tuple(tuple(np.flatnonzero(vs == v).tolist()) for v in range(g.n2))
    return LineGraph(tuple(edges), adj), TessellationCover(t1, t2)


def clique_graph(lg: LineGraph, cover: TessellationCover) -> BipartiteMultigraph:
    """Rebuild the bipartite multigraph whose line graph is ``lg``.

    Cliques of ``cover.t1`` become V1 (in order), cliques of ``cover.t2``
    become V2, and each line-graph vertex becomes one multiedge between the
    two cliques that contain it.
    """
    cover.validate(lg)
    where1 = {x: i for i, clique in enumerate(cover.t1) for x in clique}
    where2 = {x: j for j, clique in enumerate(cover.t2) for x in clique}
    pairs = [(where1[x], where2[x]) for x in range(lg.num_vertices)]
    return BipartiteMultigraph.from_pairs(len(cover.t1), len(cover.t2), pairs)


def is_two_tessellable_witness(g: BipartiteMultigraph) -> TessellationCover:
    """Certificate that ``L(g)`` is 2-tessellable: the alpha/beta cover itself."""
    lg, cover = line_graph(g)
    cover.validate(lg)
    return cover


def mark_cliques(cover: TessellationCover, marked) -> TessellationCover:
    """Mark V1 vertices by splitting their ``alpha_u`` cliques into singletons.

    The singletons take the place of the clique they replace, ordered by
    line-graph vertex index.
    """
    marked = set(marked)
    if not marked:
        raise EmptyMarkedSet("at least one vertex must be marked")
    if not marked <= set(range(len(cover.t1))):
        raise EmptyMarkedSet(f"marks {sorted(marked)} fall outside V1")
    t1 = []
    for u, clique in enumerate(cover.t1):
        if u in marked:
            t1.extend((x,) for x in sorted(clique))
        else:
            t1.append(clique)
    return TessellationCover(tuple(t1), cover.t2)


def marked_line_graph(lg: LineGraph, cover: TessellationCover, marked) -> LineGraph:
    """Line graph with the edges of the marked ``alpha_u`` cliques removed."""
    adj = lg.adjacency.copy()
    for u in marked:
        clique = list(cover.t1[u])
        adj[np.ix_(clique, clique)] = False
    # edges shared with a beta clique survive
    for clique in cover.t2:
        c = list(clique)
        block = np.ones((len(c), len(c)), dtype=bool)
        np.fill_diagonal(block, False)
        adj[np.ix_(c, c)] |= block
    return LineGraph(lg.vertices, adj)


# -- isomorphism -----------------------------------------------------------

_MAX_PERMUTED_PART = 8


def canonical_form(g: BipartiteMultigraph) -> tuple:
    """Part-preserving canonical form of the multiplicity matrix.

    Enumerates every permutation of the smaller part and sorts the other
    part's incidence vectors; the lexicographic minimum is canonical.
    """
    m = g.multiplicity
    transpose = g.n1 > g.n2
    if transpose:
        m = m.T
    rows = m.shape[0]
    if rows > _MAX_PERMUTED_PART:
        raise InvalidGraph(f"canonical form needs a part of size <= {_MAX_PERMUTED_PART}")
    best = None
    for perm in itertools.permutations(range(rows)):
        cols = tuple(sorted(tuple(m[list(perm), j].tolist()) for j in range(m.shape[1])))
        if best is None or cols < best:
            best = cols
    return (g.n1, g.n2, transpose, best)


def are_isomorphic(g: BipartiteMultigraph, h: BipartiteMultigraph) -> bool:
    if (g.n1, g.n2, g.num_multiedges) != (h.n1, h.n2, h.num_multiedges):
        return False
    if sorted(g.multiplicity.sum(axis=1)) != sorted(h.multiplicity.sum(axis=1)):
        return False
    return canonical_form(g) == canonical_form(h)


def cover_to_dict(lg: LineGraph, cover: TessellationCover) -> dict:
    return {
        "vertices": [list(x) for x in lg.vertices],
        "labels": lg.labels(),
        "edges": [list(e) for e in sorted(lg.edges())],
        "t1": [list(c) for c in cover.t1],
        "t2": [list(c) for c in cover.t2],
    }


def cover_from_dict(data: dict) -> tuple[LineGraph, TessellationCover]:
    """Inverse of :func:`cover_to_dict`; ``vertices`` and ``labels`` are optional."""
    try:
        edges, t1, t2 = data["edges"], data["t1"], data["t2"]
        n = sum(len(c) for c in t1)
        vertices = data.get("vertices") or [[k, 0, 0] for k in range(n)]
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            adj[i, j] = adj[j, i] = True
        cover = TessellationCover(tuple(tuple(int(x) for x in c) for c in t1),
                                  tuple(tuple(int(x) for x in c) for c in t2))
        lg = LineGraph(tuple(tuple(int(x) for x in v) for v in vertices), adj)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed tessellation cover: {exc}") from None
    if len(lg.vertices) != n:
        raise ParseError("vertex list does not match the tessellation size")
    return lg, cover
