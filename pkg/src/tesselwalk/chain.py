"""Classical Markov-chain layer.

Matrices are column-stochastic throughout: ``P[v, u]`` is the probability
of moving from ``u`` to ``v``.  A pair ``(P1, P2)`` with ``P1: V1 -> V2`` and
``P2: V2 -> V1`` lives on a bipartite multigraph; its product ``P2 @ P1`` is
the reversible chain on V1 that the quantum search runs on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Disconnected,
    EmptyMarkedSet,
    RIsOne,
    SingularSystem,
    ZeroColumn,
)
from .multigraph import BipartiteMultigraph

STOCHASTIC_TOL = 1e-12
SPECTRAL_TOL = 1e-10

TOLERANCES = {
    "stochastic": STOCHASTIC_TOL,
    "cdb": STOCHASTIC_TOL,
    "detailed_balance": SPECTRAL_TOL,
    "spectral": SPECTRAL_TOL,
}


def column_sum_residual(p: np.ndarray) -> float:
    return float(np.max(np.abs(p.sum(axis=0) - 1.0)))


def _check_distribution(pi: np.ndarray, name: str) -> None:
    if np.any(pi <= 0):
        raise ValueError(f"{name} must be entrywise positive")
    if abs(pi.sum() - 1.0) > STOCHASTIC_TOL * max(1, pi.size):
        raise ValueError(f"{name} must sum to 1")


@dataclass(frozen=True)
class TransitionPair:
    """Column-stochastic ``p1`` (n2 x n1) and ``p2`` (n1 x n2) with stationary vectors."""

    p1: np.ndarray = field(repr=False)
    p2: np.ndarray = field(repr=False)
    pi1: np.ndarray = field(repr=False)
    pi2: np.ndarray = field(repr=False)

    def __post_init__(self):
        n2, n1 = self.p1.shape
        if self.p2.shape != (n1, n2) or self.pi1.shape != (n1,) or self.pi2.shape != (n2,):
            raise ValueError("inconsistent TransitionPair shapes")
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            if column_sum_residual(p) > STOCHASTIC_TOL * max(1, p.shape[0]):
                raise ValueError(f"{name} is not column-stochastic")
        _check_distribution(self.pi1, "pi1")
        _check_distribution(self.pi2, "pi2")

    @property
    def n1(self) -> int:
        return self.p1.shape[1]

    @property
    def n2(self) -> int:
        return self.p1.shape[0]

    def cdb_residual(self) -> float:
        """Max entrywise violation of ``P1[v,u] pi1[u] == P2[u,v] pi2[v]``."""
        lhs = self.p1 * self.pi1[None, :]
        rhs = (self.p2 * self.pi2[None, :]).T
        return float(np.max(np.abs(lhs - rhs)))

    def block_matrix(self) -> np.ndarray:
        """The bipartite chain ``[[0, P2], [P1, 0]]`` on ``V1 + V2``."""
        n1, n2 = self.n1, self.n2
        p = np.zeros((n1 + n2, n1 + n2))
        p[:n1, n1:] = self.p2
        p[n1:, :n1] = self.p1
        return p

    def swapped(self) -> "TransitionPair":
        """Exchange the roles of the two parts, so the product chain becomes ``P1 @ P2``."""
        return TransitionPair(self.p2, self.p1, self.pi2, self.pi1)

    def support_matches(self, g: BipartiteMultigraph) -> bool:
        adj = g.adjacency
        return bool(np.array_equal(self.p1.T != 0, adj) and np.array_equal(self.p2 != 0, adj))


@dataclass(frozen=True)
class ProductChain:
    p: np.ndarray = field(repr=False)
    stationary: np.ndarray = field(repr=False)
    connected: bool = True

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def detailed_balance_residual(self) -> float:
        flow = self.p * self.stationary[None, :]
        return float(np.max(np.abs(flow - flow.T)))

    def is_reversible(self, tol: float = SPECTRAL_TOL) -> bool:
        return is_ergodic(self.p) and self.detailed_balance_residual() <= tol


@dataclass(frozen=True)
class MarkedChainInstance:
    """Marked set ``M`` on a chain with stationary vector ``pi`` and interpolation ``r``."""

    marked: frozenset
    r: float
    pM: float
    piM: np.ndarray = field(repr=False)
    piMbar: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, pi: np.ndarray, marked, r: float = 0.0) -> "MarkedChainInstance":
        marked = frozenset(int(u) for u in marked)
        if not marked:
            raise EmptyMarkedSet("marked set must be nonempty")
        if not marked <= set(range(pi.size)):
            raise EmptyMarkedSet(f"marks {sorted(marked)} are out of range")
        if not 0.0 <= r < 1.0:
            raise RIsOne(f"interpolation parameter must lie in [0, 1), got {r}")
        mask = marked_mask(pi.size, marked)
        pM = float(pi[mask].sum())
        piM = np.where(mask, pi, 0.0) / pM
        rest = 1.0 - pM
        piMbar = np.where(mask, 0.0, pi) / rest if rest > 0 else np.zeros_like(pi)
        return cls(marked, float(r), pM, piM, piMbar)

    @property
    def mask(self) -> np.ndarray:
        return marked_mask(self.piM.size, self.marked)


@dataclass(frozen=True)
class InterpolatedChain:
    base: ProductChain
    sink: np.ndarray = field(repr=False)
    r: float
    pr: np.ndarray = field(repr=False)
    pir: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Discriminant:
    matrix: np.ndarray = field(repr=False)
    source: np.ndarray = field(repr=False)

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def max_singular_value(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False).max())


def marked_mask(n: int, marked) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[list(marked)] = True
    return mask


def random_walk_p1(g: BipartiteMultigraph) -> np.ndarray:
    """Simple random walk from V1 to V2: ``P1[v, u] = 1/deg(u)`` on neighbors.

    Parallel edges do not change the probabilities; they only matter for
    the amplitude assignment.
    """
    if not g.is_connected:
        raise Disconnected("random_walk_p1 requires a connected multigraph")
    adj = g.adjacency.T.astype(float)
    return adj / adj.sum(axis=0, keepdims=True)


def complete_pair(p1: np.ndarray, pi1: np.ndarray) -> TransitionPair:
    """Reverse ``p1`` against ``pi1`` so that the pair satisfies detailed balance.

    ``pi2 = P1 pi1`` and ``P2[u, v] = P1[v, u] pi1[u] / pi2[v]``.
    """
    p1 = np.asarray(p1, dtype=float)
    pi1 = np.asarray(pi1, dtype=float)
    pi2 = p1 @ pi1
    if np.any(pi2 <= 0):
        raise ZeroColumn(f"pi2 vanishes at V2 vertices {np.flatnonzero(pi2 <= 0).tolist()}")
    p2 = (p1 * pi1[None, :]).T / pi2[None, :]
    return TransitionPair(p1, p2, pi1, pi2)


def default_pair(g: BipartiteMultigraph) -> TransitionPair:
    """Random-walk ``P1`` with uniform ``pi1``, completed to a detailed-balance pair."""
    return complete_pair(random_walk_p1(g), np.full(g.n1, 1.0 / g.n1))


def product_chain(tp: TransitionPair, connected: bool | None = None) -> ProductChain:
    """``P2 @ P1`` with ``pi1`` as its stationary vector."""
    p = tp.p2 @ tp.p1
    if connected is None:
        connected = is_ergodic(p)
    return ProductChain(p, tp.pi1.copy(), bool(connected))


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    """Eigenvector of ``p`` for the eigenvalue closest to 1, normalized to sum 1."""
    w, vecs = np.linalg.eig(p)
    k = int(np.argmin(np.abs(w - 1.0)))
    vec = np.real(vecs[:, k])
    return vec / vec.sum()


def is_ergodic(p: np.ndarray) -> bool:
    """Irreducible and aperiodic, via positivity of a high power of the support.

    A nonnegative matrix is primitive iff its power ``(n-1)^2 + 1`` is
    positive, and powers of a primitive matrix stay positive, so squaring
    the support until the exponent passes that bound is enough.
    """
    n = p.shape[0]
    s = (np.asarray(p) > 0).astype(float)
    bound = (n - 1) ** 2 + 1
    k = 1
    while k < bound:
        s = ((s @ s) > 0).astype(float)
        k *= 2
    return bool(np.all(s > 0))


def time_reverse(p: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """``diag(pi) P^T diag(pi)^-1``."""
    return (pi[:, None] * p.T) / pi[None, :]


def discriminant(p: np.ndarray, pi: np.ndarray) -> Discriminant:
    """Symmetrized chain ``diag(pi)^-1/2 P diag(pi)^1/2``.

    For a reversible column-stochastic chain the entries are
    ``sqrt(P[v,u] P[u,v])``, so the matrix is symmetric.
    """
    s = np.sqrt(pi)
    return Discriminant(p * s[None, :] / s[:, None], p)


def sink_chain(p: np.ndarray, marked) -> np.ndarray:
    """Remove transitions out of marked states and give them self-loops."""
    mask = marked_mask(p.shape[0], marked)
    sink = p.copy()
    sink[:, mask] = 0.0
    idx = np.flatnonzero(mask)
    sink[idx, idx] = 1.0
    return sink


def interpolated_stationary(pi: np.ndarray, marked, r: float) -> np.ndarray:
    """Closed form ``((1-r) pi + r pi|_M) / ((1-r) + r pM)``.

    ``pi|_M`` is ``pi`` restricted to the marked states without
    renormalization; that is the version whose entries sum to one.
    """
    mask = marked_mask(pi.size, marked)
    pM = pi[mask].sum()
    return ((1.0 - r) * pi + r * np.where(mask, pi, 0.0)) / ((1.0 - r) + r * pM)


def interpolate(pc: ProductChain, inst: MarkedChainInstance) -> InterpolatedChain:
    r = inst.r
    if r >= 1.0:
        raise RIsOne("r = 1 gives a chain with many stationary vectors")
    sink = sink_chain(pc.p, inst.marked)
    pr = (1.0 - r) * pc.p + r * sink
    pir = interpolated_stationary(pc.stationary, inst.marked, r)
    return InterpolatedChain(pc, sink, r, pr, pir)


def interpolated_discriminant_blocks(d: np.ndarray, marked, r: float) -> np.ndarray:
    """Assemble ``D(r)`` from the blocks of ``D`` without touching a chain.

    Unmarked-unmarked entries are kept, mixed entries scale by
    ``sqrt(1-r)`` and the marked-marked block becomes ``(1-r) D + r I``.
    """
    mask = marked_mask(d.shape[0], marked)
    scale = np.where(mask, np.sqrt(1.0 - r), 1.0)
    out = d * scale[:, None] * scale[None, :]
    idx = np.flatnonzero(mask)
    out[idx, idx] += r
    return out


def hitting_time(pc: ProductChain, marked, start: np.ndarray | None = None) -> float:
    """Expected steps to reach ``marked`` when starting from ``pc.stationary``.

    Solves ``h_u = 1 + sum_v P[v, u] h_v`` on unmarked states with ``h = 0``
    on marked ones, then averages ``h`` against the start distribution.
    """
    n = pc.n
    mask = marked_mask(n, marked)
    if n < 2:
        raise EmptyMarkedSet("hitting time needs a chain with at least two states")
    if not mask.any() or mask.all():
        raise EmptyMarkedSet("marked set must be a nonempty proper subset")
    free = np.flatnonzero(~mask)
    a = np.eye(free.size) - pc.p[np.ix_(free, free)].T
    try:
        h_free = np.linalg.solve(a, np.ones(free.size))
    except np.linalg.LinAlgError:
        raise SingularSystem("unmarked block of the chain is singular") from None
    if not np.all(np.isfinite(h_free)):
        raise SingularSystem("hitting-time solve produced non-finite values")
    h = np.zeros(n)
    h[free] = h_free
    start = pc.stationary if start is None else start
    return float(start @ h)


def chain_dump(tp: TransitionPair, pc: ProductChain | None = None) -> str:
    """JSON dump of a pair (and optionally its product chain), row-major floats."""
    data = {
        "p1": tp.p1.tolist(),
        "p2": tp.p2.tolist(),
        "pi1": tp.pi1.tolist(),
        "pi2": tp.pi2.tolist(),
    }
    if pc is not None:
        data["product"] = pc.p.tolist()
        data["stationary"] = pc.stationary.tolist()
    data["tolerances"] = TOLERANCES
    return json.dumps(data, indent=1) + "\n"
