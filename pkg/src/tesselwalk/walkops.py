"""Szegedy and staggered walk operators as dense complex matrices.

Basis layout
------------
The walk space is ``H^{N} (x) H^{1 + n2*emax}`` with ``N = max(n1, n2)`` and
``emax`` the largest edge multiplicity.  Second-register index 0 is the
reference state, so ``|x, 0>`` for ``x < n1`` are the V1 reference states and
``x < n2`` the V2 ones.  Multiedge ``(u, v, e)`` is the basis state
``|u, 1 + v*emax + e>``.  For a simple graph with ``n1 >= n2`` this is the
familiar ``n1 * (n2 + 1)`` layout; unused slots are padding on which the
completed unitaries act by some fixed rotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chain import TransitionPair, discriminant
from .errors import CompletionFailure, NotBalanced, SupportMismatch
from .multigraph import BipartiteMultigraph

UNITARY_TOL = 1e-10
QDB_TOL = 1e-12


@dataclass(frozen=True)
class WalkSpace:
    n1: int
    n2: int
    emax: int = 1

    @property
    def dim1(self) -> int:
        return max(self.n1, self.n2)

    @property
    def dim2(self) -> int:
        return 1 + self.n2 * self.emax

    @property
    def dim(self) -> int:
        return self.dim1 * self.dim2

    def ref(self, x: int) -> int:
        """Index of the reference state ``|x, 0>``."""
        return x * self.dim2

    def edge(self, u: int, v: int, e: int = 0) -> int:
        return u * self.dim2 + 1 + v * self.emax + e

    def ref_indices(self, count: int | None = None) -> np.ndarray:
        count = self.dim1 if count is None else count
        return np.arange(count) * self.dim2

    @classmethod
    def for_graph(cls, g: BipartiteMultigraph) -> "WalkSpace":
        return cls(g.n1, g.n2, g.max_multiplicity)


def unitarity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def complete_unitary(dim: int, columns: dict[int, np.ndarray], tol: float = 1e-8) -> np.ndarray:
    """Unitary whose column ``j`` equals ``columns[j]`` for every given ``j``.

    The remaining columns are filled, in index order, by canonical basis
    vectors orthogonalized against everything chosen so far (two passes of
    Gram-Schmidt), skipping those that are numerically dependent.
    """
    u = np.zeros((dim, dim), dtype=complex)
    basis = []
    for j in sorted(columns):
        col = np.asarray(columns[j], dtype=complex)
        u[:, j] = col
        basis.append(col)
    if basis:
        q = np.array(basis).T
        if np.max(np.abs(q.conj().T @ q - np.eye(q.shape[1]))) > 1e-10:
            raise CompletionFailure("prescribed columns are not orthonormal")
    free = [j for j in range(dim) if j not in columns]
    k = 0
    for i in range(dim):
        if k == len(free):
            break
        vec = np.zeros(dim, dtype=complex)
        vec[i] = 1.0
        for _ in range(2):
            for b in basis:
                vec = vec - b * (b.conj() @ vec)
        norm = np.linalg.norm(vec)
        if norm > tol:
            vec = vec / norm
            basis.append(vec)
            u[:, free[k]] = vec
            k += 1
    if k != len(free):
        raise CompletionFailure(f"only completed {k} of {len(free)} free columns")
    return u


def reflection(dim: int, indices) -> np.ndarray:
    """``2 sum_i |i><i| - I`` over the given basis indices."""
    diag = -np.ones(dim)
    diag[np.asarray(indices, dtype=int)] = 1.0
    return np.diag(diag).astype(complex)


def projector(states: np.ndarray) -> np.ndarray:
    """Projector onto the span of orthonormal columns."""
    return states @ states.conj().T


# -- amplitude assignment ------------------------------------------------------


@dataclass(frozen=True)
class AmplitudeAssignment:
    """Per-multiedge amplitudes ``a_uve`` and ``b_uve`` satisfying quantum detailed balance.

    ``a`` and ``b`` are aligned with ``graph.multiedges``.  ``pi1_amp`` and
    ``pi2_amp`` are the complex amplitude vectors ``exp(i theta) sqrt(pi)``.
    """

    graph: BipartiteMultigraph
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    pi1_amp: np.ndarray = field(repr=False)
    pi2_amp: np.ndarray = field(repr=False)

    @property
    def space(self) -> WalkSpace:
        return WalkSpace.for_graph(self.graph)

    def alpha_matrix(self) -> np.ndarray:
        """Columns are ``|alpha_u>`` written in multiedge coordinates (K x n1)."""
        out = np.zeros((self.graph.num_multiedges, self.graph.n1), dtype=complex)
        for k, (u, _, _) in enumerate(self.graph.multiedges):
            out[k, u] = self.a[k]
        return out

    def beta_matrix(self) -> np.ndarray:
        out = np.zeros((self.graph.num_multiedges, self.graph.n2), dtype=complex)
        for k, (_, v, _) in enumerate(self.graph.multiedges):
            out[k, v] = self.b[k]
        return out

    def embed(self, edge_coords: np.ndarray) -> np.ndarray:
        """Map multiedge-coordinate vectors (rows = multiedges) into the walk space."""
        ws = self.space
        rows = [ws.edge(*edge) for edge in self.graph.multiedges]
        out = np.zeros((ws.dim,) + edge_coords.shape[1:], dtype=complex)
        out[rows] = edge_coords
        return out

    def probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        """``(P1, P2)`` recovered by summing squared moduli over parallel edges."""
        g = self.graph
        p1 = np.zeros((g.n2, g.n1))
        p2 = np.zeros((g.n1, g.n2))
        for k, (u, v, _) in enumerate(g.multiedges):
            p1[v, u] += abs(self.a[k]) ** 2
            p2[u, v] += abs(self.b[k]) ** 2
        return p1, p2

    def qdb_residual(self) -> float:
        us = np.array([u for u, _, _ in self.graph.multiedges])
        vs = np.array([v for _, v, _ in self.graph.multiedges])
        return float(np.max(np.abs(self.a * self.pi1_amp[us] - self.b * self.pi2_amp[vs])))


def equal_split(g: BipartiteMultigraph) -> np.ndarray:
    """Weight ``1/mult(u, v)`` for every multiedge."""
    m = g.multiplicity
    return np.array([1.0 / m[u, v] for u, v, _ in g.multiedges])


def random_phases(g: BipartiteMultigraph, seed: int):
    """Seeded vertex phases for both parts plus per-multiedge phases."""
    rng = np.random.default_rng(seed)
    theta1 = rng.uniform(0.0, 2 * np.pi, g.n1)
    theta2 = rng.uniform(0.0, 2 * np.pi, g.n2)
    edge = rng.uniform(0.0, 2 * np.pi, g.num_multiedges)
    return theta1, theta2, edge


def build_qdb_amplitudes(tp: TransitionPair, g: BipartiteMultigraph, phases=None,
                         split: np.ndarray | None = None) -> AmplitudeAssignment:
    """Amplitudes for ``|alpha_u>`` and ``|beta_v>`` that satisfy quantum detailed balance.

    ``a_uve = sqrt(P1[v,u] * w_uve) * exp(i phi_uve)`` where the weights
    ``w`` sum to one over parallel edges, and ``b_uve`` follows from
    ``a_uve <u|pi1> = b_uve <v|pi2>``.

    Parameters
    ----------
    phases : tuple, optional
        ``(theta1, theta2)`` or ``(theta1, theta2, edge_phases)``; zeros by default.
    split : ndarray, optional
        Positive per-multiedge weights, normalized within each ``(u, v)`` pair.
    """
    if not tp.support_matches(g):
        raise SupportMismatch("multigraph support differs from the transition pair's support")
    k = g.num_multiedges
    theta1 = np.zeros(g.n1)
    theta2 = np.zeros(g.n2)
    edge_phase = np.zeros(k)
    if phases is not None:
        theta1, theta2 = np.asarray(phases[0], float), np.asarray(phases[1], float)
        if len(phases) > 2:
            edge_phase = np.asarray(phases[2], float)
    if split is None:
        weights = equal_split(g)
    else:
        split = np.asarray(split, dtype=float)
        if split.shape != (k,) or np.any(split <= 0):
            raise ValueError("split needs one positive weight per multiedge")
        totals: dict = {}
        for w, (u, v, _) in zip(split, g.multiedges):
            totals[u, v] = totals.get((u, v), 0.0) + w
        weights = np.array([w / totals[u, v] for w, (u, v, _) in zip(split, g.multiedges)])

    pi1_amp = np.exp(1j * theta1) * np.sqrt(tp.pi1)
    pi2_amp = np.exp(1j * theta2) * np.sqrt(tp.pi2)
    a = np.empty(k, dtype=complex)
    b = np.empty(k, dtype=complex)
    for idx, (u, v, _) in enumerate(g.multiedges):
        a[idx] = np.sqrt(tp.p1[v, u] * weights[idx]) * np.exp(1j * edge_phase[idx])
        b[idx] = a[idx] * pi1_amp[u] / pi2_amp[v]
    return AmplitudeAssignment(g, a, b, pi1_amp, pi2_amp)


def alpha_state(aa: AmplitudeAssignment, u: int) -> np.ndarray:
    return aa.embed(aa.alpha_matrix()[:, u])


def beta_state(aa: AmplitudeAssignment, v: int) -> np.ndarray:
    return aa.embed(aa.beta_matrix()[:, v])


@dataclass(frozen=True)
class DoubleDiscriminant:
    d2: np.ndarray = field(repr=False)
    d1: np.ndarray = field(repr=False)
    block: np.ndarray = field(repr=False)
    pi_plus: np.ndarray = field(repr=False)
    pi_minus: np.ndarray = field(repr=False)

    @property
    def product(self) -> np.ndarray:
        """``D2 @ D1``, the discriminant of the product chain on V1."""
        return self.d2 @ self.d1

    def eigen_residuals(self) -> tuple[float, float]:
        plus = float(np.max(np.abs(self.block @ self.pi_plus - self.pi_plus)))
        minus = float(np.max(np.abs(self.block @ self.pi_minus + self.pi_minus)))
        return plus, minus

    def eigen_multiplicities(self, tol: float = 1e-8) -> tuple[int, int]:
        """How many eigenvalues of the Hermitian block sit at +1 and at -1."""
        w = np.linalg.eigvalsh(self.block)
        return int(np.sum(np.abs(w - 1) < tol)), int(np.sum(np.abs(w + 1) < tol))

    def lambda_matrix(self) -> np.ndarray:
        """``Lambda = diag(conj(pi))^-1`` on the disjoint union of both parts."""
        return np.diag(1.0 / self.pi_plus.conj())

    def similarity_residual(self, tp: TransitionPair) -> float:
        """``max |D - Lambda P Lambda^-1|`` with ``P`` the bipartite block chain."""
        lam = self.lambda_matrix()
        lam_inv = np.diag(self.pi_plus.conj())
        return float(np.max(np.abs(self.block - lam @ tp.block_matrix() @ lam_inv)))

    def square_residual(self, tp: TransitionPair) -> float:
        """Block-diagonal of ``D^2`` against ``Lambda diag(P2 P1, P1 P2) Lambda^-1``."""
        n1 = tp.n1
        sq = np.zeros_like(self.block)
        sq[:n1, :n1] = self.d2 @ self.d1
        sq[n1:, n1:] = self.d1 @ self.d2
        prod = np.zeros(self.block.shape)
        prod[:n1, :n1] = tp.p2 @ tp.p1
        prod[n1:, n1:] = tp.p1 @ tp.p2
        lam = self.lambda_matrix()
        lam_inv = np.diag(self.pi_plus.conj())
        return float(np.max(np.abs(sq - lam @ prod @ lam_inv)))


def double_discriminant(aa: AmplitudeAssignment) -> DoubleDiscriminant:
    """``(D2)_{uv} = <alpha_u|beta_v>`` assembled into ``[[0, D2], [D1, 0]]``."""
    d2 = aa.alpha_matrix().conj().T @ aa.beta_matrix()
    d1 = d2.conj().T
    n1, n2 = d2.shape
    block = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    block[:n1, n1:] = d2
    block[n1:, :n1] = d1
    plus = np.concatenate([aa.pi1_amp, aa.pi2_amp])
    minus = np.concatenate([aa.pi1_amp, -aa.pi2_amp])
    return DoubleDiscriminant(d2, d1, block, plus, minus)


# -- standard Szegedy walk -----------------------------------------------------


@dataclass(frozen=True)
class StandardSzegedy:
    """Operators of the balanced walk on ``H^n (x) H^(n+1)``."""

    space: WalkSpace
    A: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    U_reflections: np.ndarray = field(repr=False)

    def reference_block(self, m: np.ndarray) -> np.ndarray:
        idx = self.space.ref_indices(self.space.n1)
        return m[np.ix_(idx, idx)]


def swap_operator(ws: WalkSpace) -> np.ndarray:
    """``|u, v+1> -> |v, u+1>`` and ``|u, 0> -> |u, 0>`` (balanced simple layout)."""
    n = ws.n1
    s = np.zeros((ws.dim, ws.dim), dtype=complex)
    for u in range(n):
        s[ws.ref(u), ws.ref(u)] = 1.0
        for v in range(n):
            s[ws.edge(v, u), ws.edge(u, v)] = 1.0
    return s


def build_standard_szegedy(tp: TransitionPair) -> StandardSzegedy:
    """Balanced walk for ``P1 = P2 = P``: ``A``, swap ``S``, ``B = S A``, ``W = B^+ A R``."""
    if tp.n1 != tp.n2 or not np.allclose(tp.p1, tp.p2, atol=1e-14, rtol=0):
        raise NotBalanced("standard Szegedy walk needs n1 == n2 and P1 == P2")
    p = tp.p1
    n = tp.n1
    ws = WalkSpace(n, n, 1)
    cols = {}
    for u in range(n):
        col = np.zeros(ws.dim, dtype=complex)
        for v in range(n):
            col[ws.edge(u, v)] = np.sqrt(p[v, u])
        cols[ws.ref(u)] = col
    a = complete_unitary(ws.dim, cols)
    s = swap_operator(ws)
    b = s @ a
    r = reflection(ws.dim, ws.ref_indices(n))
    w = b.conj().T @ a @ r
    u_walk = a @ w @ w @ a.conj().T
    refs = ws.ref_indices(n)
    alphas = a[:, refs]
    betas = b[:, refs]
    eye = np.eye(ws.dim)
    u_refl = (2 * projector(betas) - eye) @ (2 * projector(alphas) - eye)
    return StandardSzegedy(ws, a, s, b, r, w, u_walk, u_refl)


def balanced_pair(p: np.ndarray, pi: np.ndarray) -> TransitionPair:
    """Treat a reversible chain on one vertex set as the pair ``(P, P)``."""
    return TransitionPair(p, p, pi, pi)


# -- adapted walk --------------------------------------------------------------


@dataclass(frozen=True)
class AdaptedOperators:
    """Adapted walk: ``Acal|u0> = |alpha_u^+>``, ``B|v0> = |beta_v>`` and friends."""

    space: WalkSpace
    Acal: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    R1: np.ndarray = field(repr=False)
    R2: np.ndarray = field(repr=False)
    W1cal: np.ndarray = field(repr=False)
    W2cal: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)

    @property
    def W(self) -> np.ndarray:
        return self.W2cal @ self.W1cal

    @property
    def W1(self) -> np.ndarray:
        """Unadapted ``B^+ A R1``."""
        return self.B.conj().T @ self.A @ self.R1

    @property
    def W2(self) -> np.ndarray:
        return self.A.conj().T @ self.B @ self.R2

    def reference_block(self, m: np.ndarray) -> np.ndarray:
        idx = self.space.ref_indices(self.space.n1)
        return m[np.ix_(idx, idx)]

    def evolution(self) -> np.ndarray:
        """``(2 Pi_beta - I)(2 Pi_alpha - I)``."""
        eye = np.eye(self.space.dim)
        refs1 = self.space.ref_indices(self.space.n1)
        refs2 = self.space.ref_indices(self.space.n2)
        pa = projector(self.A[:, refs1])
        pb = projector(self.B[:, refs2])
        return (2 * pb - eye) @ (2 * pa - eye)

    def named(self) -> dict[str, np.ndarray]:
        return {"Acal": self.Acal, "B": self.B, "F": self.F, "R1": self.R1, "R2": self.R2,
                "W1cal": self.W1cal, "W2cal": self.W2cal, "W": self.W}


def phase_flip(ws: WalkSpace) -> np.ndarray:
    """``F``: minus sign on every reference state ``|x, 0>``."""
    diag = np.ones(ws.dim)
    diag[ws.ref_indices()] = -1.0
    return np.diag(diag).astype(complex)


def build_adapted_operators(aa: AmplitudeAssignment, ws: WalkSpace | None = None) -> AdaptedOperators:
    ws = aa.space if ws is None else ws
    g = aa.graph
    alphas = aa.embed(aa.alpha_matrix())
    betas = aa.embed(aa.beta_matrix())
    refs1 = ws.ref_indices(g.n1)
    refs2 = ws.ref_indices(g.n2)
    plus = {}
    for u, ref in enumerate(refs1):
        col = alphas[:, u].copy()
        col[ref] += 1.0
        plus[ref] = col / np.sqrt(2.0)
    acal = complete_unitary(ws.dim, plus)
    a = complete_unitary(ws.dim, {ref: alphas[:, u] for u, ref in enumerate(refs1)})
    b = complete_unitary(ws.dim, {ref: betas[:, v] for v, ref in enumerate(refs2)})
    f = phase_flip(ws)
    r1 = reflection(ws.dim, refs1)
    r2 = reflection(ws.dim, refs2)
    bd = b.conj().T
    w1 = bd @ f @ acal @ r1
    w2 = acal.conj().T @ b @ r2
    return AdaptedOperators(ws, acal, b, f, r1, r2, w1, w2, a)


def alpha_pm_states(aa: AmplitudeAssignment) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``|alpha_u^+>`` and ``|alpha_u^->``."""
    ws = aa.space
    alphas = aa.embed(aa.alpha_matrix())
    refs = np.zeros_like(alphas)
    for u, ref in enumerate(ws.ref_indices(aa.graph.n1)):
        refs[ref, u] = 1.0
    return (alphas + refs) / np.sqrt(2.0), (alphas - refs) / np.sqrt(2.0)


def chain_discriminant_with_phases(tp: TransitionPair, aa: AmplitudeAssignment) -> np.ndarray:
    """Real discriminant of ``P2 P1`` conjugated by the V1 vertex phases.

    With ``theta = 0`` this is just the chain discriminant; in general the
    walk realizes ``diag(e^{i theta}) D diag(e^{-i theta})``.
    """
    d = discriminant(tp.p2 @ tp.p1, tp.pi1).matrix
    phase = aa.pi1_amp / np.abs(aa.pi1_amp)
    return phase[:, None] * d * phase.conj()[None, :]


def operator_dump(ops: dict[str, np.ndarray]) -> str:
    """JSON with each complex entry written as an ``[re, im]`` pair."""
    data = {name: [[[float(z.real), float(z.imag)] for z in row] for row in m]
            for name, m in ops.items()}
    return json.dumps(data) + "\n"
