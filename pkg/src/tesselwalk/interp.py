"""Oracle, interpolation register and the interpolated adapted walk.

The simulated state is ``|i> (x) |walk>`` where ``i`` is the interpolation
target qubit.  The oracle ancilla ``q`` and the control register ``c`` are
not materialized: ``Q(r) = Q C(I(r)) Q`` is applied through its net action,
a rotation of ``i`` on marked reference states, and ``r`` is fixed per
operator.  Query costs are charged to the :class:`OracleSpec` that drives
an application.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import TransitionPair, marked_mask
from .errors import EmptyMarkedSet, RIsOne
from .walkops import AdaptedOperators, AmplitudeAssignment, WalkSpace, build_adapted_operators

#: Oracle queries per use of Q(r): it contains two copies of Q.
QUERIES_PER_INTERPOLATED_ORACLE = 2
#: Oracle queries per application of W(r): one Q(r) in A(r), one in A(r)^+.
QUERIES_PER_WALK = 2 * QUERIES_PER_INTERPOLATED_ORACLE

PARTS = ("V1", "V2")


@dataclass
class OracleSpec:
    """Marked set on one part of the multigraph plus a running query count."""

    marked: frozenset
    part: str = "V1"
    queries: int = 0

    def __post_init__(self):
        self.marked = frozenset(int(u) for u in self.marked)
        if not self.marked:
            raise EmptyMarkedSet("an oracle must mark at least one vertex")
        if self.part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}")

    def charge(self, count: int) -> None:
        if count < 0:
            raise ValueError("query counts only grow")
        self.queries += count

    def mask(self, n: int) -> np.ndarray:
        if max(self.marked) >= n:
            raise EmptyMarkedSet(f"marks {sorted(self.marked)} exceed part size {n}")
        return marked_mask(n, self.marked)


def search_part(which: str, marked) -> OracleSpec:
    """Oracle whose marks live on ``which`` (``"V1"`` or ``"V2"``)."""
    return OracleSpec(frozenset(marked), which)


def oriented_pair(tp: TransitionPair, spec: OracleSpec) -> TransitionPair:
    """The pair seen from the marked part: swapped when the marks are in V2."""
    return tp.swapped() if spec.part == "V2" else tp


@dataclass(frozen=True)
class InterpolationSchedule:
    c: int

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("c must be nonnegative")

    @property
    def r(self) -> float:
        return 1.0 - 2.0 ** (-self.c)

    @classmethod
    def grid(cls, c_max: int) -> list["InterpolationSchedule"]:
        return [cls(c) for c in range(c_max + 1)]


@dataclass(frozen=True)
class InterpolatedWalkSpace:
    walk: WalkSpace

    @property
    def dim(self) -> int:
        return 2 * self.walk.dim

    def index(self, i: int, x: int) -> int:
        return i * self.walk.dim + x

    def reference_indices(self, count: int | None = None) -> np.ndarray:
        """``|0>|u, 0>`` for the first ``count`` reference states."""
        return self.walk.ref_indices(count)


def apply_oracle(state: np.ndarray, spec: OracleSpec, ws: WalkSpace) -> np.ndarray:
    """``Q`` on ``|q> (x) |walk>``: flip ``q`` on marked reference states ``|m, 0>``."""
    state = np.asarray(state, dtype=complex)
    out = state.copy()
    d = ws.dim
    for m in spec.marked:
        x = ws.ref(m)
        out[x], out[d + x] = state[d + x], state[x]
    spec.charge(1)
    return out


def interpolated_oracle(spec: OracleSpec, ws: WalkSpace, r: float) -> np.ndarray:
    """Net action of ``Q C(I(r)) Q`` on ``|i> (x) |walk>``.

    Marked reference states rotate the ``i`` qubit by
    ``|0> -> sqrt(1-r)|0> + sqrt(r)|1>``; everything else is untouched.
    """
    if not 0.0 <= r <= 1.0:
        raise RIsOne(f"r must lie in [0, 1], got {r}")
    d = ws.dim
    q = np.eye(2 * d, dtype=complex)
    cs, sn = np.sqrt(1.0 - r), np.sqrt(r)
    for m in spec.marked:
        x = ws.ref(m)
        q[x, x], q[d + x, x] = cs, sn
        q[x, d + x], q[d + x, d + x] = -sn, cs
    return q


def controlled(u: np.ndarray, on: int) -> np.ndarray:
    """Apply ``u`` when the interpolation qubit equals ``on``, identity otherwise."""
    d = u.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    eye = np.eye(d)
    out[:d, :d] = u if on == 0 else eye
    out[d:, d:] = u if on == 1 else eye
    return out


def lift(u: np.ndarray) -> np.ndarray:
    """``I (x) u`` on the interpolation qubit."""
    return np.kron(np.eye(2), u)


@dataclass(frozen=True)
class InterpolatedWalk:
    space: InterpolatedWalkSpace
    r: float
    Ar: np.ndarray = field(repr=False)
    W1r: np.ndarray = field(repr=False)
    W2r: np.ndarray = field(repr=False)

    @property
    def W(self) -> np.ndarray:
        return self.W2r @ self.W1r

    def reference_block(self, m: np.ndarray | None = None) -> np.ndarray:
        """``<0, u0| m |0, w0>`` for ``u, w`` in V1 (defaults to ``W(r)``)."""
        m = self.W if m is None else m
        idx = self.space.reference_indices(self.space.walk.n1)
        return m[np.ix_(idx, idx)]

    def step(self, state: np.ndarray, spec: OracleSpec) -> np.ndarray:
        """One application of ``W(r)``; costs four oracle queries."""
        spec.charge(QUERIES_PER_WALK)
        return self.W @ state


def _operators(aa, ops):
    return build_adapted_operators(aa) if ops is None else ops


def build_Ar(aa: AmplitudeAssignment, spec: OracleSpec, sched: InterpolationSchedule,
             ops: AdaptedOperators | None = None) -> np.ndarray:
    """``A(r) = Cbar(Acal) Q(r)`` on ``|i> (x) |walk>``."""
    ops = _operators(aa, ops)
    spec.mask(aa.graph.n1)
    return controlled(ops.Acal, 0) @ interpolated_oracle(spec, ops.space, sched.r)


def build_Wr(aa: AmplitudeAssignment, spec: OracleSpec, sched: InterpolationSchedule,
             ops: AdaptedOperators | None = None) -> InterpolatedWalk:
    """``W(r) = W2(r) W1(r)`` with ``W1(r) = B^+ F A(r) R1`` and ``W2(r) = A(r)^+ B R2``."""
    if sched.r >= 1.0:
        raise RIsOne("the interpolated walk needs r < 1")
    ops = _operators(aa, ops)
    ar = build_Ar(aa, spec, sched, ops)
    big_b = lift(ops.B)
    w1 = big_b.conj().T @ lift(ops.F) @ ar @ lift(ops.R1)
    w2 = ar.conj().T @ big_b @ lift(ops.R2)
    return InterpolatedWalk(InterpolatedWalkSpace(ops.space), sched.r, ar, w1, w2)


def block_cases(block: np.ndarray, d: np.ndarray, marked, r: float) -> dict[str, float]:
    """Residual of each of the four marked/unmarked blocks of ``D(r)``."""
    mask = marked_mask(d.shape[0], marked)
    um, mk = np.flatnonzero(~mask), np.flatnonzero(mask)
    s = np.sqrt(1.0 - r)
    expect = {
        "unmarked-unmarked": (um, um, d[np.ix_(um, um)]),
        "unmarked-marked": (um, mk, s * d[np.ix_(um, mk)]),
        "marked-unmarked": (mk, um, s * d[np.ix_(mk, um)]),
        "marked-marked": (mk, mk, (1.0 - r) * d[np.ix_(mk, mk)] + r * np.eye(mk.size)),
    }
    out = {}
    for name, (rows, cols, want) in expect.items():
        got = block[np.ix_(rows, cols)]
        out[name] = float(np.max(np.abs(got - want))) if got.size else 0.0
    return out


@dataclass(frozen=True)
class SinkPair:
    """Marked-vertex interpretation of ``A(1)`` and ``B``.

    ``p1`` maps V1 to ``V2 + M`` (marked vertices get private copies ``m'``),
    ``p2`` maps ``V2 + M`` back to V1.  There is no detailed-balance
    partner here, so no stationary vectors are carried.
    """

    p1: np.ndarray = field(repr=False)
    p2: np.ndarray = field(repr=False)
    marked: tuple[int, ...]

    def product(self) -> np.ndarray:
        return self.p2 @ self.p1


def sink_pair_interpretation(tp: TransitionPair, spec: OracleSpec) -> SinkPair:
    marked = tuple(sorted(spec.marked))
    if not marked:
        raise EmptyMarkedSet("sink interpretation needs a marked vertex")
    n1, n2, k = tp.n1, tp.n2, len(marked)
    spec.mask(n1)
    p1 = np.zeros((n2 + k, n1))
    p1[:n2] = tp.p1
    p2 = np.zeros((n1, n2 + k))
    p2[:, :n2] = tp.p2
    for j, m in enumerate(marked):
        p1[:n2, m] = 0.0
        p1[n2 + j, m] = 1.0
        p2[m, n2 + j] = 1.0
    return SinkPair(p1, p2, marked)


def full_interpolation_discriminant(p_sink: np.ndarray) -> np.ndarray:
    """Entrywise ``sqrt(P'[u,w] P'[w,u])`` of the sink chain: the ``r -> 1`` limit of ``D(r)``."""
    return np.sqrt(p_sink * p_sink.T)
