"""Quantum fast-forwarding, amplitude amplification and the interpolated-walk search.

The search works in the discriminant picture: on the reference subspace the
interpolated walk acts as ``D(r)``, so each ``(t, c)`` block of the search
register holds a vector over V1 obtained from a Chebyshev expansion of
``D(r_c)^t``.  Everything is exact linear algebra; measurements are replaced
by the probabilities they would produce.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import binom

from .chain import (
    ProductChain,
    default_pair,
    discriminant,
    hitting_time,
    interpolated_discriminant_blocks,
    product_chain,
)
from .errors import ConfigTooLarge, EmptyMarkedSet, NotSymmetricUpToTolerance
from .interp import (
    QUERIES_PER_WALK,
    InterpolationSchedule,
    OracleSpec,
    build_Wr,
    oriented_pair,
)
from .multigraph import BipartiteMultigraph, LineGraph, TessellationCover, clique_graph
from .walkops import AmplitudeAssignment, build_adapted_operators, build_qdb_amplitudes

log = logging.getLogger(__name__)

#: Largest marked fraction of the stationary mass for which the walk search runs.
MAX_MARKED_MASS = 1.0 / 9.0
THETA_GRID = 2048
DEFAULT_STATE_CAP = 1 << 24
BACKENDS = ("discriminant", "full-unitary")


# -- quantum fast-forwarding ---------------------------------------------------


@dataclass(frozen=True)
class QffPlan:
    """Weights ``w_l`` with ``cos^t(x) ~ sum_l w_l cos(l x)`` for ``0 <= l <= ell_max``."""

    t: int
    epsilon: float
    ell_max: int
    weights: np.ndarray = field(repr=False)

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        ells = np.arange(self.ell_max + 1)
        return np.cos(np.outer(theta, ells)) @ self.weights

    def sup_error(self, points: int = THETA_GRID) -> float:
        theta = np.linspace(0.0, np.pi, points)
        return float(np.max(np.abs(np.cos(theta) ** self.t - self.evaluate(theta))))


def ell_max_for(t: int, epsilon: float) -> int:
    """``ceil(sqrt(2 t ln(2/eps)))``, never more than ``t``."""
    return min(t, math.ceil(math.sqrt(2.0 * t * math.log(2.0 / epsilon))))


def qff_weights(t: int, ell_max: int) -> np.ndarray:
    """Binomial weights folded onto ``l = |t - 2k|``, truncated at ``ell_max`` and renormalized.

    Exact expansion: ``cos^t x = 2^-t sum_k C(t, k) cos((t - 2k) x)``.
    """
    k = np.arange(t + 1)
    pmf = binom.pmf(k, t, 0.5)
    w = np.zeros(t + 1)
    np.add.at(w, np.abs(t - 2 * k), pmf)
    w = w[: ell_max + 1]
    return w / w.sum()


def qff_plan(t: int, epsilon: float) -> QffPlan:
    if t < 1:
        raise ValueError("t must be at least 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    ell = ell_max_for(t, epsilon)
    return QffPlan(t, epsilon, ell, qff_weights(t, ell))


def check_hermitian(d: np.ndarray, tol: float = 1e-10) -> None:
    if np.max(np.abs(d - d.conj().T)) > tol:
        raise NotSymmetricUpToTolerance("discriminant is not symmetric; the chain is not reversible")


def chebyshev_vectors(d: np.ndarray, state: np.ndarray, count: int) -> np.ndarray:
    """Rows ``T_l(d) @ state`` for ``l = 0..count``."""
    out = np.empty((count + 1, state.size), dtype=np.result_type(d, state))
    out[0] = state
    if count >= 1:
        out[1] = d @ state
    for ell in range(2, count + 1):
        out[ell] = 2.0 * (d @ out[ell - 1]) - out[ell - 2]
    return out


def qff_apply(d: np.ndarray, state: np.ndarray, plan: QffPlan) -> tuple[np.ndarray, float]:
    """Approximate ``d^t @ state`` with ``ell_max`` walk steps.

    Returns the approximation and the mass ``1 - |approx|^2`` that a coherent
    implementation leaves in the orthogonal garbage component.
    """
    check_hermitian(d)
    cheb = chebyshev_vectors(d, np.asarray(state), plan.ell_max)
    approx = plan.weights @ cheb
    leak = max(0.0, 1.0 - float(np.vdot(approx, approx).real))
    return approx, leak


# -- amplitude amplification ---------------------------------------------------


def _good_mask(good_projector, size: int) -> np.ndarray:
    mask = np.asarray(good_projector)
    if mask.dtype != bool or mask.shape != (size,):
        raise ValueError("good projector must be a boolean mask over the state")
    return mask


def amplification_rounds(psi0: np.ndarray, good: np.ndarray, rounds: int):
    """Yield the state after ``0, 1, ..., rounds`` Grover iterations."""
    state = psi0.copy()
    yield state
    for _ in range(rounds):
        state = np.where(good, -state, state)
        state = 2.0 * psi0 * np.vdot(psi0, state) - state
        yield state


def amplitude_amplify(prepare: Callable[[], np.ndarray] | np.ndarray, good_projector,
                      rounds: int) -> np.ndarray:
    """Run ``rounds`` iterations of ``-S_psi0 S_good`` on the prepared state.

    ``good_projector`` is a boolean mask marking the good basis states.
    """
    psi0 = np.asarray(prepare() if callable(prepare) else prepare, dtype=complex)
    good = _good_mask(good_projector, psi0.size)
    for state in amplification_rounds(psi0, good, rounds):
        pass
    return state


def good_mass(state: np.ndarray, good: np.ndarray) -> float:
    return float(np.sum(np.abs(state[good]) ** 2))


# -- search ----------------------------------------------------------------------


@dataclass(frozen=True)
class AlgorithmConfig:
    """Resolved constants of one search run.

    ``t_max = max(1, ceil(kappa * 72 * HT))``, ``c_max = ceil(log2(36 t_max))``,
    ``epsilon = 1 / (4 log2 t_max)`` and ``aa_rounds = ceil(lambda sqrt(log2 t_max))``.
    """

    t_max: int
    c_max: int
    epsilon: float
    aa_rounds: int
    kappa: float = 1.0
    aa_lambda: float = 2.0
    backend: str = "discriminant"
    max_state: int = DEFAULT_STATE_CAP
    classical_samples: int = 6

    def __post_init__(self):
        if self.t_max < 1 or self.c_max < 0 or self.aa_rounds < 1:
            raise ValueError("t_max >= 1, c_max >= 0 and aa_rounds >= 1 are required")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")

    @staticmethod
    def default_kappa(n: int) -> float:
        return 1.0 if n <= 32 else 0.125

    @classmethod
    def from_hitting_time(cls, ht: float, n: int = 1, kappa: float | None = None,
                          aa_lambda: float = 2.0, epsilon: float | None = None,
                          **kwargs) -> "AlgorithmConfig":
        kappa = cls.default_kappa(n) if kappa is None else kappa
        if not 0.0 < kappa <= 1.0:
            raise ValueError("kappa must lie in (0, 1]")
        t_max = max(1, math.ceil(kappa * 72.0 * ht))
        c_max = math.ceil(math.log2(36 * t_max))
        log_t = max(1.0, math.log2(t_max))
        if epsilon is None:
            epsilon = 1.0 / (4.0 * log_t)
        rounds = max(1, math.ceil(aa_lambda * math.sqrt(log_t)))
        return cls(t_max, c_max, epsilon, rounds, kappa, aa_lambda, **kwargs)

    @property
    def blocks(self) -> int:
        return self.t_max * (self.c_max + 1)

    @property
    def ell_max(self) -> int:
        return ell_max_for(self.t_max, self.epsilon)

    def queries_per_preparation(self) -> int:
        """One oracle call to split off marked vertices, then the controlled fast-forward."""
        return 1 + QUERIES_PER_WALK * self.ell_max

    def query_budget(self) -> int:
        """Worst case over the amplification round counts ``0..aa_rounds-1``.

        Each round runs the preparation forwards and backwards and reflects
        once about the marked subspace (one more query).
        """
        prep = self.queries_per_preparation()
        extra = self.aa_rounds - 1
        return prep + extra * (2 * prep + 1)

    def walk_budget(self) -> int:
        return (2 * (self.aa_rounds - 1) + 1) * self.ell_max

    def to_dict(self) -> dict:
        return {
            "t_max": self.t_max, "c_max": self.c_max, "epsilon": self.epsilon,
            "aa_rounds": self.aa_rounds, "kappa": self.kappa, "lambda": self.aa_lambda,
            "backend": self.backend, "ell_max": self.ell_max,
        }


@dataclass
class SearchOutcome:
    success_probability: float
    oracle_queries: int
    walk_applications: int
    path: str
    marked_mass: float
    hitting_time: float | None = None
    config: AlgorithmConfig | None = None
    initial_good_mass: float | None = None
    per_block: np.ndarray | None = field(default=None, repr=False)
    per_round: list[float] = field(default_factory=list)
    per_c: list[float] = field(default_factory=list)
    found: int | None = None

    def to_record(self) -> dict:
        rec = {
            "path": self.path,
            "hitting_time": self.hitting_time,
            "marked_mass": self.marked_mass,
            "success_probability": self.success_probability,
            "oracle_queries": self.oracle_queries,
            "walk_applications": self.walk_applications,
            "initial_good_mass": self.initial_good_mass,
            "per_round_success": self.per_round,
            "per_c_initial_good_mass": self.per_c,
            "found": self.found,
        }
        if self.config is not None:
            rec["config"] = self.config.to_dict()
        if self.per_block is not None:
            rec["per_block_marked_mass"] = self.per_block.tolist()
        return rec


def block_weight_table(t_max: int, epsilon: float) -> np.ndarray:
    """Row ``t - 1`` holds the fast-forward weights for ``t`` steps, padded to ``ell_max(t_max)``."""
    width = ell_max_for(t_max, epsilon) + 1
    table = np.zeros((t_max, width))
    for t in range(1, t_max + 1):
        w = qff_plan(t, epsilon).weights
        table[t - 1, : w.size] = w
    return table


def reference_discriminants(pc: ProductChain, spec: OracleSpec, cfg: AlgorithmConfig,
                            aa: AmplitudeAssignment | None = None) -> list[np.ndarray]:
    """``D(r_c)`` for every ``c``, either assembled classically or read off ``W(r)``."""
    scheds = InterpolationSchedule.grid(cfg.c_max)
    if cfg.backend == "discriminant":
        d = discriminant(pc.p, pc.stationary).matrix
        return [interpolated_discriminant_blocks(d, spec.marked, s.r) for s in scheds]
    if aa is None:
        raise ValueError("the full-unitary backend needs the amplitude assignment")
    ops = build_adapted_operators(aa)
    probe = OracleSpec(spec.marked, "V1")
    return [build_Wr(aa, probe, s, ops).reference_block() for s in scheds]


def classical_search(pM: float, samples: int) -> SearchOutcome:
    """Sample from the stationary distribution and query each sample."""
    success = 1.0 - (1.0 - pM) ** samples
    return SearchOutcome(success, samples, 0, "classical", pM)


def walk_search(pc: ProductChain, spec: OracleSpec, cfg: AlgorithmConfig,
                aa: AmplitudeAssignment | None = None, seed: int | None = None,
                hitting_time_value: float | None = None, force_walk: bool = False) -> SearchOutcome:
    """Interpolated-walk search for a marked vertex of the reversible chain ``pc``.

    Prepares ``sum_{t,c} |t>|c>|pi>``, splits off the marked component with
    one oracle call, fast-forwards ``D(r_c)^t`` on the rest and amplifies the
    marked mass with a uniformly random number of rounds in
    ``0..aa_rounds-1``.  The reported success probability is the exact
    average over that choice.

    When more than a ninth of the stationary mass is marked, plain sampling
    is used instead unless ``force_walk`` is set.
    """
    n = pc.n
    mask = spec.mask(n)
    pi = pc.stationary
    pM = float(pi[mask].sum())
    if pM > MAX_MARKED_MASS and not force_walk:
        out = classical_search(pM, cfg.classical_samples)
        out.hitting_time, out.config = hitting_time_value, cfg
        if seed is not None:
            rng = np.random.default_rng(seed)
            if rng.random() < out.success_probability:
                idx = np.flatnonzero(mask)
                out.found = int(rng.choice(idx, p=pi[idx] / pM))
        spec.charge(out.oracle_queries)
        return out
    if mask.all():
        raise EmptyMarkedSet("every vertex is marked")
    if cfg.blocks * n > cfg.max_state:
        raise ConfigTooLarge(f"{cfg.blocks} blocks x {n} states exceeds the cap {cfg.max_state}")

    ds = reference_discriminants(pc, spec, cfg, aa)
    dtype = np.result_type(*ds)
    amp = np.sqrt(pi) if cfg.backend == "discriminant" else np.asarray(aa.pi1_amp)
    # the walk's reference block carries the vertex phases, so the start state must too
    start = (np.where(mask, 0.0, amp) / np.sqrt(1.0 - pM)).astype(dtype)
    table = block_weight_table(cfg.t_max, cfg.epsilon)
    ell = table.shape[1] - 1
    norm = 1.0 / math.sqrt(cfg.blocks)

    # psi0 layout: [marked branch (n) | fast-forwarded blocks (c, t, n) | garbage (c, t)]
    approx = np.empty((cfg.c_max + 1, cfg.t_max, n), dtype=complex)
    for c, d in enumerate(ds):
        check_hermitian(d)
        approx[c] = table @ chebyshev_vectors(d, start, ell)
    sq = np.abs(approx) ** 2
    per_block = sq[:, :, mask].sum(axis=2).T
    garbage = np.sqrt(np.clip(1.0 - sq.sum(axis=2), 0.0, None))
    unmarked = math.sqrt(1.0 - pM)
    psi0 = np.concatenate([
        np.where(mask, np.sqrt(pi), 0.0).astype(complex),
        (unmarked * norm * approx).ravel(),
        (unmarked * norm * garbage).ravel().astype(complex),
    ])
    good = np.concatenate([
        np.ones(n, dtype=bool),
        np.broadcast_to(mask, approx.shape).ravel(),
        np.zeros(garbage.size, dtype=bool),
    ])
    del approx, sq

    per_round = [good_mass(s, good) for s in amplification_rounds(psi0, good, cfg.aa_rounds - 1)]
    success = float(np.mean(per_round))
    p0 = per_round[0]
    per_c = (pM + (1.0 - pM) * per_block.mean(axis=0)).tolist()
    log.debug("p0=%.4f success=%.4f per-c=%s", p0, success, np.round(per_c, 4))

    found = None
    if seed is not None:
        found = _sample_vertex(psi0, good, n, success, np.random.default_rng(seed))

    spec.charge(cfg.query_budget())
    return SearchOutcome(success, cfg.query_budget(), cfg.walk_budget(), "quantum", pM,
                         hitting_time_value, cfg, p0, per_block, per_round, per_c, found)


def _sample_vertex(psi0, good, n, success, rng) -> int | None:
    """Draw an output vertex; amplification keeps the good and bad directions fixed."""
    branch = good if rng.random() < success else ~good
    amps = np.where(branch, psi0, 0.0)
    vertex_part = np.abs(amps[: psi0.size - (psi0.size - n) % n]) ** 2
    marginal = vertex_part.reshape(-1, n).sum(axis=0)
    garbage = float(np.sum(np.abs(amps) ** 2)) - marginal.sum()
    total = marginal.sum() + max(garbage, 0.0)
    if total <= 0:
        return None
    k = rng.choice(n + 1, p=np.append(marginal, max(garbage, 0.0)) / total)
    return None if k == n else int(k)


def fixed_c_probe(pc: ProductChain, spec: OracleSpec, cfg: AlgorithmConfig) -> dict:
    """Compare the superposed-``c`` search with each single interpolation value.

    For each ``c`` the search is rerun with ``c_max`` pinned to a single
    value ``r = 1 - 2^-c``; returns initial marked mass and averaged success.
    """
    full = walk_search(pc, OracleSpec(spec.marked, spec.part), cfg)
    pM = full.marked_mass
    rows = []
    for c in range(cfg.c_max + 1):
        p0 = pM + (1.0 - pM) * float(full.per_block[:, c].mean())
        theta = math.asin(math.sqrt(min(1.0, p0)))
        succ = float(np.mean([math.sin((2 * j + 1) * theta) ** 2 for j in range(cfg.aa_rounds)]))
        rows.append({"c": c, "r": 1.0 - 2.0 ** -c, "initial_good_mass": p0, "success": succ})
    return {"superposed": full.success_probability, "fixed": rows,
            "best_fixed": max(row["success"] for row in rows)}


# -- end-to-end driver -----------------------------------------------------------


def search_multigraph(g: BipartiteMultigraph, spec: OracleSpec, cfg: AlgorithmConfig | None = None,
                    *, kappa: float | None = None, aa_lambda: float = 2.0,
                    epsilon: float | None = None, phases=None, seed: int | None = None,
                    backend: str = "discriminant", max_state: int = DEFAULT_STATE_CAP,
                    force_walk: bool = False) -> SearchOutcome:
    """Search a connected bipartite multigraph from scratch.

    Random-walk ``P1`` with uniform ``pi1``, detailed-balance completion,
    QDB amplitudes, product chain on the marked part, hitting time, search.
    """
    tp = default_pair(g)
    aa = build_qdb_amplitudes(tp, g, phases)
    oriented = oriented_pair(tp, spec)
    pc = product_chain(oriented, connected=True)
    mask = spec.mask(pc.n)
    ht = hitting_time(pc, spec.marked) if 0 < mask.sum() < pc.n else 0.0
    if cfg is None:
        cfg = AlgorithmConfig.from_hitting_time(ht, pc.n, kappa, aa_lambda, epsilon,
                                                backend=backend, max_state=max_state)
    if spec.part == "V2":
        aa = build_qdb_amplitudes(oriented, g.swapped(), None if phases is None else
                                  (phases[1], phases[0]))
    return walk_search(pc, spec, cfg, aa=aa, seed=seed, hitting_time_value=ht,
                       force_walk=force_walk)


def search_tessellable(lg: LineGraph, cover: TessellationCover, spec: OracleSpec,
                             **kwargs) -> SearchOutcome:
    """Find a marked clique of a 2-tessellable graph via its clique multigraph."""
    return search_multigraph(clique_graph(lg, cover), spec, **kwargs)


def search_both_parts(g: BipartiteMultigraph, marks1, marks2, **kwargs) -> list[SearchOutcome]:
    """Run the search once per part, as a controlled oracle on the part bit would."""
    outs = []
    for part, marks in (("V1", marks1), ("V2", marks2)):
        if marks:
            outs.append(search_multigraph(g, OracleSpec(frozenset(marks), part), **kwargs))
    return outs
