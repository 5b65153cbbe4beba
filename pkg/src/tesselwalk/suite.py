"""Invariant checks shared by ``tesselwalk verify`` and the test suites.

Each check is a named residual with a tolerance; a check passes when the
residual is finite and at most the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (
    SPECTRAL_TOL,
    STOCHASTIC_TOL,
    TransitionPair,
    column_sum_residual,
    complete_pair,
    discriminant,
    interpolate,
    interpolated_discriminant_blocks,
    is_ergodic,
    marked_mask,
    product_chain,
    random_walk_p1,
    stationary_distribution,
    MarkedChainInstance,
)
from .interp import InterpolationSchedule, OracleSpec, block_cases, build_Wr
from .multigraph import BipartiteMultigraph
from .walkops import (
    QDB_TOL,
    UNITARY_TOL,
    AdaptedOperators,
    AmplitudeAssignment,
    balanced_pair,
    build_adapted_operators,
    build_qdb_amplitudes,
    build_standard_szegedy,
    chain_discriminant_with_phases,
    double_discriminant,
    unitarity_residual,
)


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "tolerance": self.tolerance,
                "passed": self.passed}


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def orthonormality_residual(cols: np.ndarray) -> float:
    return _max_abs(cols.conj().T @ cols - np.eye(cols.shape[1]))


def pair_checks(g: BipartiteMultigraph, p1: np.ndarray | None = None,
                pi1: np.ndarray | None = None) -> tuple[list[Check], TransitionPair | None]:
    """Stochasticity, support, detailed balance and ergodicity of the completed pair.

    ``p1`` and ``pi1`` default to the random walk with uniform ``pi1``.
    Returns the checks and the pair, or ``None`` when the pair cannot be built.
    """
    p1 = random_walk_p1(g) if p1 is None else np.asarray(p1, dtype=float)
    pi1 = np.full(g.n1, 1.0 / g.n1) if pi1 is None else np.asarray(pi1, dtype=float)
    checks = [Check("p1 column-stochastic", column_sum_residual(p1), STOCHASTIC_TOL * g.n2)]
    support = float(np.count_nonzero((p1.T != 0) != g.adjacency)) if p1.shape == (g.n2, g.n1) else 1.0
    checks.append(Check("p1 support matches multigraph", support, 0.0))
    if not all(c.passed for c in checks):
        return checks, None
    try:
        tp = complete_pair(p1, pi1)
    except (ValueError, ArithmeticError) as exc:
        checks.append(Check(f"detailed-balance completion ({exc})", float("inf"), 0.0))
        return checks, None
    pc = product_chain(tp)
    checks += [
        Check("p2 column-stochastic", column_sum_residual(tp.p2), STOCHASTIC_TOL * g.n1),
        Check("classical detailed balance of (P1, P2)", tp.cdb_residual(), STOCHASTIC_TOL),
        Check("product chain detailed balance", pc.detailed_balance_residual(), SPECTRAL_TOL),
        Check("product chain stationary", _max_abs(pc.p @ pc.stationary - pc.stationary), SPECTRAL_TOL),
        Check("product chain ergodic", 0.0 if is_ergodic(pc.p) else 1.0, 0.0),
        Check("discriminant symmetric", discriminant(pc.p, pc.stationary).symmetry_residual(), SPECTRAL_TOL),
    ]
    return checks, tp


def operator_checks(tp: TransitionPair, g: BipartiteMultigraph, phases=None,
                    ops: AdaptedOperators | None = None) -> list[Check]:
    """Amplitude, unitarity and reference-block identities of the adapted walk."""
    aa = build_qdb_amplitudes(tp, g, phases)
    ops = build_adapted_operators(aa) if ops is None else ops
    dd = double_discriminant(aa)
    p1, p2 = aa.probabilities()
    checks = [
        Check("QDB amplitudes", aa.qdb_residual(), QDB_TOL),
        Check("amplitudes reproduce (P1, P2)", max(_max_abs(p1 - tp.p1), _max_abs(p2 - tp.p2)), QDB_TOL),
        Check("alpha states orthonormal", orthonormality_residual(aa.alpha_matrix()), UNITARY_TOL),
        Check("beta states orthonormal", orthonormality_residual(aa.beta_matrix()), UNITARY_TOL),
    ]
    for name, m in ops.named().items():
        checks.append(Check(f"{name} unitary", unitarity_residual(m), UNITARY_TOL))
    block = ops.reference_block(ops.W)
    checks += [
        Check("reference block of W equals D2 D1", _max_abs(block - dd.product), UNITARY_TOL),
        Check("reference block of W equals phased chain discriminant",
              _max_abs(block - chain_discriminant_with_phases(tp, aa)), UNITARY_TOL),
        Check("unadapted reference block equals 2 D2 D1 - I",
              _max_abs(ops.reference_block(ops.W2 @ ops.W1) - (2 * dd.product - np.eye(g.n1))),
              UNITARY_TOL),
        Check("D = Lambda P Lambda^-1", dd.similarity_residual(tp), UNITARY_TOL),
        Check("D^2 = Lambda diag(P2 P1, P1 P2) Lambda^-1", dd.square_residual(tp), UNITARY_TOL),
        Check("+1 eigenvector of the double discriminant", dd.eigen_residuals()[0], UNITARY_TOL),
        Check("-1 eigenvector of the double discriminant", dd.eigen_residuals()[1], UNITARY_TOL),
        Check("+1 and -1 eigenvalues are simple",
              float(abs(dd.eigen_multiplicities()[0] - 1) + abs(dd.eigen_multiplicities()[1] - 1)), 0.0),
    ]
    return checks


def szegedy_checks(tp: TransitionPair) -> list[Check]:
    """Balanced walk for the product chain: reference block of ``W`` equals ``D``."""
    pc = product_chain(tp)
    sz = build_standard_szegedy(balanced_pair(pc.p, pc.stationary))
    d = discriminant(pc.p, pc.stationary).matrix
    return [
        Check("balanced walk unitary", max(unitarity_residual(sz.A), unitarity_residual(sz.W)), UNITARY_TOL),
        Check("balanced reference block equals D", _max_abs(sz.reference_block(sz.W) - d), UNITARY_TOL),
        Check("balanced U equals reflection product", _max_abs(sz.U - sz.U_reflections), UNITARY_TOL),
    ]


def interpolation_checks(tp: TransitionPair, g: BipartiteMultigraph, marked, phases=None,
                         cs=range(7), aa: AmplitudeAssignment | None = None,
                         ops: AdaptedOperators | None = None) -> list[Check]:
    """Reference block of ``W(r)`` against ``D(r)`` assembled from the blocks of ``D``."""
    aa = build_qdb_amplitudes(tp, g, phases) if aa is None else aa
    ops = build_adapted_operators(aa) if ops is None else ops
    d = double_discriminant(aa).product
    spec = OracleSpec(frozenset(marked))
    checks = []
    for c in cs:
        sched = InterpolationSchedule(c)
        walk = build_Wr(aa, spec, sched, ops)
        block = walk.reference_block()
        expect = interpolated_discriminant_blocks(d, marked, sched.r)
        checks.append(Check(f"W(r) unitary, c={c}", unitarity_residual(walk.W), UNITARY_TOL))
        checks.append(Check(f"reference block of W(r) equals D(r), c={c}",
                            _max_abs(block - expect), UNITARY_TOL))
        for case, res in block_cases(block, d, marked, sched.r).items():
            checks.append(Check(f"{case} block, c={c}", res, UNITARY_TOL))
    return checks


def interpolated_chain_checks(tp: TransitionPair, marked, cs=range(1, 7)) -> list[Check]:
    """Closed-form ``pi(r)`` against the eigen-solved stationary vector of ``P(r)``."""
    pc = product_chain(tp)
    checks = []
    for c in cs:
        inst = MarkedChainInstance.build(pc.stationary, marked, InterpolationSchedule(c).r)
        ic = interpolate(pc, inst)
        eig = stationary_distribution(ic.pr)
        checks.append(Check(f"pi(r) closed form, c={c}", _max_abs(ic.pir - eig), SPECTRAL_TOL))
        d = discriminant(ic.pr, ic.pir).matrix
        want = interpolated_discriminant_blocks(discriminant(pc.p, pc.stationary).matrix, marked, ic.r)
        checks.append(Check(f"discriminant of P(r) equals D(r), c={c}", _max_abs(d - want), SPECTRAL_TOL))
    return checks


def full_suite(g: BipartiteMultigraph, phases=None, marked=None, p1=None, pi1=None,
               cs=range(7), ops: AdaptedOperators | None = None) -> list[Check]:
    """Every check above for one multigraph; stops after the pair checks if they fail."""
    checks, tp = pair_checks(g, p1, pi1)
    if tp is None or not all(c.passed for c in checks):
        return checks
    marked = {g.n1 - 1} if marked is None else set(marked)
    marked_mask(g.n1, marked)
    aa = build_qdb_amplitudes(tp, g, phases)
    ops = build_adapted_operators(aa) if ops is None else ops
    checks += operator_checks(tp, g, phases, ops)
    checks += szegedy_checks(tp)
    checks += interpolation_checks(tp, g, marked, phases, cs, aa, ops)
    if len(marked) < g.n1:
        checks += interpolated_chain_checks(tp, marked, [c for c in cs if c > 0])
    return checks
