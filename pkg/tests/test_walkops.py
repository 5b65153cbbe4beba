import json

import numpy as np
import pytest

from conftest import SUITE
from tesselwalk.chain import default_pair, discriminant, product_chain
from tesselwalk.errors import CompletionFailure, NotBalanced, SupportMismatch
from tesselwalk.families import complete_bipartite, kite_cover, kite_cover_multiedge
from tesselwalk.suite import operator_checks, szegedy_checks
from tesselwalk.walkops import (
    WalkSpace,
    alpha_pm_states,
    balanced_pair,
    build_adapted_operators,
    build_qdb_amplitudes,
    build_standard_szegedy,
    complete_unitary,
    double_discriminant,
    operator_dump,
    random_phases,
    unitarity_residual,
)


@pytest.mark.parametrize("name,g", SUITE, ids=[n for n, _ in SUITE])
@pytest.mark.parametrize("phased", [False, True])
def test_operator_identities(name, g, phased):
    phases = random_phases(g, 7) if phased else None
    failed = [c for c in operator_checks(default_pair(g), g, phases) if not c.passed]
    assert not failed


@pytest.mark.parametrize("name,g", SUITE[:5], ids=[n for n, _ in SUITE[:5]])
def test_balanced_walk_reference_block(name, g):
    assert all(c.passed for c in szegedy_checks(default_pair(g)))


def test_simple_graph_amplitudes_are_square_roots():
    g = kite_cover()
    tp = default_pair(g)
    aa = build_qdb_amplitudes(tp, g)
    for k, (u, v, _) in enumerate(g.multiedges):
        assert aa.a[k] == pytest.approx(np.sqrt(tp.p1[v, u]), abs=1e-15)
    d2 = double_discriminant(aa).d2
    assert np.allclose(d2, np.sqrt(tp.p1.T * tp.p2), atol=1e-15)


def test_parallel_edges_split_probability():
    g = kite_cover_multiedge()
    aa = build_qdb_amplitudes(default_pair(g), g)
    k0, k1 = g.multiedges.index((0, 1, 0)), g.multiedges.index((0, 1, 1))
    assert abs(aa.a[k0]) ** 2 + abs(aa.a[k1]) ** 2 == pytest.approx(default_pair(g).p1[1, 0])
    aa2 = build_qdb_amplitudes(default_pair(g), g, split=np.arange(1, 12, dtype=float))
    assert aa2.qdb_residual() < 1e-12
    assert np.allclose(aa2.probabilities()[0], default_pair(g).p1, atol=1e-12)


def test_alpha_4_lives_on_42_and_43():
    g = kite_cover()
    aa = build_qdb_amplitudes(default_pair(g), g)
    support = [g.multiedges[k] for k in np.flatnonzero(aa.alpha_matrix()[:, 3])]
    assert support == [(3, 1, 0), (3, 2, 0)]


def test_alpha_plus_minus_overlaps():
    g = kite_cover_multiedge()
    aa = build_qdb_amplitudes(default_pair(g), g, random_phases(g, 3))
    plus, minus = alpha_pm_states(aa)
    assert np.allclose(np.diag(plus.conj().T @ minus), 0, atol=1e-15)
    ops = build_adapted_operators(aa)
    betas = ops.B[:, ops.space.ref_indices(g.n2)]
    proj_b = betas @ betas.conj().T
    dd = double_discriminant(aa).product
    assert np.abs(plus.conj().T @ proj_b @ minus - dd / 2).max() < 1e-12


def test_edge_phases_cancel_in_walk_block():
    g = kite_cover_multiedge()
    th1, th2, _ = random_phases(g, 1)
    blocks = []
    for edge in (np.zeros(g.num_multiedges), np.linspace(0, 5, g.num_multiedges)):
        aa = build_qdb_amplitudes(default_pair(g), g, (th1, th2, edge))
        blocks.append(double_discriminant(aa).product)
    assert np.abs(blocks[0] - blocks[1]).max() < 1e-12


def test_walk_space_layout_generalizes_simple_layout():
    ws = WalkSpace(4, 3, 1)
    assert ws.dim == 16
    assert ws.ref(2) == 8 and ws.edge(2, 1) == 10
    wide = WalkSpace(2, 5, 2)
    assert wide.dim == 5 * 11
    assert len(set(wide.ref_indices())) == 5


def test_support_mismatch():
    g = kite_cover()
    with pytest.raises(SupportMismatch):
        build_qdb_amplitudes(default_pair(complete_bipartite(4, 4)), g)


def test_standard_walk_needs_balanced_pair():
    with pytest.raises(NotBalanced):
        build_standard_szegedy(default_pair(complete_bipartite(2, 3)))
    pc = product_chain(default_pair(kite_cover()))
    sz = build_standard_szegedy(balanced_pair(pc.p, pc.stationary))
    d = discriminant(pc.p, pc.stationary).matrix
    assert np.abs(sz.reference_block(sz.W) - d).max() < 1e-12
    assert unitarity_residual(sz.U) < 1e-12


def test_completion_rejects_dependent_columns():
    col = np.zeros(3)
    col[0] = 1.0
    with pytest.raises(CompletionFailure):
        complete_unitary(3, {0: col, 1: col})


def test_operator_dump_round_trip():
    g = kite_cover()
    ops = build_adapted_operators(build_qdb_amplitudes(default_pair(g), g, random_phases(g, 2)))
    data = json.loads(operator_dump(ops.named()))
    w = np.array(data["W"])
    assert np.allclose(w[..., 0] + 1j * w[..., 1], ops.W)
