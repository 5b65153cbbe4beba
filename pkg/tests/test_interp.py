import numpy as np
import pytest

from conftest import SUITE
from tesselwalk.chain import default_pair, product_chain
from tesselwalk.errors import EmptyMarkedSet, RIsOne
from tesselwalk.families import complete_bipartite, kite_cover
from tesselwalk.interp import (
    QUERIES_PER_WALK,
    InterpolatedWalkSpace,
    InterpolationSchedule,
    OracleSpec,
    apply_oracle,
    build_Ar,
    build_Wr,
    interpolated_oracle,
    oriented_pair,
    sink_pair_interpretation,
)
from tesselwalk.suite import interpolation_checks
from tesselwalk.walkops import WalkSpace, build_adapted_operators, build_qdb_amplitudes, random_phases, unitarity_residual


def test_schedule_values():
    assert InterpolationSchedule(3).r == 7 / 8
    assert [s.r for s in InterpolationSchedule.grid(2)] == [0.0, 0.5, 0.75]
    with pytest.raises(ValueError):
        InterpolationSchedule(-1)


@pytest.mark.parametrize("name,g", SUITE, ids=[n for n, _ in SUITE])
@pytest.mark.parametrize("phased", [False, True])
def test_interpolated_reference_block(name, g, phased):
    phases = random_phases(g, 9) if phased else None
    marked = {0, g.n1 - 1}
    checks = interpolation_checks(default_pair(g), g, marked, phases)
    assert not [c.name for c in checks if not c.passed]


def test_oracle_flips_marked_reference_only():
    ws = WalkSpace.for_graph(kite_cover())
    spec = OracleSpec({3})
    state = np.zeros(2 * ws.dim)
    state[ws.ref(3)] = 1.0
    out = apply_oracle(state, spec, ws)
    assert out[ws.dim + ws.ref(3)] == 1.0
    state2 = np.zeros(2 * ws.dim)
    state2[ws.ref(2)] = 1.0
    assert np.array_equal(apply_oracle(state2, spec, ws), state2)
    assert spec.queries == 2


def test_interpolated_oracle_limits():
    ws = WalkSpace.for_graph(kite_cover())
    spec = OracleSpec({3})
    assert np.allclose(interpolated_oracle(spec, ws, 0.0), np.eye(2 * ws.dim))
    q1 = interpolated_oracle(spec, ws, 1.0)
    assert q1[ws.dim + ws.ref(3), ws.ref(3)] == 1.0
    assert unitarity_residual(interpolated_oracle(spec, ws, 0.3)) < 1e-15


def test_sink_limit_fixes_marked_reference():
    g = kite_cover()
    aa = build_qdb_amplitudes(default_pair(g), g)
    ar = build_Ar(aa, OracleSpec({3}), InterpolationSchedule(0), build_adapted_operators(aa))
    ops = build_adapted_operators(aa)
    q1 = interpolated_oracle(OracleSpec({3}), ops.space, 1.0)
    from tesselwalk.interp import controlled
    a1 = controlled(ops.Acal, 0) @ q1
    x = ops.space.dim + ops.space.ref(3)
    e = np.zeros(2 * ops.space.dim)
    e[ops.space.ref(3)] = 1.0
    assert np.allclose(a1 @ e, np.eye(2 * ops.space.dim)[x])
    assert unitarity_residual(ar) < 1e-12


def test_walk_step_charges_four_queries():
    g = complete_bipartite(2, 2)
    aa = build_qdb_amplitudes(default_pair(g), g)
    spec = OracleSpec({1})
    walk = build_Wr(aa, spec, InterpolationSchedule(2))
    state = np.zeros(InterpolatedWalkSpace(aa.space).dim)
    state[0] = 1.0
    walk.step(walk.step(state, spec), spec)
    assert spec.queries == 2 * QUERIES_PER_WALK == 8


def test_walk_rejects_r_one():
    g = kite_cover()
    aa = build_qdb_amplitudes(default_pair(g), g)

    class One:
        r = 1.0

    with pytest.raises(RIsOne):
        build_Wr(aa, OracleSpec({0}), One())


def test_oracle_spec_validation():
    with pytest.raises(EmptyMarkedSet):
        OracleSpec(set())
    with pytest.raises(ValueError):
        OracleSpec({0}, "V3")
    with pytest.raises(EmptyMarkedSet):
        OracleSpec({9}).mask(4)


def test_sink_pair_matches_marked_chain_picture():
    tp = default_pair(kite_cover())
    sp = sink_pair_interpretation(tp, OracleSpec({3}))
    assert sp.p1.shape == (5, 4) and sp.p2.shape == (4, 5)
    assert np.allclose(sp.p1.sum(axis=0), 1) and np.allclose(sp.p2.sum(axis=0), 1)
    p = sp.product()
    assert p[3, 3] == 1.0 and np.count_nonzero(p[:, 3]) == 1
    assert (np.diag(p) > 0).all()
    assert (p[3, :3] > 0).all()
    assert (p[:3, :3] > 0).all()


def test_oriented_pair_swaps_for_second_part():
    tp = default_pair(complete_bipartite(2, 3))
    assert oriented_pair(tp, OracleSpec({0}, "V2")).n1 == 3
    assert oriented_pair(tp, OracleSpec({0})).n1 == 2
    pc = product_chain(oriented_pair(tp, OracleSpec({0}, "V2")))
    assert pc.is_reversible()
