import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import SUITE
from tesselwalk.chain import (
    MarkedChainInstance,
    TransitionPair,
    complete_pair,
    default_pair,
    discriminant,
    hitting_time,
    interpolate,
    interpolated_discriminant_blocks,
    interpolated_stationary,
    is_ergodic,
    product_chain,
    random_walk_p1,
    sink_chain,
    stationary_distribution,
    time_reverse,
    chain_dump,
)
from tesselwalk.errors import Disconnected, EmptyMarkedSet, RIsOne, SingularSystem, ZeroColumn
from tesselwalk.families import complete_bipartite, kite_chain, random_bipartite
from tesselwalk.interp import full_interpolation_discriminant
from tesselwalk.multigraph import BipartiteMultigraph

KITE_PI = np.array([2, 3, 3, 2]) / 10.0


@st.composite
def weighted_pairs(draw):
    seed = draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    n1, n2 = (int(x) for x in rng.integers(2, 7, size=2))
    g = random_bipartite(n1, n2, 0.5, 2, seed)
    weights = rng.uniform(0.1, 1.0, size=(n2, n1)) * g.adjacency.T
    p1 = weights / weights.sum(axis=0)
    pi1 = rng.uniform(0.1, 1.0, n1)
    return g, p1, pi1 / pi1.sum()


def test_kite_discriminant_entry():
    d = discriminant(kite_chain(), KITE_PI).matrix
    assert d[0, 1] == pytest.approx(1 / math.sqrt(6), abs=1e-15)
    assert d[0, 3] == 0
    assert np.allclose(d, d.T, atol=1e-15)
    assert np.allclose(d, np.sqrt(kite_chain() * kite_chain().T), atol=1e-15)


def test_kite_stationary_matches_degrees():
    assert np.allclose(stationary_distribution(kite_chain()), KITE_PI, atol=1e-12)
    assert np.allclose(time_reverse(kite_chain(), KITE_PI), kite_chain(), atol=1e-15)


@given(weighted_pairs())
def test_completion_satisfies_detailed_balance(data):
    g, p1, pi1 = data
    tp = complete_pair(p1, pi1)
    assert tp.cdb_residual() <= 1e-12
    assert abs(tp.p2.sum(axis=0) - 1).max() <= 1e-12
    assert tp.support_matches(g)
    pc = product_chain(tp)
    assert pc.detailed_balance_residual() <= 1e-10
    assert np.allclose(pc.p @ pc.stationary, pc.stationary, atol=1e-12)
    assert pc.connected


@pytest.mark.parametrize("name,g", SUITE, ids=[n for n, _ in SUITE])
def test_product_chain_reversible_and_ergodic(name, g):
    pc = product_chain(default_pair(g))
    assert pc.connected and pc.is_reversible()
    assert np.allclose(stationary_distribution(pc.p), pc.stationary, atol=1e-10)


def test_ergodicity_detects_periodic_and_reducible_chains():
    assert not is_ergodic(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not is_ergodic(np.eye(3))
    assert is_ergodic(kite_chain() @ kite_chain())


def test_complete_bipartite_hitting_time_closed_form():
    # one marked vertex among n: each step lands on it with probability 1/n,
    # so HT from pi is (n - 1)/n * n
    for n in (2, 4, 8, 16, 32):
        pc = product_chain(default_pair(complete_bipartite(n, n)))
        assert hitting_time(pc, {0}) == pytest.approx(n - 1, rel=1e-12)


def test_hitting_time_matches_monte_carlo():
    g = random_bipartite(5, 4, 0.4, 2, seed=11)
    pc = product_chain(default_pair(g))
    marked = {2}
    exact = hitting_time(pc, marked)
    rng = np.random.default_rng(5)
    cdf = np.cumsum(pc.p, axis=0)
    steps = []
    for _ in range(20000):
        x = int(rng.choice(pc.n, p=pc.stationary))
        k = 0
        while x not in marked:
            x = int(np.searchsorted(cdf[:, x], rng.random()))
            k += 1
        steps.append(k)
    steps = np.array(steps)
    assert abs(steps.mean() - exact) < 4 * steps.std() / math.sqrt(steps.size)


def test_hitting_time_errors():
    pc = product_chain(default_pair(complete_bipartite(3, 3)))
    with pytest.raises(EmptyMarkedSet):
        hitting_time(pc, set())
    with pytest.raises(EmptyMarkedSet):
        hitting_time(pc, {0, 1, 2})
    from tesselwalk.chain import ProductChain
    with pytest.raises(SingularSystem):
        hitting_time(ProductChain(np.eye(3), np.full(3, 1 / 3), False), {0})


@pytest.mark.parametrize("name,g", SUITE[:8], ids=[n for n, _ in SUITE[:8]])
def test_interpolated_stationary_matches_eigenvector(name, g):
    pc = product_chain(default_pair(g))
    marked = {0}
    for c in range(1, 7):
        r = 1 - 2.0 ** -c
        ic = interpolate(pc, MarkedChainInstance.build(pc.stationary, marked, r))
        assert ic.pir.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.abs(ic.pir - stationary_distribution(ic.pr)).max() <= 1e-10
        d = discriminant(ic.pr, ic.pir).matrix
        want = interpolated_discriminant_blocks(discriminant(pc.p, pc.stationary).matrix, marked, r)
        assert np.abs(d - want).max() <= 1e-10


def test_interpolated_stationary_endpoints():
    pi = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(interpolated_stationary(pi, {3}, 0.0), pi)
    near = interpolated_stationary(pi, {3}, 1 - 1e-12)
    assert near[3] == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name,g", SUITE[:5], ids=[n for n, _ in SUITE[:5]])
def test_discriminant_tends_to_sink_limit(name, g):
    pc = product_chain(default_pair(g))
    marked = {g.n1 - 1}
    d = discriminant(pc.p, pc.stationary).matrix
    limit = full_interpolation_discriminant(sink_chain(pc.p, marked))
    for c in (2, 5, 10, 20):
        r = 1 - 2.0 ** -c
        gap = np.abs(interpolated_discriminant_blocks(d, marked, r) - limit).max()
        assert gap <= math.sqrt(1 - r) + 1e-15
    assert gap <= 1e-3


def test_interpolation_rejects_r_one():
    pc = product_chain(default_pair(complete_bipartite(2, 2)))
    with pytest.raises(RIsOne):
        MarkedChainInstance.build(pc.stationary, {0}, 1.0)


def test_random_walk_needs_connected_graph():
    g = BipartiteMultigraph.from_pairs(2, 2, [(0, 0), (1, 1)])
    with pytest.raises(Disconnected):
        random_walk_p1(g)


def test_completion_rejects_unreachable_v2_vertex():
    p1 = np.array([[1.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ZeroColumn):
        complete_pair(p1, np.array([0.5, 0.5]))


def test_pair_validation():
    with pytest.raises(ValueError):
        TransitionPair(np.array([[0.5, 1.0]]), np.array([[1.0], [1.0]]), np.array([0.5, 0.5]), np.array([1.0]))


def test_chain_dump_is_json():
    tp = default_pair(complete_bipartite(2, 3))
    data = json.loads(chain_dump(tp, product_chain(tp)))
    assert np.allclose(data["p1"], tp.p1)
    assert data["tolerances"]["cdb"] == 1e-12
