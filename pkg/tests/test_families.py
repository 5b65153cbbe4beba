import pytest

from tesselwalk.errors import BadParams, UnknownFamily
from tesselwalk.families import complete_bipartite, even_cycle, kite_cover, kite_cover_multiedge, generate, kite_chain


def test_kite_cover_shape():
    g = kite_cover()
    assert (g.n1, g.n2, g.num_multiedges) == (4, 4, 10)
    assert g.is_connected


def test_kite_multi_adds_one_parallel_edge():
    g = kite_cover_multiedge()
    assert g.num_multiedges == 11
    assert (0, 1, 1) in g.multiedges
    assert g.max_multiplicity == 2


def test_kite_chain_is_column_stochastic():
    p = kite_chain()
    assert abs(p.sum(axis=0) - 1).max() < 1e-15
    assert p[3, 0] == 0


def test_even_cycle_is_a_cycle():
    g = even_cycle(8)
    assert (g.n1, g.n2, g.num_multiedges) == (4, 4, 8)
    assert (g.degree1() == 2).all() and (g.degree2() == 2).all()
    assert g.is_connected


def test_random_family_is_seeded():
    a = generate("random_bipartite", [5, 7, 0.5, 2], seed=42)
    b = generate("random_bipartite", [5, 7, 0.5, 2], seed=42)
    assert a.to_json() == b.to_json()
    assert a.is_connected


def test_generate_errors():
    with pytest.raises(UnknownFamily):
        generate("petersen")
    with pytest.raises(BadParams):
        generate("complete_bipartite", [3])
    with pytest.raises(BadParams):
        generate("even_cycle", [7])
    with pytest.raises(BadParams):
        generate("kite_cover", [1])
    with pytest.raises(BadParams):
        complete_bipartite(0, 3)
