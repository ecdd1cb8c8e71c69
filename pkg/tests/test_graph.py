import math

import pytest
from hypothesis import given, settings, strategies as st

from treeweave.graph import (DiGraph, Graph, complete_graph, cycle_graph, edges_between, edges_inside, gen_digraph,
                             gen_gnp, gen_tournament, induced, neighborhood, parse_edge_list, format_edge_list,
                             path_graph, read_edge_list, write_edge_list)
from treeweave.rng import RngSeed, make_rng
from treeweave.trees import gen_random_tree, leaves


def binomial_interval(N, p_num, p_den, tail_den):
    """Exact central interval of Binomial(N, p) leaving 1/tail_den mass on each side."""
    weights = [math.comb(N, i) * p_num ** i * (p_den - p_num) ** (N - i) for i in range(N + 1)]
    total = p_den ** N
    acc, lo, hi = 0, None, None
    for i, w in enumerate(weights):
        acc += w
        if lo is None and acc * tail_den >= total:
            lo = i
        if acc * tail_den >= (tail_den - 1) * total:
            hi = i
            break
    return lo, hi


def test_gnp_complete_and_empty():
    assert gen_gnp(4, 1.0, 3).edge_count == 6
    assert gen_gnp(5, 0.0, 3).edge_count == 0


def test_gnp_edge_count_interval():
    lo, hi = binomial_interval(4950, 1, 2, 10**6)
    # frozen from the exact binomial computation above
    assert (lo, hi) == (2308, 2642)
    assert 2200 <= lo and hi <= 2750
    for seed in range(5):
        assert lo <= gen_gnp(100, 0.5, seed).edge_count <= hi


def test_gnp_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_gnp(0, 0.5, 1)
    with pytest.raises(ValueError):
        gen_gnp(5, 1.5, 1)
    with pytest.raises(ValueError):
        gen_gnp(5, -0.1, 1)


def test_gnp_sparse_rate():
    # geometric skipping must still give the right density
    G = gen_gnp(3000, 0.002, 11)
    expected = 0.002 * 3000 * 2999 / 2
    assert abs(G.edge_count - expected) < 6 * math.sqrt(expected)


def test_neighborhood_examples():
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    assert neighborhood(star, {0}) == {1, 2, 3}
    assert neighborhood(star, range(4)) == frozenset()
    P = path_graph(4)
    assert neighborhood(P, {1, 2}, {0, 3}) == {0, 3}


def test_neighborhood_range_check():
    with pytest.raises(ValueError):
        neighborhood(path_graph(3), {5})


def test_edges_between_examples():
    assert edges_between(complete_graph(4), {0, 1}, {2, 3}) == 4
    assert edges_between(Graph(6), {0, 1}, {2, 3}) == 0
    assert edges_between(cycle_graph(5), {0}, {2, 3}) == 0
    with pytest.raises(ValueError):
        edges_between(complete_graph(4), {0, 1}, {1, 2})


def test_induced_examples():
    K3 = induced(complete_graph(4), [0, 2, 3])
    assert K3.n == 3 and K3.edge_count == 3
    assert K3.labels == (0, 2, 3)
    assert induced(complete_graph(4), []).n == 0
    P = induced(cycle_graph(6), [0, 1, 2])
    assert sorted(P.edges()) == [(0, 1), (1, 2)]


def test_random_tree_examples():
    P = gen_random_tree(5, 3, "path", 0)
    assert len(leaves(P)) == 2 and P.max_degree == 2
    S = gen_random_tree(5, 4, "broom", 0)
    assert len(leaves(S)) == 4 and S.max_degree == 4
    for seed in range(10):
        T = gen_random_tree(50, 3, "uniform-attachment", seed)
        assert T.max_degree <= 3
        assert len(leaves(T)) >= 17


@pytest.mark.parametrize("family", ["uniform-attachment", "caterpillar", "binary", "path", "broom"])
def test_random_tree_families(family):
    for n in (1, 2, 3, 10, 77):
        T = gen_random_tree(n, 3, family, n)
        assert T.n == n and T.max_degree <= 3


def test_random_tree_rejects_infeasible():
    with pytest.raises(ValueError):
        gen_random_tree(10, 1, "path", 0)
    with pytest.raises(ValueError):
        gen_random_tree(0, 3, "path", 0)
    with pytest.raises(ValueError):
        gen_random_tree(10, 3, "nope", 0)


def test_graph_rejects_loops_and_multi_edges():
    with pytest.raises(ValueError):
        Graph(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        DiGraph(3, [(1, 1)])


def test_digraph_in_out():
    D = DiGraph(3, [(0, 1), (1, 2)])
    assert D.out_neighbors(1) == (2,)
    assert D.in_neighbors(1) == (0,)
    assert D.has_arc(0, 1) and not D.has_arc(1, 0)
    assert neighborhood(D, {1}, direction="in") == {0}


def test_tournament_has_one_arc_per_pair():
    D = gen_tournament(12, 4)
    for u in range(12):
        for v in range(u + 1, 12):
            assert D.has_arc(u, v) != D.has_arc(v, u)


def test_edge_list_round_trip(tmp_path):
    G = gen_gnp(30, 0.2, 5)
    write_edge_list(G, tmp_path / "g.txt")
    H = read_edge_list(tmp_path / "g.txt")
    assert sorted(H.edges()) == sorted(G.edges())
    D = gen_digraph(20, 0.3, 2)
    E = parse_edge_list(format_edge_list(D), directed=True)
    assert sorted(E.arcs()) == sorted(D.arcs())
    with pytest.raises(ValueError):
        parse_edge_list("3 2\n0 1\n")


def test_rng_streams():
    a = make_rng(5, 1, 2).random()
    assert a == make_rng(RngSeed(5).child(1, 2)).random()
    assert a != make_rng(5, 1, 3).random()


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 40), p=st.floats(0, 1), seed=st.integers(0, 2**32))
def test_gnp_symmetric_and_deterministic(n, p, seed):
    G = gen_gnp(n, p, seed)
    for v in range(n):
        for w in G.neighbors(v):
            assert v in G.neighbors(w) and v != w
    assert sum(G.degree(v) for v in range(n)) == 2 * G.edge_count
    assert list(G.edges()) == list(gen_gnp(n, p, seed).edges())


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 30), seed=st.integers(0, 2**32), data=st.data())
def test_set_primitives(n, seed, data):
    G = gen_gnp(n, 0.3, seed)
    S = data.draw(st.sets(st.integers(0, n - 1)))
    N = neighborhood(G, S)
    for u, v in G.edges():
        if u in S:
            assert v in N | S
        if v in S:
            assert u in N | S
    X = data.draw(st.sets(st.integers(0, n - 1)))
    Y = data.draw(st.sets(st.integers(0, n - 1))) - X
    H = induced(G, X | Y)
    assert edges_between(G, X, Y) + edges_inside(G, X) + edges_inside(G, Y) == H.edge_count
