import pytest
from hypothesis import given, settings, strategies as st

from treeweave.absorption import reversible_links
from treeweave.errors import NoPathFound, StageStalled
from treeweave.graph import Graph, complete_digraph, complete_graph, cycle_graph, gen_gnp, gen_tournament
from treeweave.paths import (PathRequest, WeaveConfig, connect_pairs_exact, connect_pairs_exact_directed,
                             find_exact_path, find_one_exact_path, iter_exact_paths, path_problems)

from conftest import all_exact_paths, brute_routing, check_paths, stage_violations


def mask(vs):
    return sum(1 << v for v in vs)


def test_request_validation():
    with pytest.raises(ValueError):
        PathRequest(1, 1, 3)
    with pytest.raises(ValueError):
        PathRequest(0, 1, 0)
    with pytest.raises(ValueError):
        PathRequest(0, 1, 2, (1,))
    with pytest.raises(ValueError):
        PathRequest(0, 1, 2, (1, 0))


def test_one_path_in_k10():
    G = complete_graph(10)
    i, p = find_one_exact_path(G, [PathRequest(0, 1, 4)], range(2, 10))
    assert i == 0 and not path_problems(G, p, PathRequest(0, 1, 4), set(range(2, 10)))


def test_one_path_in_c5():
    i, p = find_one_exact_path(cycle_graph(5), [PathRequest(0, 2, 3)], [1, 3, 4])
    assert p == [0, 4, 3, 2]


def test_one_path_among_several():
    G = gen_gnp(60, 0.4, 3)
    reqs = [PathRequest(2 * j, 2 * j + 1, k) for j, k in enumerate((4, 5, 6, 7))]
    U = set(range(20, 60))
    i, p = find_one_exact_path(G, reqs, U)
    assert not path_problems(G, p, reqs[i], U)
    # the oracle confirms the returned request is routable at all
    r = reqs[i]
    assert find_exact_path(G, r.x, r.y, r.k, mask(U)) is not None


def test_one_path_none_found():
    G = Graph(6, [(0, 2), (2, 3)])
    with pytest.raises(NoPathFound):
        find_one_exact_path(G, [PathRequest(0, 1, 3)], [2, 3, 4, 5])


def test_iter_matches_brute_force():
    for seed in range(15):
        G = gen_gnp(9, 0.5, seed)
        pool = set(range(2, 9))
        for k in (1, 2, 3, 4):
            got = sorted(map(tuple, iter_exact_paths(G, 0, 1, k, mask(pool))))
            assert got == sorted(map(tuple, all_exact_paths(G, 0, 1, k, pool)))


def test_iter_oriented_matches_brute_force():
    for seed in range(10):
        D = gen_tournament(9, seed)
        pool = set(range(2, 9))
        orient = (1, -1, 1, -1)
        got = sorted(map(tuple, iter_exact_paths(D, 0, 1, 4, mask(pool), orient)))
        assert got == sorted(map(tuple, all_exact_paths(D, 0, 1, 4, pool, orient)))


def test_zero_requests():
    assert connect_pairs_exact(complete_graph(5), [], range(5)) == []


def test_two_paths_in_k30():
    G = complete_graph(30)
    reqs = [(0, 1, 5), (2, 3, 5)]
    W = range(10, 30)
    check_paths(G, connect_pairs_exact(G, reqs, W), reqs, W)


def test_six_requests_in_gnp_500():
    G = gen_gnp(500, 0.1, 21)
    reqs = [(2 * j, 2 * j + 1, 8 + 2 * j) for j in range(6)]
    W = range(200, 500)
    trace = []
    paths = connect_pairs_exact(G, reqs, W, seed=4, trace=trace)
    check_paths(G, paths, reqs, W)
    sizes = [len(s.survivors) for s in trace if s.alpha >= 0]
    assert sizes == sorted(sizes, reverse=True)
    assert not stage_violations(G, reqs, trace)


def test_forced_escalation_trace():
    # requests 0 and 1 cannot leave their x-ends through U, so stage 1 must grow them
    G0 = gen_gnp(200, 0.3, 5)
    U = set(range(50, 200))
    W1 = set(range(6, 50))
    G = Graph(200, [(a, b) for a, b in G0.edges()
                    if not ((a in (0, 2) and b in U) or (b in (0, 2) and a in U))])
    reqs = [(0, 1, 8), (2, 3, 8), (4, 5, 9)]
    trace = []
    paths = connect_pairs_exact(G, reqs, W1 | U, seed=1, trace=trace, partition=[W1, U])
    check_paths(G, paths, reqs, W1 | U)
    assert [s.survivors for s in trace] == [[0, 1], []]
    assert [s.alpha for s in trace] == [0, 1]
    assert not stage_violations(G, reqs, trace)


def test_stage_stall_raised_when_unroutable():
    G = Graph(12, [(0, 4), (4, 5), (5, 1)])
    cfg = WeaveConfig(max_retries=1, joint_budget=1000)
    with pytest.raises(StageStalled):
        connect_pairs_exact(G, [(0, 1, 5)], range(2, 12), cfg)


def test_endpoint_checks():
    with pytest.raises(ValueError):
        connect_pairs_exact(complete_graph(8), [(0, 1, 2), (1, 2, 2)], range(3, 8))
    with pytest.raises(ValueError):
        connect_pairs_exact(complete_graph(8), [(0, 1, 2)], range(0, 8))
    with pytest.raises(ValueError):
        connect_pairs_exact(complete_graph(8), [(0, 1, 6)], range(2, 8), WeaveConfig(strict=True))


def test_directed_all_forward():
    D = complete_digraph(12)
    paths = connect_pairs_exact_directed(D, [(0, 1, 4)], range(2, 12))
    p = paths[0]
    assert all(D.has_arc(a, b) for a, b in zip(p, p[1:])) and len(p) == 5


def test_directed_alternating_in_tournament():
    D = gen_tournament(25, 9)
    orient = (1, -1, 1, -1)
    pool = set(range(2, 25))
    oracle = all_exact_paths(D, 0, 1, 4, pool, orient)
    try:
        (p,) = connect_pairs_exact_directed(D, [PathRequest(0, 1, 4, orient)], pool)
    except StageStalled:
        assert not oracle
        return
    assert p in oracle
    assert not path_problems(D, p, PathRequest(0, 1, 4, orient))


def test_reversible_pattern_as_constrained_path():
    D = complete_digraph(10)
    k, links = reversible_links(1, 0)
    p = find_exact_path(D, 0, 1, k, mask(range(2, 10)), links=links)
    x, b, y = p
    fwd, bwd = [x, b, y], [y, b, x]
    for seq in (fwd, bwd):
        assert all(D.has_arc(a, c) for a, c in zip(seq, seq[1:]))
    assert set(fwd) == set(bwd)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(6, 11), p=st.sampled_from([0.3, 0.5, 0.7]), seed=st.integers(0, 10**6), data=st.data())
def test_routing_agrees_with_brute_force(n, p, seed, data):
    G = gen_gnp(n, p, seed)
    r = data.draw(st.integers(1, 2))
    reqs = [(2 * j, 2 * j + 1, data.draw(st.integers(1, 4))) for j in range(r)]
    W = set(range(2 * r, n))
    oracle = brute_routing(G, reqs, W)
    try:
        got = connect_pairs_exact(G, reqs, W, WeaveConfig(max_retries=20), seed)
    except StageStalled:
        got = None
    assert (got is None) == (oracle is None)
    if got is not None:
        check_paths(G, got, reqs, W)
