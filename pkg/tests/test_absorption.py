import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from treeweave.absorption import (Absorber, FlexTemplate, StructureConfig, absorb, build_absorber,
                                  build_absorbing_structure, build_directed_absorber, build_flex_template,
                                  build_reversible_path, expected_footprint, merge_absorbers, resilient_match,
                                  template_resilient, validate_absorber, validate_reversible, validate_structure)
from treeweave.errors import AbsorberFailed, NoMatching
from treeweave.graph import DiGraph, Graph, complete_digraph, complete_graph, gen_digraph, gen_gnp
from treeweave.rng import make_rng


def plain_path_ok(G, p, start, end):
    return (p[0] == start and p[-1] == end and len(set(p)) == len(p)
            and all(G.has_arc(a, b) for a, b in zip(p, p[1:])))


def oracle_matchable(H, zp):
    """Perfect matching check by networkx, independent of the package matcher."""
    B = nx.Graph()
    allowed = set(H.Y) | set(zp)
    B.add_nodes_from(("x", x) for x in range(H.n_x))
    B.add_edges_from((("x", x), ("r", r)) for x, r in H.edges() if r in allowed)
    M = nx.bipartite.hopcroft_karp_matching(B, top_nodes=[("x", x) for x in range(H.n_x)])
    return sum(1 for u in M if u[0] == "x") == H.n_x


def test_minimal_synthetic_absorber():
    r, a, s, v = 0, 1, 2, 3
    G = Graph(4, [(r, a), (a, s), (r, v), (v, a)])
    ab = Absorber.single({r, a, s}, r, s, v, [r, a, s], [r, v, a, s])
    assert validate_absorber(G, ab) == []
    # drop the edge v-a and the absorb traversal breaks
    assert validate_absorber(Graph(4, [(r, a), (a, s), (r, v)]), ab)
    bad = Absorber.single({r, a, s}, r, s, v, [r, a, s], [r, v, s])
    assert validate_absorber(G, bad)


def test_merge_synthetic_absorbers():
    # two copies of the minimal gadget joined by the link 2-4
    G = Graph(8, [(0, 1), (1, 2), (0, 3), (3, 1), (2, 4), (4, 5), (5, 6), (4, 7), (7, 5)])
    a1 = Absorber.single({0, 1, 2}, 0, 2, 3, [0, 1, 2], [0, 3, 1, 2])
    a2 = Absorber.single({4, 5, 6}, 4, 6, 7, [4, 5, 6], [4, 7, 5, 6])
    m = merge_absorbers([a1, a2], [[2, 4]])
    assert m.r == 0 and m.s == 6 and m.absorbable == {3, 7}
    assert validate_absorber(G, m) == []
    with pytest.raises(ValueError):
        merge_absorbers([a1, a2], [[2, 5]])
    with pytest.raises(ValueError):
        merge_absorbers([a1, a2], [])


def test_gadget_k2_in_k20():
    G = complete_graph(20)
    ab = build_absorber(G, 0, (1, 2), range(3, 11), range(11, 20), k=2, seed=1)
    assert ab.size == 6 and ab.absorbable == {0}
    assert validate_absorber(G, ab) == []
    assert plain_path_ok(G, ab.skip_path, ab.r, ab.s) and plain_path_ok(G, ab.absorb_path, ab.r, ab.s)


def test_gadget_k3_in_gnp():
    G = gen_gnp(200, 0.3, 11)
    v = 0
    x0, y1 = list(G.neighbors(v))[:2]
    rest = [u for u in range(1, 200) if u not in (x0, y1)]
    ab = build_absorber(G, v, (x0, y1), rest[:80], rest[80:], k=3, seed=2)
    assert ab.size == 3 * 3 + 2
    assert validate_absorber(G, ab) == []
    assert set(ab.absorb_path) == set(ab.skip_path) | {v}


def test_gadget_rejects_bad_anchors():
    G = Graph(6, [(0, 1)])
    with pytest.raises(ValueError):
        build_absorber(G, 0, (1, 2), [3], [4, 5])


def test_directed_gadget():
    D = gen_digraph(300, 0.5, 4)
    v = 0
    x0 = next(u for u in range(1, 300) if D.has_arc(u, v))
    y1 = next(u for u in range(1, 300) if u != x0 and D.has_arc(v, u))
    rest = [u for u in range(1, 300) if u not in (x0, y1)]
    ab = build_directed_absorber(D, v, (x0, y1), rest[:100], rest[100:], k=2, t=1, h=1, seed=3)
    assert validate_absorber(D, ab) == []


def test_reversible_minimal():
    D = complete_digraph(6)
    rp = build_reversible_path(D, 0, 1, range(2, 6), t=1, h=0)
    assert validate_reversible(D, rp) == []
    assert set(rp.forward) == set(rp.backward) == rp.vertices
    assert rp.forward[0] == 0 and rp.forward[-1] == 1
    assert rp.backward[0] == 1 and rp.backward[-1] == 0


def test_reversible_longer_segments():
    D = gen_digraph(300, 0.6, 8)
    for t, h in ((1, 1), (3, 4)):
        rp = build_reversible_path(D, 0, 1, range(2, 300), t=t, h=h, seed=t)
        assert validate_reversible(D, rp) == []
        assert len(rp.forward) == len(rp.backward) == len(rp.vertices) == 2 + t * (h + 1)
        assert plain_path_ok(D, rp.forward, 0, 1) and plain_path_ok(D, rp.backward, 1, 0)


def test_reversible_fails_without_back_arcs():
    # a transitive tournament has no directed y -> x route at all
    T = DiGraph(6, [(a, b) for a in range(6) for b in range(a + 1, 6)])
    with pytest.raises(AbsorberFailed):
        build_reversible_path(T, 0, 5, range(1, 5))


@pytest.mark.parametrize("n_x", [3, 6, 9])
def test_template_exhaustive_small(n_x):
    H = build_flex_template(n_x, seed=n_x, verify="exhaustive")
    assert len(H.Y) == len(H.Z) == 2 * n_x // 3
    assert H.max_degree() <= 40
    subsets = list(itertools.combinations(H.Z, n_x // 3))
    if n_x == 6:
        assert len(subsets) == 6
    for zp in subsets:
        M = resilient_match(H, zp)
        assert sorted(M) == list(range(n_x))
        assert len(set(M.values())) == n_x
        assert set(M.values()) <= set(H.Y) | set(zp)
        assert all(M[x] in H.adj[x] for x in M)
        assert oracle_matchable(H, zp)


def test_template_300_sampled():
    H = build_flex_template(300, seed=1, verify="sampled", samples=200)
    assert H.max_degree() <= 40
    rng = make_rng(5, 0)
    for _ in range(50):
        zp = rng.sample(list(H.Z), 100)
        assert oracle_matchable(H, zp)
        M = resilient_match(H, zp)
        assert len(set(M.values())) == 300


def test_template_validation():
    with pytest.raises(ValueError):
        build_flex_template(7)
    H = build_flex_template(6, seed=0)
    with pytest.raises(ValueError):
        resilient_match(H, [H.Z[0]])


def test_complete_template_trivially_matchable():
    m = 4
    H = FlexTemplate(6, m, [list(range(2 * m)) for _ in range(6)], 1)
    assert template_resilient(H, "exhaustive")


def test_corrupt_template_certificate():
    H = build_flex_template(6, seed=2)
    H.adj[4] = []
    with pytest.raises(NoMatching) as e:
        resilient_match(H, list(H.Z)[:2])
    assert e.value.certificate == {4}


def desk_structure(kind="auto", n=800, p=0.12, r=9, l=20, seed=1):
    G = gen_gnp(n, p, 3)
    A = list(range(2 * r))
    X = list(range(2 * r, 5 * r))
    Y = list(range(5 * r, 8 * r))
    st_ = build_absorbing_structure(G, A, range(8 * r, n), X, Y, StructureConfig(l=l, kind=kind), seed=seed)
    return G, st_


def check_absorbed(G, st_, Ap):
    paths = absorb(st_, Ap)
    assert len(paths) == 3 * st_.r
    used = set()
    for j, p in enumerate(paths):
        assert len(p) == st_.l and plain_path_ok(G, p, st_.X[j], st_.Y[j])
        assert not used & set(p)
        used |= set(p)
    inner = used - set(st_.X) - set(st_.Y)
    assert inner == set(st_.footprint) | set(Ap)


def test_desk_structure_edge_kind():
    G, s = desk_structure()
    assert s.kind == "edge"
    assert validate_structure(G, s) == []
    assert len(s.footprint) == expected_footprint(9, 20) == 477
    for j in range(len(s.X)):
        for v in s.wired(j):
            assert plain_path_ok(G, s.routes[(j, v)], s.X[j], s.Y[j])
            assert set(s.routes[(j, v)]) == set(s.S[j]) | {v}
    rng = make_rng(0, 1)
    for _ in range(5):
        check_absorbed(G, s, rng.sample(s.A, s.r))
    assert s.dump().startswith("# kind=edge l=20 r=9")


def test_structure_gadget_kind():
    G, s = desk_structure("gadget", n=600, p=0.5, r=2, l=80)
    assert s.kind == "gadget" and s.gadgets
    assert validate_structure(G, s) == []
    assert len(s.footprint) == expected_footprint(2, 80)
    for ab in s.gadgets:
        assert validate_absorber(G, ab) == []
    for Ap in itertools.combinations(s.A, s.r):
        check_absorbed(G, s, Ap)


def test_structure_input_checks():
    G = complete_graph(30)
    with pytest.raises(ValueError):
        build_absorbing_structure(G, [0, 1, 2], range(10, 30), [3, 4, 5], [6, 7, 8])
    with pytest.raises(ValueError):
        build_absorbing_structure(G, [0, 1], range(3, 30), [2, 3, 4], [5, 6, 7])
    _, s = desk_structure()
    with pytest.raises(ValueError):
        absorb(s, s.A[:s.r - 1])


@settings(max_examples=30, deadline=None)
@given(n_x=st.sampled_from([3, 6, 9, 12]), seed=st.integers(0, 10**6))
def test_template_properties(n_x, seed):
    H = build_flex_template(n_x, seed=seed, verify="exhaustive")
    assert H.max_degree() <= 40
    for zp in itertools.combinations(H.Z, n_x // 3):
        assert oracle_matchable(H, zp)
