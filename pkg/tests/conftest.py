"""Shared brute-force oracles. They only use plain adjacency queries, never the
package's search code, so agreement with the package is a real cross-check."""

import itertools

import networkx as nx
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def to_nx(G):
    H = nx.DiGraph() if G.directed else nx.Graph()
    H.add_nodes_from(range(G.n))
    H.add_edges_from(G.arcs() if G.directed else G.edges())
    return H


def step_ok(G, a, b, sign=1):
    if not G.directed:
        return G.has_edge(a, b)
    return G.has_arc(a, b) if sign >= 0 else G.has_arc(b, a)


def all_exact_paths(G, x, y, k, pool, orient=None):
    """Every x..y path with k edges whose interior lies in pool."""
    pool = set(pool) - {x, y}
    out = []

    def rec(path):
        i = len(path) - 1
        last = path[-1]
        sign = orient[i] if orient else 1
        if i == k - 1:
            if step_ok(G, last, y, sign):
                out.append(path + [y])
            return
        for w in pool:
            if w not in path and step_ok(G, last, w, sign):
                rec(path + [w])

    if k == 1:
        return [[x, y]] if step_ok(G, x, y, orient[0] if orient else 1) else []
    rec([x])
    return out


def brute_routing(G, reqs, W):
    """Disjoint exact-length routing for (x, y, k) requests inside W, or None."""
    W = set(W)

    def rec(i, free):
        if i == len(reqs):
            return []
        x, y, k = reqs[i]
        for p in all_exact_paths(G, x, y, k, free):
            rest = rec(i + 1, free - set(p[1:-1]))
            if rest is not None:
                return [p] + rest
        return None

    return rec(0, W)


def brute_injections(G, guest_n, guest_edges, allowed=None):
    """First edge-preserving injection found by trying every one, or None."""
    hosts = list(range(G.n)) if allowed is None else sorted(allowed)
    for img in itertools.permutations(hosts, guest_n):
        if all(G.has_edge(img[a], img[b]) for a, b in guest_edges):
            return dict(enumerate(img))
    return None


def check_paths(G, paths, reqs, W=None):
    """Plain re-validation of a routing: endpoints, lengths, adjacency, disjointness."""
    seen = set()
    for p, (x, y, k) in zip(paths, reqs):
        assert p[0] == x and p[-1] == y
        assert len(p) == k + 1
        for a, b in zip(p, p[1:]):
            assert step_ok(G, a, b)
        inner = set(p[1:-1])
        assert len(inner) == len(p) - 2
        assert not (inner & seen)
        if W is not None:
            assert inner <= set(W)
        seen |= inner


@pytest.fixture
def acceptance():
    def record(name: str, passed: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        print(ACCEPTANCE_LINES[-1])
        return passed
    return record


def stage_violations(G, reqs, trace, d0=2):
    """Re-check every stage snapshot of a connect_pairs_exact run from scratch.
    Snapshots flagged 'stalled' must show the bound actually broken (the run
    then raised and retried). Returns a list of problems."""
    out = []

    def touch(a, b):
        return G.has_arc(a, b) or G.has_arc(b, a)

    for st_ in trace:
        if st_.alpha < 0:
            continue
        a = st_.alpha
        if st_.note == "stalled":
            if not len(st_.survivors) > st_.bound:
                out.append(f"stage {a}: flagged stalled within the bound")
            continue
        if len(st_.survivors) > st_.bound + 1e-9:
            out.append(f"stage {a}: {len(st_.survivors)} survivors > {st_.bound}")
        blocks = []
        for i in st_.survivors:
            x, y, _ = reqs[i]
            for side, root in ((st_.S[i], x), (st_.T[i], y)):
                if len(side) != (d0 + 1) ** a and st_.note != "matching failed":
                    out.append(f"stage {a}: request {i} end-set has {len(side)} vertices")
                dist = {root: 0}
                frontier = [root]
                while frontier:
                    nxt = []
                    for u in frontier:
                        for w in side:
                            if w not in dist and touch(u, w):
                                dist[w] = dist[u] + 1
                                nxt.append(w)
                    frontier = nxt
                if any(dist.get(s, a + 1) > a for s in side):
                    out.append(f"stage {a}: request {i} end-set not within {a} steps of its root")
                blocks.append(set(side))
        for i, p in st_.done.items():
            x, y, k = reqs[i]
            if p[0] != x or p[-1] != y or len(p) != k + 1:
                out.append(f"stage {a}: completed path {i} has wrong ends or length")
            if any(not touch(u, w) for u, w in zip(p, p[1:])):
                out.append(f"stage {a}: completed path {i} uses a non-edge")
            blocks.append(set(p))
        seen = set()
        for b in blocks:
            if seen & b:
                out.append(f"stage {a}: sets overlap")
            seen |= b
    return out
