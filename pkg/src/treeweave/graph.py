"""Host graphs on dense vertex ids, seeded G(n,p) generation and set neighbourhoods.

Adjacency is stored twice: sorted neighbour tuples for iteration and Python-int
bitsets (built lazily) for the set algebra that dominates the hot loops.
At the API level vertex sets are plain Python sets/frozensets of ints.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ._bits import iter_bits, mask_of
from .rng import as_seed


def _masks_from_lists(n: int, nbrs: Sequence[np.ndarray]) -> list[int]:
    out = []
    buf = np.zeros(n, dtype=bool)
    for row in nbrs:
        if len(row) == 0:
            out.append(0)
            continue
        buf[row] = True
        out.append(int.from_bytes(np.packbits(buf, bitorder="little").tobytes(), "little"))
        buf[row] = False
    return out


def _group(n: int, src: np.ndarray, dst: np.ndarray) -> list[np.ndarray]:
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    bounds = np.searchsorted(src, np.arange(n + 1))
    return [dst[bounds[i]:bounds[i + 1]] for i in range(n)]


class Graph:
    """Simple undirected graph on vertices 0..n-1. Immutable after construction."""

    directed = False

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), labels: Optional[Sequence[int]] = None):
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        self._init_arrays(n, arr[:, 0], arr[:, 1])
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def from_arrays(cls, n: int, us: np.ndarray, vs: np.ndarray) -> "Graph":
        g = cls.__new__(cls)
        g._init_arrays(n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))
        g.labels = None
        return g

    def _init_arrays(self, n: int, us: np.ndarray, vs: np.ndarray) -> None:
        if n < 0:
            raise ValueError("n must be non-negative")
        if len(us) and (us.min() < 0 or vs.min() < 0 or us.max() >= n or vs.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(us == vs):
            raise ValueError("self-loops are not allowed")
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        keys = lo * max(n, 1) + hi
        if len(np.unique(keys)) != len(keys):
            raise ValueError("multi-edges are not allowed")
        self.n = n
        self.edge_count = int(len(us))
        rows = _group(n, np.concatenate([lo, hi]), np.concatenate([hi, lo]))
        self._rows = rows
        self._nbrs = [tuple(int(x) for x in r) for r in rows]
        self._masks: Optional[list[int]] = None

    # adjacency
    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    out_neighbors = neighbors
    in_neighbors = neighbors

    @property
    def masks(self) -> list[int]:
        if self._masks is None:
            self._masks = _masks_from_lists(self.n, self._rows)
        return self._masks

    @property
    def out_masks(self) -> list[int]:
        return self.masks

    @property
    def in_masks(self) -> list[int]:
        return self.masks

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.masks[u] >> v & 1)

    has_arc = has_edge

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self._nbrs[u]:
                if u < v:
                    yield (u, v)

    def vertices(self) -> range:
        return range(self.n)

    def all_mask(self) -> int:
        return (1 << self.n) - 1

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise ValueError("union needs graphs on the same vertex set")
        es = set(self.edges()) | set(other.edges())
        return Graph(self.n, sorted(es))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


class DiGraph:
    """Simple directed graph (antiparallel arcs allowed, no loops)."""

    directed = True

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = (), labels: Optional[Sequence[int]] = None):
        arr = np.asarray(list(arcs), dtype=np.int64).reshape(-1, 2)
        self._init_arrays(n, arr[:, 0], arr[:, 1])
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def from_arrays(cls, n: int, us: np.ndarray, vs: np.ndarray) -> "DiGraph":
        g = cls.__new__(cls)
        g._init_arrays(n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))
        g.labels = None
        return g

    def _init_arrays(self, n, us, vs):
        if len(us) and (us.min() < 0 or vs.min() < 0 or us.max() >= n or vs.max() >= n):
            raise ValueError("arc endpoint out of range")
        if np.any(us == vs):
            raise ValueError("self-loops are not allowed")
        keys = us * max(n, 1) + vs
        if len(np.unique(keys)) != len(keys):
            raise ValueError("multi-arcs are not allowed")
        self.n = n
        self.edge_count = int(len(us))
        self._out_rows = _group(n, us, vs)
        self._in_rows = _group(n, vs, us)
        self._out = [tuple(int(x) for x in r) for r in self._out_rows]
        self._in = [tuple(int(x) for x in r) for r in self._in_rows]
        self._out_masks = None
        self._in_masks = None

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    @property
    def out_masks(self) -> list[int]:
        if self._out_masks is None:
            self._out_masks = _masks_from_lists(self.n, self._out_rows)
        return self._out_masks

    @property
    def in_masks(self) -> list[int]:
        if self._in_masks is None:
            self._in_masks = _masks_from_lists(self.n, self._in_rows)
        return self._in_masks

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.out_masks[u] >> v & 1)

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self._out[u]:
                yield (u, v)

    edges = arcs

    def vertices(self) -> range:
        return range(self.n)

    def all_mask(self) -> int:
        return (1 << self.n) - 1

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, arcs={self.edge_count})"


# generators

def _check_np(n: int, p: float) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError("p must lie in [0, 1]")


def _skip_sample(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in [0, total) each kept with probability p, via geometric gaps."""
    if p <= 0 or total == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    chunk = int(total * p * 1.05) + 64
    while True:
        # tiny p draws gaps beyond int64; anything past `total` is equivalent
        gaps = np.minimum(rng.geometric(p, size=chunk), total + 1)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            chunks.append(idx[idx < total])
            break
        chunks.append(idx)
        pos = int(idx[-1])
        chunk = max(64, int((total - pos) * p * 1.05) + 64)
    return np.concatenate(chunks).astype(np.int64)


def _decode_pairs(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # k = v(v-1)/2 + u with 0 <= u < v
    v = np.floor((1 + np.sqrt(1 + 8 * k.astype(np.float64))) / 2).astype(np.int64)
    v -= (v * (v - 1) // 2 > k)
    v += ((v + 1) * v // 2 <= k)
    u = k - v * (v - 1) // 2
    return u, v


def gen_gnp(n: int, p: float, seed) -> Graph:
    """Binomial random graph G(n, p), deterministic per seed."""
    _check_np(n, p)
    rng = as_seed(seed).child(0xA11).numpy()
    total = n * (n - 1) // 2
    ks = _skip_sample(total, p, rng)
    u, v = _decode_pairs(ks)
    return Graph.from_arrays(n, u, v)


def gen_digraph(n: int, p: float, seed) -> DiGraph:
    """Random digraph: each ordered pair is an arc independently with probability p."""
    _check_np(n, p)
    rng = as_seed(seed).child(0xD16).numpy()
    ks = _skip_sample(n * (n - 1), p, rng)
    u = ks // max(n - 1, 1)
    j = ks % max(n - 1, 1)
    v = np.where(j < u, j, j + 1)
    return DiGraph.from_arrays(n, u, v)


def gen_tournament(n: int, seed) -> DiGraph:
    """Random tournament: each pair gets one uniformly random orientation."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_seed(seed).child(0x70F).numpy()
    ks = np.arange(n * (n - 1) // 2, dtype=np.int64)
    u, v = _decode_pairs(ks)
    flip = rng.random(len(ks)) < 0.5
    return DiGraph.from_arrays(n, np.where(flip, v, u), np.where(flip, u, v))


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)] if n > 2 else [])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_digraph(n: int) -> DiGraph:
    return DiGraph(n, [(u, v) for u in range(n) for v in range(n) if u != v])


# set primitives

def _check_subset(G, S: Iterable[int]) -> int:
    m = mask_of(S)
    if m >> G.n:
        raise ValueError("vertex set not contained in V(G)")
    return m


def neighborhood_mask(G, smask: int, amask: Optional[int] = None, direction: str = "out") -> int:
    """Bitset version of N(S, A); `direction` matters only for digraphs."""
    masks = G.in_masks if direction == "in" else G.out_masks
    acc = 0
    for v in iter_bits(smask):
        acc |= masks[v]
    acc &= ~smask
    if amask is not None:
        acc &= amask
    return acc


def neighborhood(G, S: Iterable[int], A: Optional[Iterable[int]] = None, direction: str = "out") -> frozenset[int]:
    """N(S, A) = (union of N(v) for v in S) minus S, intersected with A."""
    smask = _check_subset(G, S)
    amask = _check_subset(G, A) if A is not None else None
    return frozenset(iter_bits(neighborhood_mask(G, smask, amask, direction)))


def edges_between(G: Graph, X: Iterable[int], Y: Iterable[int]) -> int:
    """Number of edges with one end in X and the other in Y (X, Y disjoint)."""
    xm, ym = _check_subset(G, X), _check_subset(G, Y)
    if xm & ym:
        raise ValueError("X and Y must be disjoint")
    masks = G.masks
    return sum((masks[x] & ym).bit_count() for x in iter_bits(xm))


def edges_inside(G: Graph, X: Iterable[int]) -> int:
    xm = _check_subset(G, X)
    masks = G.masks
    return sum((masks[x] & xm).bit_count() for x in iter_bits(xm)) // 2


def induced(G, U: Iterable[int]):
    """G[U] relabelled to 0..|U|-1; `labels[i]` is the original id of vertex i."""
    us = sorted(set(U))
    _check_subset(G, us)
    pos = {v: i for i, v in enumerate(us)}
    if G.directed:
        arcs = [(pos[u], pos[v]) for u in us for v in G.out_neighbors(u) if v in pos]
        return DiGraph(len(us), arcs, labels=us)
    es = [(pos[u], pos[v]) for u in us for v in G.neighbors(u) if v in pos and u < v]
    return Graph(len(us), es, labels=us)


# serialization

def format_edge_list(G) -> str:
    lines = [f"{G.n} {G.edge_count}"]
    lines += [f"{u} {v}" for u, v in G.edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, directed: bool = False):
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise ValueError("edge list must start with 'n m'")
    n, m = int(rows[0][0]), int(rows[0][1])
    pairs = [(int(a), int(b)) for a, b in rows[1:]]
    if len(pairs) != m:
        raise ValueError(f"header declares {m} edges, found {len(pairs)}")
    return DiGraph(n, pairs) if directed else Graph(n, pairs)


def write_edge_list(G, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_edge_list(G))


def read_edge_list(path, directed: bool = False):
    with open(path) as fh:
        return parse_edge_list(fh.read(), directed)
