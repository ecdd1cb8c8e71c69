"""Guest trees: generation, leaves, bare paths, the leaves-or-paths dichotomy,
stripping into a forest plus reconnection requests, and canonical hashing."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import DichotomyViolation
from .rng import make_rng

FAMILIES = ("uniform-attachment", "caterpillar", "binary", "path", "broom")

BarePath = tuple  # vertex sequence v0..vk of a tree


class TreeShape:
    """Rooted tree on vertices 0..n-1 given by a parent array (root has parent -1).

    `orient[v]` (optional) is +1 when the edge to v's parent is the arc parent -> v
    and -1 for v -> parent; used for oriented trees in digraphs.
    """

    def __init__(self, parent: Sequence[int], orient: Optional[Sequence[int]] = None):
        n = len(parent)
        if n == 0:
            raise ValueError("a tree needs at least one vertex")
        roots = [v for v in range(n) if parent[v] == -1]
        if len(roots) != 1:
            raise ValueError("parent array must have exactly one root")
        self.n = n
        self.root = roots[0]
        self.parent = tuple(int(p) for p in parent)
        self.children: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(self.parent):
            if p != -1:
                if not 0 <= p < n:
                    raise ValueError("parent id out of range")
                self.children[p].append(v)
        # connectivity (and hence acyclicity, given n-1 parent links)
        seen = 0
        queue = deque([self.root])
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            seen += 1
            queue.extend(self.children[v])
        if seen != n:
            raise ValueError("parent array does not describe a tree")
        self.bfs_order = tuple(order)
        self.adj = [list(self.children[v]) + ([self.parent[v]] if self.parent[v] != -1 else []) for v in range(n)]
        for a in self.adj:
            a.sort()
        self.max_degree = max((len(a) for a in self.adj), default=0)
        if orient is not None:
            if len(orient) != n or any(orient[v] not in (1, -1) for v in range(n) if v != self.root):
                raise ValueError("orientation must be +1/-1 for every non-root vertex")
            self.orient = tuple(int(o) if v != self.root else 0 for v, o in enumerate(orient))
        else:
            self.orient = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], root: int = 0) -> "TreeShape":
        adj: list[list[int]] = [[] for _ in range(n)]
        count = 0
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
            count += 1
        if count != n - 1:
            raise ValueError("a tree on n vertices has n-1 edges")
        parent = [-2] * n
        parent[root] = -1
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if parent[w] == -2:
                    parent[w] = v
                    queue.append(w)
        if -2 in parent:
            raise ValueError("edges do not form a tree")
        return cls(parent)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> list[int]:
        return self.adj[v]

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parent) if p != -1]

    def in_class(self, n: int, delta: int) -> bool:
        """Membership in the class of trees on n vertices with max degree <= delta."""
        return self.n == n and self.max_degree <= delta

    def to_forest(self) -> "Forest":
        return Forest(range(self.n), self.edges())

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"TreeShape(n={self.n}, max_degree={self.max_degree})"


class Forest:
    """Vertex-labelled forest; labels are arbitrary ints (usually ids of a parent tree)."""

    def __init__(self, vertices: Iterable[int], edges: Iterable[tuple[int, int]]):
        self.vertices = sorted(set(vertices))
        self.adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        n_edges = 0
        for a, b in edges:
            if a not in self.adj or b not in self.adj:
                raise ValueError("edge endpoint outside forest")
            self.adj[a].append(b)
            self.adj[b].append(a)
            n_edges += 1
        for a in self.adj.values():
            a.sort()
        self.edge_count = n_edges
        comps = self.components()
        if n_edges != len(self.vertices) - len(comps):
            raise ValueError("edges contain a cycle")

    def components(self) -> list[list[int]]:
        """Components in BFS order, each rooted at its smallest vertex."""
        seen = set()
        out = []
        for s in self.vertices:
            if s in seen:
                continue
            seen.add(s)
            comp = [s]
            i = 0
            while i < len(comp):
                for w in self.adj[comp[i]]:
                    if w not in seen:
                        seen.add(w)
                        comp.append(w)
                i += 1
            out.append(comp)
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in self.vertices for b in self.adj[a] if a < b]

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj.values()), default=0)

    def __len__(self) -> int:
        return len(self.vertices)


# generation

def _broom_parent(n: int, delta: int) -> list[int]:
    # a bare handle path followed by a caterpillar head carrying ~n/2 bristles
    bristles = -(-n // 2)
    spine = 1
    while (delta - 1) + (spine - 1) * (delta - 2) < bristles and spine + bristles < n:
        spine += 1
    bristles = min(bristles, n - spine, (delta - 1) + (spine - 1) * (delta - 2))
    chain = n - bristles
    parent = [-1] + list(range(chain - 1))
    room = []
    for v in range(chain - 1, chain - 1 - spine, -1):
        room.extend([v] * (delta - (1 if v == chain - 1 else 2)))
    parent.extend(room[:bristles])
    return parent


def gen_random_tree(n: int, delta: int, family: str = "uniform-attachment", seed=0) -> TreeShape:
    """Random tree with n vertices and maximum degree at most delta."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > 2 and delta < 2:
        raise ValueError("delta >= 2 is required for n > 2")
    if n == 2 and delta < 1:
        raise ValueError("delta >= 1 is required for n = 2")
    rng = make_rng(seed, 0x7EE)
    if n <= 2 or family == "path":
        return TreeShape([-1] + list(range(n - 1)))
    if delta == 2:
        if family == "binary" and n > 3:
            raise ValueError("binary trees with n > 3 need delta >= 3")
        return TreeShape([-1] + list(range(n - 1)))
    if family == "uniform-attachment":
        parent = [-1]
        deg = [0]
        open_ = [0]
        for v in range(1, n):
            i = rng.randrange(len(open_))
            p = open_[i]
            parent.append(p)
            deg[p] += 1
            deg.append(1)
            if deg[p] >= delta:
                open_[i] = open_[-1]
                open_.pop()
            if delta > 1:
                open_.append(v)
        return TreeShape(parent)
    if family == "binary":
        return TreeShape([-1] + [(i - 1) // 2 for i in range(1, n)])
    if family == "caterpillar":
        spine = max(1, -(-n // 2))
        while spine > 1 and 2 * (delta - 1) + (spine - 2) * (delta - 2) < n - spine:
            spine += 1
        parent = [-1] + list(range(spine - 1))
        room = []
        for j in range(spine):
            used = (1 if j > 0 else 0) + (1 if j < spine - 1 else 0)
            room.extend([j] * (delta - used))
        rng.shuffle(room)
        if len(room) < n - spine:
            raise ValueError("caterpillar does not fit the degree bound")
        for v in range(spine, n):
            parent.append(room[v - spine])
        return TreeShape(parent)
    return TreeShape(_broom_parent(n, delta))


# leaves and bare paths

def leaves(T: TreeShape) -> frozenset[int]:
    if T.n < 2:
        raise ValueError("leaves are defined for trees with at least 2 vertices")
    return frozenset(v for v in range(T.n) if T.degree(v) == 1)


def _threads(T: TreeShape) -> list[list[int]]:
    """Maximal paths whose interior vertices have degree 2 and whose ends do not."""
    if T.n == 1:
        return []
    out = []
    for u in range(T.n):
        if T.degree(u) == 2:
            continue
        for w in T.adj[u]:
            seq = [u]
            prev, cur = u, w
            while T.degree(cur) == 2:
                seq.append(cur)
                a, b = T.adj[cur]
                prev, cur = cur, (b if a == prev else a)
            seq.append(cur)
            if u < cur:
                out.append(seq)
    out.sort(key=min)
    return out


def bare_paths(T: TreeShape, k: int) -> list[BarePath]:
    """Maximum family of vertex-disjoint bare paths of length exactly k.

    Threads only meet at their end vertices, and they form the edges of a
    contracted tree on the non-degree-2 vertices. A DP over that tree decides
    which thread may use each shared end; windows are then cut from the
    claimed end inwards.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    threads = _threads(T)
    if not threads:
        return []

    def count(t: int, a: int, b: int) -> int:
        return max(0, len(threads[t]) - (1 - a) - (1 - b)) // (k + 1)

    inc: dict = {}
    for t, seq in enumerate(threads):
        inc.setdefault(seq[0], []).append(t)
        inc.setdefault(seq[-1], []).append(t)
    root = threads[0][0]
    # iterative DFS order over the contracted tree
    parent_thread = {root: None}
    order = [root]
    for v in order:
        for t in inc[v]:
            seq = threads[t]
            c = seq[-1] if seq[0] == v else seq[0]
            if c not in parent_thread:
                parent_thread[c] = t
                order.append(c)
    taken, free = {}, {}  # best subtree value with v unavailable / available
    choice: dict = {}
    for v in reversed(order):
        base, gain, pick = 0, 0, None
        for t in inc[v]:
            if t == parent_thread[v]:
                continue
            seq = threads[t]
            c = seq[-1] if seq[0] == v else seq[0]
            opts = {}
            for a in (0, 1):
                opts[a] = max((count(t, a, b) + (taken[c] if b else free[c]), b) for b in (0, 1))
            choice[t] = opts
            base += opts[0][0]
            if opts[1][0] - opts[0][0] > gain:
                gain, pick = opts[1][0] - opts[0][0], t
        taken[v] = base
        free[v] = base + gain
        choice[("pick", v)] = pick
    # walk down fixing which end each thread claims
    claims: dict = {}
    avail = {root: True}
    for v in order:
        pick = choice[("pick", v)] if avail[v] else None
        for t in inc[v]:
            if t == parent_thread[v]:
                continue
            seq = threads[t]
            c = seq[-1] if seq[0] == v else seq[0]
            a = 1 if t == pick else 0
            b = choice[t][a][1]
            claims[t] = (a, b) if seq[0] == v else (b, a)
            avail[c] = not b
    out = []
    for t, seq in enumerate(threads):
        a, b = claims[t]
        usable = seq[(1 - a):len(seq) - (1 - b)]
        for i in range(count(t, a, b)):
            out.append(tuple(usable[i * (k + 1):(i + 1) * (k + 1)]))
    return out


def is_bare_path(T: TreeShape, path: Sequence[int]) -> bool:
    if len(set(path)) != len(path) or len(path) < 2:
        return False
    if any(path[i + 1] not in T.adj[path[i]] for i in range(len(path) - 1)):
        return False
    return all(T.degree(v) == 2 for v in path[1:-1])


def bare_path_bound(n: int, k: int, n_leaves: int) -> float:
    """Guaranteed number of disjoint bare paths of length k."""
    return n / (k + 1) - (2 * n_leaves - 2)


@dataclass(frozen=True)
class Leafy:
    leaves: frozenset


@dataclass(frozen=True)
class Pathy:
    paths: list


def classify(T: TreeShape, k: int) -> Union[Leafy, Pathy]:
    """Many leaves (at least n/4k) or many disjoint bare paths of length k."""
    if T.n <= 2 or k <= 2:
        raise ValueError("classify needs n > 2 and k > 2")
    threshold = T.n / (4 * k)
    lv = leaves(T)
    if len(lv) >= threshold:
        return Leafy(lv)
    paths = bare_paths(T, k)
    if len(paths) >= threshold:
        return Pathy(paths)
    raise DichotomyViolation(f"{len(lv)} leaves and {len(paths)} bare paths, both below {threshold:.2f}")


# stripping

@dataclass
class StripResult:
    kind: str  # "leafy" or "pathy"
    forest: Forest
    removed: frozenset
    demands: dict = field(default_factory=dict)  # leafy: parent -> number of removed leaves
    requests: list = field(default_factory=list)  # pathy: (end1, end2, k)
    paths: list = field(default_factory=list)  # pathy: the removed bare paths
    n_original: int = 0


def strip(T: TreeShape, removal) -> StripResult:
    """Remove a set of leaves, or the interiors of disjoint bare paths."""
    if isinstance(removal, Leafy):
        removal = set(removal.leaves)
    if isinstance(removal, Pathy):
        removal = list(removal.paths)
    items = list(removal)
    if items and isinstance(items[0], (tuple, list)):
        return _strip_paths(T, [tuple(p) for p in items])
    return _strip_leaves(T, set(items))


def _strip_leaves(T: TreeShape, chosen: set) -> StripResult:
    for v in chosen:
        if not 0 <= v < T.n or T.degree(v) != 1:
            raise ValueError(f"vertex {v} is not a leaf")
    if len(chosen) >= T.n:
        raise ValueError("cannot remove every vertex")
    demands: Counter = Counter()
    for v in chosen:
        (p,) = T.adj[v]
        if p in chosen:
            raise ValueError("removal would delete both ends of an edge")
        demands[p] += 1
    kept = [v for v in range(T.n) if v not in chosen]
    edges = [(a, b) for a, b in T.edges() if a not in chosen and b not in chosen]
    return StripResult("leafy", Forest(kept, edges), frozenset(chosen), dict(demands), n_original=T.n)


def _strip_paths(T: TreeShape, paths: list[tuple]) -> StripResult:
    seen: set[int] = set()
    for p in paths:
        if not is_bare_path(T, p):
            raise ValueError(f"{p} is not a bare path")
        if seen & set(p):
            raise ValueError("bare paths overlap")
        seen |= set(p)
    removed = {v for p in paths for v in p[1:-1]}
    kept = [v for v in range(T.n) if v not in removed]
    edges = [(a, b) for a, b in T.edges() if a not in removed and b not in removed]
    # a length-1 path has no interior; its edge must go too
    direct = {frozenset((p[0], p[1])) for p in paths if len(p) == 2}
    edges = [e for e in edges if frozenset(e) not in direct]
    requests = [(p[0], p[-1], len(p) - 1) for p in paths]
    return StripResult("pathy", Forest(kept, edges), frozenset(removed), requests=requests,
                       paths=paths, n_original=T.n)


def reconstruct(res: StripResult) -> TreeShape:
    """Re-attach synthetic leaves / paths; the result is isomorphic to the original tree."""
    labels = list(res.forest.vertices)
    idx = {v: i for i, v in enumerate(labels)}
    edges = [(idx[a], idx[b]) for a, b in res.forest.edges()]
    nxt = len(labels)
    for center, count in sorted(res.demands.items()):
        for _ in range(count):
            edges.append((idx[center], nxt))
            nxt += 1
    for a, b, k in res.requests:
        prev = idx[a]
        for _ in range(k - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, idx[b]))
    return TreeShape.from_edges(nxt, edges)


# canonical form

def centroids(T: TreeShape) -> list[int]:
    size = [1] * T.n
    for v in reversed(T.bfs_order):
        if T.parent[v] != -1:
            size[T.parent[v]] += size[v]
    best, out = T.n, []
    for v in range(T.n):
        worst = T.n - size[v]
        for c in T.children[v]:
            worst = max(worst, size[c])
        if worst < best:
            best, out = worst, [v]
        elif worst == best:
            out.append(v)
    return out


def _encode(T: TreeShape, root: int) -> str:
    parent = {root: -1}
    order = [root]
    i = 0
    while i < len(order):
        v = order[i]
        for w in T.adj[v]:
            if w != parent[v]:
                parent[w] = v
                order.append(w)
        i += 1
    code: dict[int, str] = {}
    for v in reversed(order):
        kids = sorted(code.pop(w) for w in T.adj[v] if w != parent[v])
        code[v] = "(" + "".join(kids) + ")"
    return code[root]


def canonical_form(T: TreeShape) -> str:
    """Isomorphism-invariant string: AHU encoding rooted at the centroid."""
    return min(_encode(T, c) for c in centroids(T))


# serialization

def format_tree(T: TreeShape) -> str:
    lines = [str(T.n)] + [f"{p} {c}" for p, c in T.edges()]
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> TreeShape:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError("empty tree file")
    n = int(rows[0][0])
    parent = [-1] * n
    for a, b in rows[1:]:
        p, c = int(a), int(b)
        if parent[c] != -1:
            raise ValueError(f"vertex {c} has two parents")
        parent[c] = p
    if len(rows) - 1 != n - 1:
        raise ValueError("tree file must list n-1 edges")
    return TreeShape(parent)


def write_tree(T: TreeShape, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_tree(T))


def read_tree(path) -> TreeShape:
    with open(path) as fh:
        return parse_tree(fh.read())
