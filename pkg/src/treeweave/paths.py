"""Exact-length vertex-disjoint paths.

Orientation lists: entry i describes the step from v_i to v_{i+1}; +1 asks for
the arc v_i -> v_{i+1}, -1 for v_{i+1} -> v_i. In undirected hosts every step
is just an edge and the list is ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from ._bits import iter_bits, mask_of
from .embed import EmbedConfig, embed_rooted
from .expansion import split_target
from .errors import EmbedFailed, MatchingInfeasible, NoPathFound, StageStalled
from .matching import generalized_matching
from .rng import make_rng
from .trees import TreeShape


@dataclass(frozen=True)
class PathRequest:
    x: int
    y: int
    k: int
    orient: Optional[tuple] = None

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("path endpoints must differ")
        if self.k < 1:
            raise ValueError("path length must be at least 1")
        if self.orient is not None:
            object.__setattr__(self, "orient", tuple(int(o) for o in self.orient))
            if len(self.orient) != self.k or any(o not in (1, -1) for o in self.orient):
                raise ValueError("orientation list must have k entries in {+1, -1}")


def as_request(r) -> PathRequest:
    if isinstance(r, PathRequest):
        return r
    return PathRequest(*r)


ExactPath = list  # vertex sequence v_0..v_k


def path_problems(host, path: Sequence[int], req: Optional[PathRequest] = None,
                  interior: Optional[Iterable[int]] = None) -> list[str]:
    """Everything wrong with `path` as a realization of `req` (empty list = valid)."""
    out = []
    if len(set(path)) != len(path):
        out.append("repeated vertex")
    if req is not None:
        if len(path) != req.k + 1:
            out.append(f"length {len(path) - 1} != {req.k}")
        if path and (path[0] != req.x or path[-1] != req.y):
            out.append("wrong endpoints")
    signs = _signs(host, req.orient if req is not None else None, len(path) - 1)
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        ok = host.has_arc(a, b) if signs[i] >= 0 else host.has_arc(b, a)
        if not ok:
            out.append(f"step {i} ({a},{b}) missing")
    if interior is not None:
        allowed = set(interior)
        for v in path[1:-1]:
            if v not in allowed:
                out.append(f"interior vertex {v} outside the allowed set")
    return out


def _signs(host, orient, k: int) -> list[int]:
    if not host.directed:
        return [0] * k
    if orient is None:
        return [1] * k
    return list(orient)


class Budget:
    def __init__(self, n: Optional[int]):
        self.left = n if n is not None else math.inf

    def spend(self, amount: int = 1) -> bool:
        self.left -= amount
        return self.left >= 0


def iter_exact_paths(host, x: int, y: int, k: int, pool: int, orient=None, budget: Optional[Budget] = None,
                     rng=None, slots: Optional[dict] = None, links: Sequence[tuple] = (),
                     prefer: Optional[str] = None) -> Iterator[list]:
    """Depth-first enumeration of x..y paths of length k with interior in `pool` (a bitmask).

    `slots[i]` optionally restricts position i to a bitmask; `links` holds extra
    adjacency constraints (a, b, s) between positions a < b: the arc
    v_a -> v_b when s >= 0, v_b -> v_a when s < 0 (plain edge when undirected).
    Candidates are tried by smallest id, or shuffled when `rng` is given;
    prefer="few" tries candidates with the fewest free onward neighbours first.
    """
    budget = budget or Budget(None)
    om, im = host.out_masks, host.in_masks
    signs = _signs(host, orient, k)
    fwd = lambda v, s: om[v] if s >= 0 else im[v]
    if k == 1:
        if fwd(x, signs[0]) >> y & 1 and not links:
            yield [x, y]
        return
    full = pool & ~(1 << x) & ~(1 << y)
    slot = [full] * (k + 1)
    if slots:
        for i, m in slots.items():
            slot[i] &= m
    slot[k - 1] &= im[y] if signs[k - 1] >= 0 else om[y]
    later: dict = {}
    for a, b, s in links:
        if a > b:
            a, b, s = b, a, -s
        if a == 0 and b == k:
            if not (om[x] if s >= 0 else im[x]) >> y & 1:
                return
        elif a == 0:
            slot[b] &= om[x] if s >= 0 else im[x]
        elif b == k:
            slot[a] &= im[y] if s >= 0 else om[y]
        else:
            later.setdefault(b, []).append((a, s))
    # static reachability: position i must reach y in the remaining k - i steps
    reach = 1 << y
    for i in range(k - 1, 0, -1):
        s = signs[i]
        back = im if s >= 0 else om
        prev = 0
        for w in iter_bits(reach):
            prev |= back[w]
        slot[i] &= prev
        reach = slot[i]
        if not reach:
            return
    path = [x]
    free = full
    stack: list[list[int]] = []

    def candidates(i: int) -> list[int]:
        m = fwd(path[-1], signs[i - 1]) & free & slot[i]
        for a, s in later.get(i, ()):
            m &= om[path[a]] if s >= 0 else im[path[a]]
        if not m:
            return []
        out = []
        if i < k - 1:
            nxt_slot = slot[i + 1]
            s_next = signs[i]
            for c in iter_bits(m):
                if fwd(c, s_next) & free & nxt_slot & ~(1 << c):
                    out.append(c)
        else:
            out = list(iter_bits(m))
        if rng is not None:
            rng.shuffle(out)
        else:
            out.reverse()
        if prefer == "few" and i < k - 1:
            s_next = signs[i]
            out.sort(key=lambda c: -(fwd(c, s_next) & free).bit_count())
        return out

    i = 1
    while True:
        if i == k:
            yield path + [y]
            i -= 1
            free |= 1 << path.pop()
            continue
        if len(stack) < i:
            if not budget.spend():
                return
            stack.append(candidates(i))
        lst = stack[i - 1]
        if lst:
            c = lst.pop()
            path.append(c)
            free &= ~(1 << c)
            i += 1
            continue
        stack.pop()
        i -= 1
        if i == 0:
            return
        free |= 1 << path.pop()


def find_exact_path(host, x, y, k, pool: int, orient=None, budget: Optional[int] = None, rng=None,
                    slots=None, links=(), prefer: Optional[str] = None) -> Optional[list]:
    for p in iter_exact_paths(host, x, y, k, pool, orient, Budget(budget), rng, slots, links, prefer):
        return p
    return None


# single-path route: expanding cores, two trees, one common neighbour

@dataclass
class WeaveConfig:
    tree_arity: int = 2  # d of the d-ary trees
    m: int = 4  # "many pairs" scale; tree depth is ceil(log m / log d)
    use_tree: bool = True
    search_budget: int = 20_000  # DFS nodes per request
    d0: int = 2  # matching degree between stages
    stages: Optional[int] = None  # None: enough stages to drive the survivor bound below 1
    stage_fraction: float = 1 / 16  # each stage set W_alpha as a fraction of |W|
    max_retries: int = 20
    joint_budget: int = 200_000
    strict: bool = False
    verify_split: bool = False  # sampled expansion check of every stage set
    split_d: float = 1.0


def _step_mask(host, v: int, sign: int) -> int:
    return host.out_masks[v] if sign >= 0 else host.in_masks[v]


def _peel(host, part: int, thresh: int, cap: int) -> int:
    """Remove low-degree vertices from `part` until none are left (at most `cap` removals)."""
    om, im = host.out_masks, host.in_masks
    core = part
    removed = 0
    changed = True
    while changed and removed < cap:
        changed = False
        for v in iter_bits(core):
            deg = min((om[v] & core).bit_count(), (im[v] & core).bit_count())
            if deg < thresh:
                core &= ~(1 << v)
                removed += 1
                changed = True
                if removed >= cap:
                    break
    return core


def _handle_tree(handle: int, d: int, depth: int, signs: Sequence[int], directed: bool) -> tuple[TreeShape, list[int]]:
    """A path of `handle` edges from the root, then a complete d-ary tree of the
    given depth. Returns the tree and its deepest-level vertices."""
    parent = [-1]
    level_of = [0]
    for i in range(handle):
        parent.append(i)
        level_of.append(i + 1)
    frontier = [handle]
    for t in range(depth):
        nxt = []
        for p in frontier:
            for _ in range(d):
                parent.append(p)
                level_of.append(handle + t + 1)
                nxt.append(len(parent) - 1)
        frontier = nxt
    orient = None
    if directed:
        orient = [0] + [signs[level_of[v] - 1] for v in range(1, len(parent))]
    return TreeShape(parent, orient), frontier


def _tree_path(T: TreeShape, emb: dict, leaf: int) -> list[int]:
    out = []
    v = leaf
    while v != -1:
        out.append(emb[v])
        v = T.parent[v]
    return out[::-1]


def _tree_route(host, req: PathRequest, free: int, v1: int, v2: int, cfg: WeaveConfig, seed) -> Optional[list]:
    k = req.k
    d = max(2, cfg.tree_arity)
    depth = max(1, math.ceil(math.log(max(cfg.m, 2)) / math.log(d)))
    a = math.ceil(k / 2) - 1
    b = k // 2 - 1
    h1, h2 = a - depth, b - depth
    if h1 < 0 or h2 < 0:
        return None
    signs = _signs(host, req.orient, k)
    directed = host.directed
    s1 = [signs[t] for t in range(a)]
    # tree from y runs backwards: child at depth t+1 sits at position k-t-1
    s2 = [-signs[k - t - 1] for t in range(b)]
    ecfg = EmbedConfig(max_retries=1, backtrack_steps=200)
    T1, last1 = _handle_tree(h1, d, depth, s1, directed)
    try:
        e1 = embed_rooted(host, T1, req.x, iter_bits(v1 & free), ecfg, seed).map
    except EmbedFailed:
        return None
    used1 = mask_of(e1.values())
    T2, last2 = _handle_tree(h2, d, depth, s2, directed)
    try:
        e2 = embed_rooted(host, T2, req.y, iter_bits(v2 & free & ~used1), ecfg, seed + 1).map
    except EmbedFailed:
        return None
    used = used1 | mask_of(e2.values())
    ends1 = {e1[v]: v for v in last1}
    ends2 = {e2[v]: v for v in last2}
    mid = free & ~used
    sa, sb = signs[a], signs[a + 1]
    reach1 = 0
    for h in ends1:
        reach1 |= _step_mask(host, h, sa)
    into2 = 0
    for h in ends2:
        into2 |= host.in_masks[h] if sb >= 0 else host.out_masks[h]
    cand = reach1 & into2 & mid
    if not cand:
        return None
    u = (cand & -cand).bit_length() - 1
    h1v = next(h for h in sorted(ends1) if _step_mask(host, h, sa) >> u & 1)
    h2v = next(h for h in sorted(ends2) if _step_mask(host, u, sb) >> h & 1)
    left = _tree_path(T1, e1, ends1[h1v])
    right = _tree_path(T2, e2, ends2[h2v])
    return left + [u] + right[::-1]


def find_one_exact_path(G, requests: Sequence, U: Iterable[int], cfg: Optional[WeaveConfig] = None,
                        seed=0) -> tuple[int, list]:
    """Some request index i and an exact x_i..y_i path with interior in U."""
    cfg = cfg or WeaveConfig()
    reqs = [as_request(r) for r in requests]
    umask = U if isinstance(U, int) else mask_of(U)
    ends = mask_of(v for r in reqs for v in (r.x, r.y))
    if ends & umask:
        raise ValueError("request endpoints must lie outside U")
    if not reqs:
        raise NoPathFound("no requests")
    rng = make_rng(seed, 0xF1)
    if cfg.use_tree and umask.bit_count() >= 8:
        order = list(iter_bits(umask))
        rng.shuffle(order)
        half = len(order) // 2
        u1, u2 = mask_of(order[:half]), mask_of(order[half:])
        d = max(2, cfg.tree_arity)
        cap = max(cfg.m, 1)
        v1 = _peel(G, u1, 2 * d, cap)
        v2 = _peel(G, u2, 2 * d, cap)

        def score(i):
            r = reqs[i]
            s = _signs(G, r.orient, r.k)
            fx = (_step_mask(G, r.x, s[0]) & v1).bit_count()
            fy = ((G.in_masks[r.y] if s[-1] >= 0 else G.out_masks[r.y]) & v2).bit_count()
            return (-min(fx, fy), i)

        for i in sorted(range(len(reqs)), key=score)[:8]:
            p = _tree_route(G, reqs[i], umask, v1, v2, cfg, rng.getrandbits(32))
            if p is not None:
                return i, p
    for i, r in enumerate(reqs):
        p = find_exact_path(G, r.x, r.y, r.k, umask, r.orient, cfg.search_budget)
        if p is not None:
            return i, p
    raise NoPathFound(f"none of {len(reqs)} requests could be routed")


# staged connection of many pairs

@dataclass
class StageState:
    alpha: int
    survivors: list
    bound: float
    S: dict  # request index -> frozenset
    T: dict
    done: dict  # request index -> path
    partition_sizes: list
    note: str = ""


def _route_greedy(G, reqs, idx, umask, cfg, rng):
    """Route requests one at a time through U; returns completed paths and leftover mask."""
    done = {}
    remaining = list(idx)
    while remaining:
        sub = [reqs[i] for i in remaining]
        try:
            j, p = find_one_exact_path(G, sub, umask, cfg, rng.getrandbits(32))
        except NoPathFound:
            break
        i = remaining.pop(j)
        done[i] = p
        umask &= ~mask_of(p[1:-1])
    return done, remaining, umask


def _stage_count(m: int, d0: int) -> int:
    return max(1, math.floor(math.log(2 * m) / math.log(d0 + 1)) + 1)


def _staged(G, reqs, wmask, cfg: WeaveConfig, rng, trace, partition=None):
    n_w = wmask.bit_count()
    d0 = cfg.d0
    if partition is None:
        w_size = int(n_w * cfg.stage_fraction)
        m = max(1, w_size // (8 * d0))
        k = cfg.stages or _stage_count(m, d0)
        sizes = [w_size] * k + [n_w - k * w_size]
        parts = split_target(G, iter_bits(wmask), sizes, cfg.split_d, rng.getrandbits(32),
                             verify=cfg.verify_split)
        stage_sets = [mask_of(p) for p in parts[:k]]
        umask = mask_of(parts[k])
    else:
        *stage_sets, umask = [mask_of(p) for p in partition]
        k = len(stage_sets)
        w_size = min((s.bit_count() for s in stage_sets), default=0)
        m = max(1, w_size // (8 * d0))
    sizes = [s.bit_count() for s in stage_sets] + [umask.bit_count()]
    idx = list(range(len(reqs)))
    done, surv, umask = _route_greedy(G, reqs, idx, umask, cfg, rng)
    S = {i: {reqs[i].x: (0, None)} for i in surv}
    T = {i: {reqs[i].y: (0, None)} for i in surv}
    bound = 2 * m

    def snapshot(alpha, note=""):
        if trace is not None:
            trace.append(StageState(alpha, list(surv), bound,
                                    {i: frozenset(S[i]) for i in surv},
                                    {i: frozenset(T[i]) for i in surv},
                                    dict(done), sizes, note))

    if len(surv) > bound:
        snapshot(0, "stalled")
        raise StageStalled(0, len(surv))
    snapshot(0)
    for alpha in range(1, k + 1):
        if not surv:
            break
        avail = stage_sets[alpha - 1]
        left = []
        cands = {}
        for i in surv:
            r = reqs[i]
            sg = _signs(G, r.orient, r.k)
            for v, (dep, _) in S[i].items():
                key = (i, "S", v)
                left.append(key)
                s = sg[dep] if dep < r.k else 1
                cands[key] = list(iter_bits(_step_mask(G, v, s) & avail))
            for v, (dep, _) in T[i].items():
                key = (i, "T", v)
                left.append(key)
                s = sg[r.k - dep - 1] if dep < r.k else 1
                cands[key] = list(iter_bits((G.in_masks[v] if s >= 0 else G.out_masks[v]) & avail))
        try:
            got = generalized_matching(left, d0, cands, rng=rng)
        except MatchingInfeasible:
            snapshot(alpha, "matching failed")
            raise StageStalled(alpha, len(surv), "d0-matching into the stage set failed")
        for (i, side, v), kids in got.items():
            tree = S[i] if side == "S" else T[i]
            dep = tree[v][0]
            for c in kids:
                tree[c] = (dep + 1, v)
        still = []
        for i in surv:
            r = reqs[i]
            sg = _signs(G, r.orient, r.k)
            ss, ts = sorted(S[i]), sorted(T[i])
            subs, meta = [], []
            for s, t in zip(ss, ts):
                ds, dt = S[i][s][0], T[i][t][0]
                length = r.k - ds - dt
                if length < 1:
                    continue
                orient = tuple(sg[ds:r.k - dt]) if G.directed else None
                subs.append(PathRequest(s, t, length, orient))
                meta.append((s, t))
            try:
                if not subs:
                    raise NoPathFound("no admissible pair")
                j, mid = find_one_exact_path(G, subs, umask, cfg, rng.getrandbits(32))
            except NoPathFound:
                still.append(i)
                continue
            s, t = meta[j]
            head = _walk_up(S[i], s)[::-1]
            tail = _walk_up(T[i], t)
            path = head + mid[1:-1] + tail
            done[i] = path
            umask &= ~mask_of(mid[1:-1])
        # completed requests release nothing: leftover tree vertices stay out of U
        surv = still
        for i in list(S):
            if i not in surv:
                S.pop(i)
                T.pop(i)
        bound = 2 * m / (d0 + 1) ** alpha
        if len(surv) > bound:
            snapshot(alpha, "stalled")
            raise StageStalled(alpha, len(surv))
        snapshot(alpha)
    if surv:
        raise StageStalled(k, len(surv), "requests left after the last stage")
    return [done[i] for i in range(len(reqs))]


def _walk_up(tree: dict, v: int) -> list[int]:
    out = []
    while v is not None:
        out.append(v)
        v = tree[v][1]
    return out


def _joint(G, reqs, wmask, budget: int, rng=None) -> Optional[list]:
    """Backtracking over all requests at once; exact on small instances."""
    bud = Budget(budget)
    order = sorted(range(len(reqs)), key=lambda i: reqs[i].k)
    out: dict = {}

    def rec(j: int, free: int) -> bool:
        if j == len(order):
            return True
        r = reqs[order[j]]
        for p in iter_exact_paths(G, r.x, r.y, r.k, free, r.orient, bud, rng):
            out[order[j]] = p
            if rec(j + 1, free & ~mask_of(p[1:-1])):
                return True
            if bud.left < 0:
                return False
        return False

    if rec(0, wmask):
        return [out[i] for i in range(len(reqs))]
    return None


def _check_requests(G, reqs, wmask, cfg):
    ends = [v for r in reqs for v in (r.x, r.y)]
    if len(set(ends)) != len(ends):
        raise ValueError("request endpoints must be distinct")
    if mask_of(ends) & wmask:
        raise ValueError("request endpoints must lie outside W")
    total = sum(r.k for r in reqs)
    if cfg.strict and total > 0.75 * wmask.bit_count():
        raise ValueError("total requested length exceeds 3|W|/4")


def connect_pairs_exact(G, requests: Sequence, W: Iterable[int], cfg: Optional[WeaveConfig] = None, seed=0,
                        trace: Optional[list] = None, partition=None) -> list:
    """Disjoint exact-length paths, one per request, with interiors in W.

    Stage 0 routes greedily through U; later stages grow end-sets by
    d0-matchings into fresh stage sets and retry from the grown ends. Stalled
    runs are retried with fresh randomness; tiny instances fall back to a joint
    backtracking search.
    """
    cfg = cfg or WeaveConfig()
    reqs = [as_request(r) for r in requests]
    if not reqs:
        return []
    wmask = W if isinstance(W, int) else mask_of(W)
    _check_requests(G, reqs, wmask, cfg)
    last: Optional[StageStalled] = None
    for attempt in range(cfg.max_retries + 1):
        rng = make_rng(seed, 0xC0, attempt)
        try:
            return _staged(G, reqs, wmask, cfg, rng, trace, partition)
        except StageStalled as e:
            last = e
        if wmask.bit_count() <= 64 and attempt >= 2:
            break
    res = _joint(G, reqs, wmask, cfg.joint_budget)
    if res is not None:
        if trace is not None:
            trace.append(StageState(-1, [], 0.0, {}, {}, dict(enumerate(res)), [], "joint search"))
        return res
    raise last


def connect_pairs_exact_directed(D, requests: Sequence, W: Iterable[int], cfg: Optional[WeaveConfig] = None,
                                 seed=0, trace: Optional[list] = None, partition=None) -> list:
    """Directed variant: each request carries an orientation list (default all forward)."""
    if not D.directed:
        raise ValueError("host must be a DiGraph")
    reqs = []
    for r in requests:
        r = as_request(r)
        if r.orient is None:
            r = PathRequest(r.x, r.y, r.k, (1,) * r.k)
        reqs.append(r)
    return connect_pairs_exact(D, reqs, W, cfg, seed, trace, partition)
