"""Absorbers: single-vertex gadgets, merging, the resilient matching template,
and absorbing structures that turn any r-subset of A into exact-length paths.

Two absorber kinds are built:

* "gadget": the two-traversal gadget on a path Q = x0 x1..xk y0 yk..y1 plus k
  disjoint x_i,y_i-paths (reversible paths in digraphs), merged per index by
  exact-length links;
* "edge": an x_j,y_j-path containing, for every wired vertex v, a consecutive
  pair a,b with a~v~b (a->v->b in digraphs). Inserting v between a and b
  lengthens the path by exactly one. Used when the gadgets above do not fit in
  l-1 vertices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ._bits import iter_bits, mask_of
from .errors import (AbsorberFailed, MatchingInfeasible, NoMatching, NoPathFound, ResampleExhausted,
                     StageStalled)
from .matching import generalized_matching
from .paths import Budget, PathRequest, WeaveConfig, connect_pairs_exact, find_exact_path
from .rng import make_rng


def _arc(G, a: int, b: int) -> bool:
    return G.has_arc(a, b)


def path_errors(G, path: Sequence[int], start: int, end: int) -> list[str]:
    out = []
    if not path or path[0] != start or path[-1] != end:
        out.append(f"path does not run {start}..{end}")
    if len(set(path)) != len(path):
        out.append("path repeats a vertex")
    for a, b in zip(path, path[1:]):
        if not _arc(G, a, b):
            out.append(f"missing {'arc' if G.directed else 'edge'} {a}-{b}")
    return out


@dataclass
class Absorber:
    """(R, r, s) with an r,s-path on R and, per absorbable v, an r,s-path on R + v."""
    R: frozenset
    r: int
    s: int
    skip_path: list
    absorb_paths: dict

    @classmethod
    def single(cls, R, r, s, v, skip_path, absorb_path) -> "Absorber":
        return cls(frozenset(R), r, s, list(skip_path), {v: list(absorb_path)})

    @property
    def absorbable(self) -> frozenset:
        return frozenset(self.absorb_paths)

    @property
    def v(self) -> int:
        (v,) = self.absorb_paths
        return v

    @property
    def absorb_path(self) -> list:
        return self.absorb_paths[self.v]

    @property
    def size(self) -> int:
        return len(self.R)


def validate_absorber(G, ab: Absorber) -> list[str]:
    """Problems with the witness traversals; needs no knowledge of how ab was built."""
    out = [f"skip: {e}" for e in path_errors(G, ab.skip_path, ab.r, ab.s)]
    if set(ab.skip_path) != set(ab.R) or len(ab.skip_path) != len(ab.R):
        out.append("skip path does not cover R exactly")
    for v, p in ab.absorb_paths.items():
        if v in ab.R:
            out.append(f"absorbable {v} lies inside R")
        out += [f"absorb {v}: {e}" for e in path_errors(G, p, ab.r, ab.s)]
        if set(p) != set(ab.R) | {v} or len(p) != len(ab.R) + 1:
            out.append(f"absorb path for {v} does not cover R + v exactly")
    return out


def merge_absorbers(parts: Sequence[Absorber], links: Sequence[Sequence[int]],
                    head: Optional[Sequence[int]] = None, tail: Optional[Sequence[int]] = None) -> Absorber:
    """Chain absorbers with connecting paths links[i] from parts[i].s to parts[i+1].r.
    Optional head (ending at parts[0].r) and tail (starting at parts[-1].s) paths
    extend the ends. The result absorbs every vertex any part absorbs."""
    if len(links) != len(parts) - 1:
        raise ValueError("need one link between each consecutive pair of absorbers")
    for i, p in enumerate(links):
        if p[0] != parts[i].s or p[-1] != parts[i + 1].r:
            raise ValueError(f"link {i} does not join consecutive absorbers")
    if head is not None and head[-1] != parts[0].r:
        raise ValueError("head must end at the first absorber")
    if tail is not None and tail[0] != parts[-1].s:
        raise ValueError("tail must start at the last absorber")

    def route(choice: Optional[int], v=None) -> list:
        seq = list(head[:-1]) if head is not None else []
        for i, part in enumerate(parts):
            seq += part.absorb_paths[v] if i == choice else part.skip_path
            if i < len(links):
                seq += list(links[i][1:-1])
        if tail is not None:
            seq += list(tail[1:])
        return seq

    skip = route(None)
    if len(set(skip)) != len(skip):
        raise ValueError("absorbers and links overlap")
    absorb = {}
    for i, part in enumerate(parts):
        for v in part.absorb_paths:
            if v not in absorb and v not in skip:
                absorb[v] = route(i, v)
    return Absorber(frozenset(skip), skip[0], skip[-1], skip, absorb)


# single-vertex gadgets

def _q_positions(k: int) -> tuple[list[int], list[int]]:
    """Positions of x_0..x_k and y_0..y_k on Q = x0 x1..xk y0 yk..y1 (y_0 unused in ys[0] slot)."""
    xs = list(range(k + 1))
    ys = [k + 1] + [2 * k + 2 - i for i in range(1, k + 1)]
    return xs, ys


def assemble_absorber(Q: Sequence[int], P: Sequence[Sequence[int]], v: int, k: int,
                      P_back: Optional[Sequence[Sequence[int]]] = None) -> Absorber:
    """Both traversals of the gadget: P[i-1] runs x_i..y_i; P_back[i-1] (reversible
    case) runs y_i..x_i, default the reverse of P[i-1]."""
    xs_pos, ys_pos = _q_positions(k)
    x = [Q[p] for p in xs_pos]
    y = [Q[p] for p in ys_pos]
    fwd = [list(p) for p in P]
    bwd = [list(p) for p in P_back] if P_back is not None else [p[::-1] for p in fwd]

    def walk(start_forward: bool) -> list:
        seq = []
        for i in range(1, k + 1):
            forward = (i % 2 == 1) == start_forward
            seq += fwd[i - 1] if forward else bwd[i - 1]
        return seq

    skip = [x[0]] + walk(True) + [y[0]]
    absorb = [x[0], v] + walk(False) + [y[0]]
    return Absorber.single(skip, x[0], y[0], v, skip, absorb)


def _q_request_orient(G, k: int):
    return tuple([1] * (k + 1) + [-1] * k) if G.directed else None


def build_absorber(G, v: int, anchors: tuple[int, int], W2: Iterable[int], W3: Iterable[int], k: int = 2,
                   cfg: Optional[WeaveConfig] = None, seed=0, budget: int = 200_000) -> Absorber:
    """One gadget for v with anchors (x0, y1), both adjacent to v.

    Q of length 2k+1 runs through W2, the k paths x_i..y_i of length k-1 through
    W3. For k = 2 those paths are single edges, so Q is found with the two chord
    constraints directly. Undirected hosts only; see build_directed_absorber.
    """
    if G.directed:
        raise ValueError("use build_directed_absorber for digraphs")
    if k < 2:
        raise ValueError("k must be at least 2")
    x0, y1 = anchors
    if not (G.has_edge(v, x0) and G.has_edge(v, y1)):
        raise ValueError("anchors must be adjacent to v")
    w2 = mask_of(W2) & ~(1 << v)
    w3 = mask_of(W3) & ~(1 << v) & ~w2
    rng = make_rng(seed, 0xAB5)
    xs_pos, ys_pos = _q_positions(k)
    L = 2 * k + 1
    if k == 2:
        links = [(xs_pos[i], ys_pos[i], 0) for i in (1, 2)]
        Q = find_exact_path(G, x0, y1, L, w2, budget=budget, rng=rng, links=links)
        if Q is None:
            raise AbsorberFailed(f"no chorded Q for vertex {v}")
        P = [[Q[xs_pos[i]], Q[ys_pos[i]]] for i in (1, 2)]
        return assemble_absorber(Q, P, v, k)
    Q = find_exact_path(G, x0, y1, L, w2, budget=budget, rng=rng)
    if Q is None:
        raise AbsorberFailed(f"no path Q for vertex {v}")
    reqs = [PathRequest(Q[xs_pos[i]], Q[ys_pos[i]], k - 1) for i in range(1, k + 1)]
    try:
        P = connect_pairs_exact(G, reqs, w3 & ~mask_of(Q), cfg, rng.getrandbits(32))
    except (StageStalled, NoPathFound) as e:
        raise AbsorberFailed(f"inner paths for vertex {v}: {e}") from e
    return assemble_absorber(Q, P, v, k)


# reversible paths

@dataclass
class ReversiblePath:
    x: int
    y: int
    forward: list  # directed x -> y path on all gadget vertices
    backward: list  # directed y -> x path on the same vertices

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.forward)


def validate_reversible(D, rp: ReversiblePath) -> list[str]:
    out = [f"forward: {e}" for e in path_errors(D, rp.forward, rp.x, rp.y)]
    out += [f"backward: {e}" for e in path_errors(D, rp.backward, rp.y, rp.x)]
    if set(rp.forward) != set(rp.backward):
        out.append("traversals use different vertex sets")
    return out


def _reversible_from_skeleton(x, y, heavy: Sequence[Sequence[int]]) -> ReversiblePath:
    fwd = [x] + [v for h in heavy for v in h] + [y]
    bwd = [y] + [v for h in reversed(heavy) for v in h] + [x]
    return ReversiblePath(x, y, fwd, bwd)


def reversible_links(t: int, h: int) -> tuple[int, list[tuple]]:
    """Length and back-arc constraints of the forward chain x b1..e1 b2..e2 .. bt..et y
    where each heavy segment b_i..e_i has h arcs."""
    k = t * (h + 1) + 1
    b = [1 + i * (h + 1) for i in range(t)]
    e = [bi + h for bi in b]
    links = [(0, e[0], -1)]  # e1 -> x
    for i in range(t - 1):
        links.append((b[i], e[i + 1], -1))  # e_{i+1} -> b_i
    links.append((b[-1], k, -1))  # y -> b_t
    return k, links


def build_reversible_path(D, x: int, y: int, pool: Iterable[int], t: int = 1, h: int = 0,
                          cfg: Optional[WeaveConfig] = None, seed=0, budget: int = 200_000) -> ReversiblePath:
    """Gadget with directed x->y and y->x traversals over the same vertex set.

    Forward chain x -> b1 ~> e1 -> b2 ~> ... ~> e_t -> y plus back arcs e1 -> x,
    e_{i+1} -> b_i and y -> b_t; each heavy segment b_i ~> e_i is a directed path
    of h arcs (h = 0 makes b_i = e_i). Small h is one constrained search; for
    h >= 2 the skeleton is found first and the heavy segments are woven after.
    """
    if not D.directed:
        raise ValueError("host must be a DiGraph")
    if t < 1 or h < 0:
        raise ValueError("need t >= 1 and h >= 0")
    pmask = mask_of(pool) & ~(1 << x) & ~(1 << y)
    rng = make_rng(seed, 0x2E7)
    if h <= 1:
        k, links = reversible_links(t, h)
        p = find_exact_path(D, x, y, k, pmask, budget=budget, rng=rng, links=links)
        if p is None:
            raise AbsorberFailed(f"no reversible path {x}->{y}")
        heavy = [p[1 + i * (h + 1): 2 + i * (h + 1) + h] for i in range(t)]
        return _reversible_from_skeleton(x, y, heavy)
    sk = _skeleton(D, x, y, t, pmask, rng, budget)
    if sk is None:
        raise AbsorberFailed(f"no reversible skeleton {x}->{y}")
    reqs = [PathRequest(sk[2 * i], sk[2 * i + 1], h, (1,) * h) for i in range(t)]
    try:
        heavy = connect_pairs_exact(D, reqs, pmask & ~mask_of(sk), cfg, rng.getrandbits(32))
    except (StageStalled, NoPathFound) as e:
        raise AbsorberFailed(f"heavy segments: {e}") from e
    return _reversible_from_skeleton(x, y, heavy)


def _skeleton(D, x, y, t, pmask, rng, budget) -> Optional[list]:
    """b1, e1, .., bt, et with x->b1, e_i->b_{i+1}, e_t->y, e1->x, e_{i+1}->b_i, y->b_t."""
    om, im = D.out_masks, D.in_masks
    bud = Budget(budget)
    out: list = []

    def rec(i: int, free: int) -> bool:
        if not bud.spend():
            return False
        if i == t:
            return True
        if i == 0:
            bmask = om[x] & free
        else:
            bmask = om[out[-1]] & free  # e_i -> b_{i+1}
        bs = list(iter_bits(bmask))
        rng.shuffle(bs)
        for b in bs:
            if i == t - 1 and not im[b] >> y & 1:
                continue
            emask = free & ~(1 << b)
            if i == 0:
                emask &= im[x]
            else:
                emask &= im[out[-2]]  # e_{i+1} -> b_i
            if i == t - 1:
                emask &= im[y]
            es = list(iter_bits(emask))
            rng.shuffle(es)
            for e in es[:8]:
                out.extend((b, e))
                if rec(i + 1, free & ~(1 << b) & ~(1 << e)):
                    return True
                del out[-2:]
        return False

    return out if rec(0, pmask) else None


def build_directed_absorber(D, v: int, anchors: tuple[int, int], W2: Iterable[int], W3: Iterable[int],
                            k: int = 2, t: int = 1, h: int = 0, cfg: Optional[WeaveConfig] = None, seed=0,
                            budget: int = 200_000) -> Absorber:
    """Directed gadget: oriented Q = x0->x1->..->xk->y0<-yk<-..<-y1 through W2 and
    reversible x_i,y_i paths through W3; needs arcs x0 -> v -> y1."""
    if not D.directed:
        raise ValueError("host must be a DiGraph")
    x0, y1 = anchors
    if not (D.has_arc(x0, v) and D.has_arc(v, y1)):
        raise ValueError("need arcs x0 -> v -> y1")
    w2 = mask_of(W2) & ~(1 << v)
    w3 = mask_of(W3) & ~(1 << v) & ~w2
    rng = make_rng(seed, 0xDAB)
    xs_pos, ys_pos = _q_positions(k)
    Q = find_exact_path(D, x0, y1, 2 * k + 1, w2, _q_request_orient(D, k), budget, rng)
    if Q is None:
        raise AbsorberFailed(f"no oriented Q for vertex {v}")
    free = w3 & ~mask_of(Q)
    fwd, bwd = [], []
    for i in range(1, k + 1):
        rp = build_reversible_path(D, Q[xs_pos[i]], Q[ys_pos[i]], iter_bits(free), t, h, cfg,
                                   rng.getrandbits(32), budget)
        free &= ~mask_of(rp.forward)
        fwd.append(rp.forward)
        bwd.append(rp.backward)
    return assemble_absorber(Q, fwd, v, k, bwd)


# the resilient matching template

@dataclass
class FlexTemplate:
    """Bipartite H between X = 0..n_x-1 and Y = 0..m-1, Z = m..2m-1 (m = 2n_x/3).

    X_1 = 0..m-1 carries the union of random perfect matchings onto Y, copied onto
    Z; X_2 = m..n_x-1 duplicates the X_1 vertices listed in `copies`.
    """
    n_x: int
    m: int
    adj: list
    matchings: int
    copies: list = field(default_factory=list)

    @property
    def Y(self) -> range:
        return range(self.m)

    @property
    def Z(self) -> range:
        return range(self.m, 2 * self.m)

    def max_degree(self) -> int:
        deg = [0] * (2 * self.m)
        for row in self.adj:
            for r in row:
                deg[r] += 1
        return max(max((len(r) for r in self.adj), default=0), max(deg, default=0))

    def right_neighbors(self) -> dict:
        out: dict = {r: [] for r in range(2 * self.m)}
        for x, row in enumerate(self.adj):
            for r in row:
                out[r].append(x)
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(x, r) for x, row in enumerate(self.adj) for r in row]


def resilient_match(H: FlexTemplate, Zp: Iterable[int]) -> dict:
    """Perfect matching of X into Y + Z' (Z' a subset of Z of size n_x/3)."""
    zp = set(Zp)
    if len(zp) != H.n_x // 3 or not zp <= set(H.Z):
        raise ValueError("Z' must be a subset of Z of size n_x/3")
    allowed = set(H.Y) | zp
    try:
        got = generalized_matching(range(H.n_x), 1, lambda x: [r for r in H.adj[x] if r in allowed])
    except MatchingInfeasible as e:
        raise NoMatching(e.certificate, e.demand, e.neighbours) from None
    return {x: rs[0] for x, rs in got.items()}


def _template_once(n_x: int, q: int, rng) -> FlexTemplate:
    m = 2 * n_x // 3
    nb = [set() for _ in range(m)]
    for _ in range(q):
        perm = list(range(m))
        rng.shuffle(perm)
        for x, y in enumerate(perm):
            nb[x].add(y)
    rows = [sorted(nb[x] | {m + y for y in nb[x]}) for x in range(m)]
    copies = sorted(rng.sample(range(m), n_x - m))
    rows += [list(rows[c]) for c in copies]
    return FlexTemplate(n_x, m, rows, q, copies)


def template_resilient(H: FlexTemplate, verify="exhaustive", samples: int = 200, rng=None,
                       cap: int = 200_000) -> bool:
    """Check that every (or `samples` random) Z' admits a perfect matching."""
    size = H.n_x // 3
    Z = list(H.Z)
    if verify == "exhaustive" and math.comb(len(Z), size) <= cap:
        choices = itertools.combinations(Z, size)
    else:
        rng = rng or make_rng(0, 0xF7)
        choices = (rng.sample(Z, size) for _ in range(samples))
    for zp in choices:
        try:
            resilient_match(H, zp)
        except NoMatching:
            return False
    return True


def build_flex_template(n_x: int, seed=0, verify="exhaustive", samples: int = 200, matchings: int = 20,
                        max_resamples: int = 50) -> FlexTemplate:
    """Union of `matchings` random perfect matchings, duplicated as described on
    FlexTemplate, resampled until the resilience check passes. verify is
    "exhaustive", "sampled" or None."""
    if n_x < 3 or n_x % 3:
        raise ValueError("n_x must be a positive multiple of 3")
    if matchings < 1:
        raise ValueError("need at least one matching")
    rng = make_rng(seed, 0xF1E)
    for _ in range(max_resamples):
        H = _template_once(n_x, matchings, rng)
        if verify is None or template_resilient(H, verify, samples, rng):
            return H
    raise ResampleExhausted(f"no resilient template for n_x={n_x} after {max_resamples} draws")


# absorbing structures

@dataclass
class StructureConfig:
    l: int = 30
    kind: str = "auto"  # "auto", "edge" or "gadget"
    template_matchings: int = 5
    template_verify: str = "sampled"
    template_samples: int = 200
    gadget_k: int = 2  # k of the single-vertex gadgets (gadget kind)
    reversible_t: int = 1  # directed gadgets: heavy segments per reversible path
    reversible_h: int = 1
    min_link: int = 2
    search_budget: int = 50_000
    max_retries: int = 5
    weave: WeaveConfig = field(default_factory=WeaveConfig)


@dataclass
class AbsorbingStructure:
    kind: str
    l: int
    X: list
    Y: list
    A: list
    B: list
    template: FlexTemplate
    S: list  # S[j]: skip traversal x_j..y_j with l-1 vertices
    routes: dict  # (j, v) -> x_j..y_j path on S_j + v
    gadgets: list = field(default_factory=list)  # single-vertex absorbers (gadget kind)

    @property
    def r(self) -> int:
        return len(self.A) // 2

    def right_vertex(self, rid: int) -> int:
        m = self.template.m
        return self.B[rid] if rid < m else self.A[rid - m]

    def wired(self, j: int) -> list[int]:
        return [self.right_vertex(rid) for rid in self.template.adj[j]]

    @property
    def footprint(self) -> frozenset:
        out = set(self.B)
        for p in self.S:
            out.update(p[1:-1])
        return frozenset(out)

    def absorber(self, j: int) -> Absorber:
        return Absorber(frozenset(self.S[j]), self.X[j], self.Y[j], list(self.S[j]),
                        {v: self.routes[(j, v)] for v in self.wired(j)})

    def dump(self) -> str:
        lines = [f"# kind={self.kind} l={self.l} r={self.r} |W'|={len(self.footprint)}"]
        for j, p in enumerate(self.S):
            lines.append(f"S {j} " + " ".join(map(str, p)))
            lines.append(f"wired {j} " + " ".join(map(str, self.wired(j))))
        return "\n".join(lines) + "\n"


def expected_footprint(r: int, l: int) -> int:
    return 3 * r * (l - 2) - r


def validate_structure(G, st: AbsorbingStructure) -> list[str]:
    out = []
    seen: set = set()
    for j, p in enumerate(st.S):
        if len(p) != st.l - 1:
            out.append(f"S_{j} has {len(p)} vertices, expected {st.l - 1}")
        if seen & set(p):
            out.append(f"S_{j} overlaps an earlier S")
        seen |= set(p)
        out += [f"S_{j}: {e}" for e in validate_absorber(G, st.absorber(j))]
    if seen & set(st.A) or seen & set(st.B):
        out.append("S sets meet A or B")
    if len(st.footprint) != expected_footprint(st.r, st.l):
        out.append(f"|W'| = {len(st.footprint)} != {expected_footprint(st.r, st.l)}")
    return out


def absorb(st: AbsorbingStructure, A_prime: Iterable[int]) -> list[list]:
    """3r disjoint x_j,y_j-paths of length l-1 covering W' and A'."""
    ap = set(A_prime)
    if len(ap) != st.r or not ap <= set(st.A):
        raise ValueError("A' must be an r-subset of A")
    pos = {a: i for i, a in enumerate(st.A)}
    m = st.template.m
    M = resilient_match(st.template, [m + pos[a] for a in ap])
    return [st.routes[(j, st.right_vertex(M[j]))] for j in range(len(st.X))]


def _edge_absorber_path(G, x: int, y: int, length: int, targets: Sequence[int], pool: int, rng,
                        budget: int) -> Optional[list]:
    """x..y path with `length` arcs inside pool, holding for every target v a
    consecutive pair a, b with a -> v -> b (a ~ v ~ b when undirected)."""
    om, im = G.out_masks, G.in_masks
    bud = Budget(budget)
    tset = list(targets)
    path = [x]

    def covered_by(a: int, b: int, todo: list) -> list:
        return [v for v in todo if om[a] >> v & 1 and om[v] >> b & 1]

    def rec(free: int, todo: list) -> Optional[list]:
        if not bud.spend():
            return None
        cur = path[-1]
        steps_left = length - (len(path) - 1)
        if not todo:
            if steps_left < 1:
                return None
            tail = find_exact_path(G, cur, y, steps_left, free, budget=2000, rng=rng)
            return path[:-1] + tail if tail is not None else None
        if steps_left - 1 < len(todo) or steps_left < 2:
            return None
        nxt = om[cur] & free
        cover = 0
        approach = 0
        for v in todo:
            if im[v] >> cur & 1:
                cover |= om[v]
            approach |= im[v]
        first = list(iter_bits(nxt & cover))
        second = list(iter_bits(nxt & approach & ~cover))
        rng.shuffle(first)
        rng.shuffle(second)
        first.sort(key=lambda b: -len(covered_by(cur, b, todo)))
        for b in first[:6] + second[:6]:
            path.append(b)
            got = rec(free & ~(1 << b), [v for v in todo if not (om[cur] >> v & 1 and om[v] >> b & 1)])
            if got is not None:
                return got
            path.pop()
            if bud.left < 0:
                return None
        return None

    return rec(pool & ~(1 << x) & ~(1 << y), tset)


def _insert_routes(G, p: Sequence[int], targets: Sequence[int]) -> dict:
    om = G.out_masks
    out = {}
    for v in targets:
        for i in range(len(p) - 1):
            a, b = p[i], p[i + 1]
            if om[a] >> v & 1 and om[v] >> b & 1:
                out[v] = list(p[:i + 1]) + [v] + list(p[i + 1:])
                break
    return out


def _gadget_size(G, cfg: StructureConfig) -> int:
    k = cfg.gadget_k
    if G.directed:
        return 2 + k * (2 + cfg.reversible_t * (cfg.reversible_h + 1))
    return k * k + 2


def _gadget_split(G, cfg: StructureConfig, H: FlexTemplate, order: list, r: int) -> tuple[list, list, list]:
    """W1 (padding + anchors), W2 (the paths Q), W3 (inner paths and links), sized by demand."""
    k = cfg.gadget_k
    E = sum(len(row) for row in H.adj)
    inner = k * cfg.reversible_t * (cfg.reversible_h + 1) if G.directed else k * (k - 2)
    need2 = E * 2 * k
    need3 = E * inner + 3 * r * (cfg.l - 3) - E * _gadget_size(G, cfg)
    n1 = min(len(order) // 3, 2 * r + 4 * E)
    rest = len(order) - n1
    n2 = max(need2, round(rest * need2 / max(need2 + need3, 1)))
    return order[:n1], order[n1:n1 + n2], order[n1 + n2:]


def _choose_kind(G, cfg: StructureConfig, H: FlexTemplate) -> str:
    if cfg.kind != "auto":
        return cfg.kind
    gadget = _gadget_size(G, cfg)
    deg = max(len(row) for row in H.adj)
    need = 2 + deg * gadget + (deg + 1) * (cfg.min_link - 1)
    return "gadget" if need <= cfg.l - 1 else "edge"


def build_absorbing_structure(G, A: Sequence[int], W: Iterable[int], X: Sequence[int], Y: Sequence[int],
                              cfg: Optional[StructureConfig] = None, seed=0,
                              template: Optional[FlexTemplate] = None) -> AbsorbingStructure:
    """Merged absorbers (S_j, x_j, y_j), j < 3r, wired by a resilient template so
    that any r-subset of A can be absorbed with every S_j taking exactly one vertex."""
    cfg = cfg or StructureConfig()
    A = list(A)
    X, Y = list(X), list(Y)
    if len(A) % 2 or not A:
        raise ValueError("|A| must be a positive even number 2r")
    r = len(A) // 2
    if len(X) != 3 * r or len(Y) != 3 * r:
        raise ValueError("need 3r pairs (x_j, y_j)")
    wl = sorted(set(W))
    clash = set(wl) & (set(A) | set(X) | set(Y))
    if clash or set(A) & (set(X) | set(Y)) or len(set(X) | set(Y)) != 6 * r:
        raise ValueError("A, W and the pairs must be disjoint")
    if cfg.l < 4:
        raise ValueError("l must be at least 4")
    last: Exception = AbsorberFailed("no attempt made")
    for attempt in range(cfg.max_retries):
        rng = make_rng(seed, 0x5C7, attempt)
        H = template or build_flex_template(3 * r, rng.getrandbits(32), cfg.template_verify,
                                            cfg.template_samples, cfg.template_matchings)
        kind = _choose_kind(G, cfg, H)
        order = wl[:]
        rng.shuffle(order)
        if kind == "edge":
            W1, W2, W3 = order[:len(order) // 3], [], []
        else:
            W1, W2, W3 = _gadget_split(G, cfg, H, order, r)
        W1 = sorted(W1)
        B = W1[:2 * r]
        if len(B) < 2 * r:
            raise AbsorberFailed("W too small for the padding set B")
        st = AbsorbingStructure(kind, cfg.l, X, Y, A, B, H, [], {})
        try:
            if kind == "edge":
                _build_edge_kind(G, st, mask_of(wl) & ~mask_of(B), cfg, rng)
            else:
                _build_gadget_kind(G, st, mask_of(W1) & ~mask_of(B), mask_of(W2), mask_of(W3), cfg, rng)
        except (AbsorberFailed, StageStalled, NoPathFound, MatchingInfeasible) as e:
            last = e
            continue
        probs = validate_structure(G, st)
        if probs:
            raise AbsorberFailed("structure failed validation: " + "; ".join(probs[:3]))
        return st
    raise AbsorberFailed(f"structure build failed after {cfg.max_retries} attempts: {last}")


def _build_edge_kind(G, st: AbsorbingStructure, pool: int, cfg: StructureConfig, rng) -> None:
    n_idx = len(st.X)
    order = sorted(range(n_idx), key=lambda j: -len(st.template.adj[j]))
    S: dict = {}
    for j in order:
        targets = st.wired(j)
        p = None
        for _ in range(3):
            p = _edge_absorber_path(G, st.X[j], st.Y[j], cfg.l - 2, targets, pool, rng, cfg.search_budget)
            if p is not None:
                break
        if p is None:
            raise AbsorberFailed(f"no edge absorber for index {j}")
        pool &= ~mask_of(p)
        S[j] = p
        for v, route in _insert_routes(G, p, targets).items():
            st.routes[(j, v)] = route
    st.S = [S[j] for j in range(n_idx)]


def _build_gadget_kind(G, st: AbsorbingStructure, w1: int, w2: int, w3: int, cfg: StructureConfig,
                       rng) -> None:
    """Single-vertex gadgets per wired (v, j), chained per index through W3."""
    k = cfg.gadget_k
    rn = st.template.right_neighbors()
    slots: dict = {}  # v -> indices j wired to v, in order (the injective c_v)
    for rid, js in rn.items():
        slots[st.right_vertex(rid)] = sorted(js)
    om, im = G.out_masks, G.in_masks
    left, cands, cap = [], {}, {}
    for v, js in slots.items():
        if not js:
            continue
        for role in ("in", "out"):
            key = (v, role)
            left.append(key)
            cap[key] = len(js)
            cands[key] = list(iter_bits((im[v] if role == "in" else om[v]) & w1))
    anchors = generalized_matching(left, cap, cands, rng=rng)
    gadget_of: dict = {}
    free2, free3 = w2, w3
    for v, js in sorted(slots.items()):
        for c, j in enumerate(js):
            x0 = anchors[(v, "in")][c]
            y1 = anchors[(v, "out")][c]
            s = rng.getrandbits(32)
            if G.directed:
                ab = build_directed_absorber(G, v, (x0, y1), iter_bits(free2), iter_bits(free3), k,
                                             cfg.reversible_t, cfg.reversible_h, cfg.weave, s, cfg.search_budget)
            else:
                ab = build_absorber(G, v, (x0, y1), iter_bits(free2), iter_bits(free3), k, cfg.weave, s,
                                    cfg.search_budget)
            used = mask_of(ab.R)
            free2 &= ~used
            free3 &= ~used
            gadget_of[(j, v)] = ab
            st.gadgets.append(ab)
    # links x_j -> g_1 -> .. -> g_d -> y_j with lengths filling S_j to l-1 vertices
    plan = []
    reqs = []
    for j in range(len(st.X)):
        parts = [gadget_of[(j, v)] for v in sorted(st.wired(j))]
        inside = sum(p.size for p in parts)
        n_links = len(parts) + 1
        total = st.l - 1 - 2 - inside + n_links  # sum of link lengths
        if total < n_links * cfg.min_link:
            raise AbsorberFailed(f"index {j}: gadgets do not fit in l-1 vertices")
        base, extra = divmod(total, n_links)
        lengths = [base + (1 if i < extra else 0) for i in range(n_links)]
        ends = [st.X[j]] + [v for p in parts for v in (p.r, p.s)] + [st.Y[j]]
        first = len(reqs)
        for i in range(n_links):
            orient = (1,) * lengths[i] if G.directed else None
            reqs.append(PathRequest(ends[2 * i], ends[2 * i + 1], lengths[i], orient))
        plan.append((j, parts, first))
    links = connect_pairs_exact(G, reqs, free3, cfg.weave, rng.getrandbits(32))
    S = []
    for j, parts, first in plan:
        lk = links[first:first + len(parts) + 1]
        merged = merge_absorbers(parts, lk[1:-1], head=lk[0], tail=lk[-1])
        S.append(merged.skip_path)
        for v, route in merged.absorb_paths.items():
            st.routes[(j, v)] = route
    st.S = S
