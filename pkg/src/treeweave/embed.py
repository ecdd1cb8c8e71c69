"""Embedding forests and rooted (oriented) trees into host graphs, and attaching
leaf stars by generalized matching.

The embedder places guest vertices in BFS order. Each new vertex goes to a free
host neighbour (out- or in-neighbour for oriented edges) of its parent's image,
preferring high residual degree, with two cheap feasibility filters and a
bounded depth-first backtrack. Failed attempts restart from a fresh seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from ._bits import iter_bits, mask_of
from .errors import EmbedFailed
from .expansion import check_expands_into
from .matching import generalized_matching
from .rng import make_rng
from .trees import Forest, TreeShape


@dataclass
class EmbedConfig:
    max_retries: int = 5
    backtrack_steps: Optional[int] = None  # default 50 * |guest|
    slack: int = 0  # required |allowed| - |F|
    verify: bool = False
    verify_d: float = 1.0
    prefer: str = "max"  # residual-degree preference: "max" or "min"


@dataclass
class Embedding:
    map: dict = field(default_factory=dict)

    @property
    def used(self) -> frozenset:
        return frozenset(self.map.values())

    def __len__(self) -> int:
        return len(self.map)

    def update(self, other: "Embedding") -> None:
        clash = self.used & other.used
        if clash:
            raise ValueError(f"images overlap on {sorted(clash)[:5]}")
        self.map.update(other.map)

    def to_text(self) -> str:
        return "".join(f"{g} {h}\n" for g, h in sorted(self.map.items()))

    @classmethod
    def parse(cls, text: str) -> "Embedding":
        m = {}
        for ln in text.splitlines():
            if ln.strip() and not ln.lstrip().startswith("#"):
                g, h = ln.split()
                if int(g) in m:
                    raise ValueError(f"guest {g} mapped twice")
                m[int(g)] = int(h)
        return cls(m)


def validate_embedding(host, guest_vertices: Iterable[int], guest_edges: Iterable[tuple[int, int]],
                       emb: Embedding, arcs: bool = False) -> list[str]:
    """All violations of totality, injectivity and edge (arc) preservation.
    With arcs=True each guest edge (a, b) must map to the host arc a -> b."""
    problems = []
    gv = list(guest_vertices)
    for g in gv:
        if g not in emb.map:
            problems.append(f"guest {g} unmapped")
    seen: dict = {}
    for g, h in emb.map.items():
        if not 0 <= h < host.n:
            problems.append(f"guest {g} mapped outside host ({h})")
            continue
        if h in seen:
            problems.append(f"guests {seen[h]} and {g} share host {h}")
        seen[h] = g
    for a, b in guest_edges:
        if a in emb.map and b in emb.map:
            ha, hb = emb.map[a], emb.map[b]
            if not (0 <= ha < host.n and 0 <= hb < host.n):
                continue
            ok = host.has_arc(ha, hb) if arcs else host.has_edge(ha, hb) if not host.directed else (
                host.has_arc(ha, hb) or host.has_arc(hb, ha))
            if not ok:
                problems.append(f"guest edge {a}-{b} maps to non-edge {ha}-{hb}")
    return problems


def _oriented_edges(T: TreeShape) -> list[tuple[int, int]]:
    out = []
    for v, p in enumerate(T.parent):
        if p == -1:
            continue
        out.append((p, v) if (T.orient is None or T.orient[v] == 1) else (v, p))
    return out


class _Search:
    """Bounded backtracking embedding of one rooted component."""

    def __init__(self, host, order, par, sign, free: int, rng, prefer: str, budget: int):
        self.host = host
        self.order = order
        self.par = par
        self.sign = sign
        self.free = free
        self.rng = rng
        self.prefer = prefer
        self.budget = budget
        self.out_m = host.out_masks
        self.in_m = host.in_masks
        kids: dict = {g: [] for g in order}
        for g in order:
            if par[g] is not None:
                kids[par[g]].append(g)
        self.n_out = {g: sum(1 for c in kids[g] if sign[c] >= 0) for g in order}
        self.n_in = {g: sum(1 for c in kids[g] if sign[c] < 0) for g in order}
        self.undirected = not host.directed
        self.deepest = 0

    def _fits(self, g, h: int, free: int) -> bool:
        if self.undirected:
            return (self.out_m[h] & free).bit_count() >= self.n_out[g] + self.n_in[g]
        return ((self.out_m[h] & free).bit_count() >= self.n_out[g]
                and (self.in_m[h] & free).bit_count() >= self.n_in[g])

    def _candidates(self, i: int, phi: dict, free: int, root_choices) -> list[int]:
        g = self.order[i]
        p = self.par[g]
        if p is None:
            cands = [h for h in root_choices if free >> h & 1]
        else:
            hp = phi[p]
            m = (self.out_m[hp] if self.sign[g] >= 0 else self.in_m[hp]) & free
            cands = list(iter_bits(m))
        scored = []
        for h in cands:
            if not self._fits(g, h, free & ~(1 << h)):
                continue
            scored.append(((self.out_m[h] | self.in_m[h]) & free).bit_count())
            scored[-1] = (scored[-1], h)
        if self.rng is not None:
            self.rng.shuffle(scored)
        if self.prefer == "max":
            # pop() takes from the end: best = highest residual, then smallest id
            scored.sort(key=lambda t: (t[0], -t[1]))
        else:
            scored.sort(key=lambda t: (-t[0], -t[1]))
        return [h for _, h in scored]

    def run(self, root_choices) -> Optional[dict]:
        order = self.order
        phi: dict = {}
        free = self.free
        stack: list[list[int]] = []
        i = 0
        while True:
            if i == len(order):
                self.free = free
                return phi
            if len(stack) == i:
                stack.append(self._candidates(i, phi, free, root_choices))
            lst = stack[i]
            if lst:
                h = lst.pop()
                phi[order[i]] = h
                free &= ~(1 << h)
                i += 1
                self.deepest = max(self.deepest, i)
                continue
            stack.pop()
            i -= 1
            if i < 0:
                return None
            free |= 1 << phi.pop(order[i])
            self.budget -= 1
            if self.budget < 0:
                return None


def _components(F) -> tuple[list[list[int]], dict, dict]:
    """BFS-ordered components, parent map and orientation sign per guest vertex."""
    if isinstance(F, TreeShape):
        order = list(F.bfs_order)
        par = {v: (None if F.parent[v] == -1 else F.parent[v]) for v in range(F.n)}
        sign = {v: (0 if F.orient is None or v == F.root else F.orient[v]) for v in range(F.n)}
        return [order], par, sign
    comps = F.components()
    par, sign = {}, {}
    for comp in comps:
        par[comp[0]] = None
        seen = {comp[0]}
        for v in comp:
            for w in F.adj[v]:
                if w not in seen:
                    seen.add(w)
                    par[w] = v
        for v in comp:
            sign[v] = 0
    comps.sort(key=len, reverse=True)
    return comps, par, sign


def _embed(host, F, allowed_mask: int, cfg: EmbedConfig, seed, root_image: Optional[int] = None) -> Embedding:
    comps, par, sign = _components(F)
    total = sum(len(c) for c in comps)
    if total + cfg.slack > allowed_mask.bit_count() + (1 if root_image is not None else 0):
        raise EmbedFailed(0, comps[0][0] if comps else -1, "guest larger than allowed set minus slack")
    budget = cfg.backtrack_steps if cfg.backtrack_steps is not None else 50 * max(total, 1)
    frontier = (0, comps[0][0] if comps else -1)
    for attempt in range(cfg.max_retries + 1):
        rng = make_rng(seed, 0xE3B, attempt)
        free = allowed_mask
        phi: dict = {}
        ok = True
        for ci, comp in enumerate(comps):
            if root_image is not None and ci == 0:
                roots = [root_image]
                free |= 1 << root_image
            else:
                roots = list(iter_bits(free))
                rng.shuffle(roots)
                roots = roots[:64]
            search = _Search(host, comp, par, sign, free, rng if attempt else None, cfg.prefer, budget)
            got = search.run(roots)
            if got is None:
                ok = False
                frontier = (ci, comp[min(search.deepest, len(comp) - 1)])
                break
            phi.update(got)
            free = search.free
        if ok:
            return Embedding(phi)
    raise EmbedFailed(*frontier)


def _allowed_mask(host, allowed) -> int:
    return (1 << host.n) - 1 if allowed is None else mask_of(allowed)


def embed_forest(G, F: Union[Forest, TreeShape], allowed: Optional[Iterable[int]] = None,
                 cfg: Optional[EmbedConfig] = None, seed=0) -> Embedding:
    """Edge-preserving injection of every vertex of F into G[allowed]."""
    cfg = cfg or EmbedConfig()
    amask = _allowed_mask(G, allowed)
    if cfg.verify:
        rep = check_expands_into(G, iter_bits(amask), cfg.verify_d, "sampled", 100, seed)
        if not rep.holds:
            raise EmbedFailed(0, -1, "host does not expand into the allowed set")
    return _embed(G, F, amask, cfg, seed)


def embed_rooted(G, T: TreeShape, root_image: int, allowed: Optional[Iterable[int]] = None,
                 cfg: Optional[EmbedConfig] = None, seed=0) -> Embedding:
    """Embed T with T.root mapped to root_image; other vertices land in `allowed`.
    Oriented trees (T.orient set) in digraphs respect arc directions."""
    cfg = cfg or EmbedConfig()
    amask = _allowed_mask(G, allowed) & ~(1 << root_image)
    return _embed(G, T, amask, cfg, seed, root_image=root_image)


def embed_rooted_directed(H, T: TreeShape, root_image: int, cfg: Optional[EmbedConfig] = None,
                          seed=0, allowed: Optional[Iterable[int]] = None) -> Embedding:
    """Rooted embedding of an oriented tree into a digraph."""
    if not H.directed:
        raise ValueError("host must be a DiGraph")
    if T.orient is None and T.n > 1:
        raise ValueError("tree carries no orientation")
    cfg = cfg or EmbedConfig()
    if cfg.verify:
        rest = list(range(H.n))
        for direction in ("out", "in"):
            rep = check_expands_into(H, rest, cfg.verify_d, "sampled", 100, seed, direction=direction)
            if not rep.holds:
                raise EmbedFailed(0, -1, f"host fails {direction}-expansion")
    return embed_rooted(H, T, root_image, allowed, cfg, seed)


def oriented_edges(T: TreeShape) -> list[tuple[int, int]]:
    """Guest arcs of an oriented tree (tail, head)."""
    return _oriented_edges(T)


# stars

@dataclass
class StarDemand:
    centers: list
    demand: dict
    pool: frozenset
    delta: Optional[int] = None

    def __post_init__(self):
        self.pool = frozenset(self.pool)
        if set(self.centers) & self.pool:
            raise ValueError("pool must be disjoint from the centers")
        for c in self.centers:
            d = self.demand[c]
            if d <= 0 or (self.delta is not None and d > self.delta):
                raise ValueError(f"demand {d} at center {c} out of range")


def attach_stars(G, demand: StarDemand, seed=0) -> dict:
    """Disjoint leaf sets of the demanded sizes, each leaf adjacent to its center."""
    pool_mask = mask_of(demand.pool)
    masks = G.masks
    rng = make_rng(seed, 0x57A)
    return generalized_matching(
        demand.centers,
        demand.demand,
        lambda c: iter_bits(masks[c] & pool_mask),
        rng=rng,
    )
