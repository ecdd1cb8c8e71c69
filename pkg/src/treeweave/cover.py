"""Covering every vertex with exact-length anchored paths.

Base case: an absorbing structure takes 3r of the pairs; the other pairs are
routed greedily through the leftover vertices (low-degree vertices first), and
the last few are routed by a sweep that must take every remaining vertex plus
exactly r vertices of the reserve set A. The untouched r vertices of A are then
absorbed by the structure. Long paths are first reduced to the base length by
splicing a short connector and single edges between segments.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ._bits import iter_bits, mask_of
from .absorption import StructureConfig, absorb, build_absorbing_structure
from .errors import (AbsorberFailed, CoverFailed, HypothesisViolation, MatchingInfeasible, NoMatching,
                     NoPathFound, StageStalled)
from .expansion import check_expands_into, split_target
from .graph import induced
from .matching import generalized_matching
from .paths import Budget, PathRequest, WeaveConfig, _joint, connect_pairs_exact, find_exact_path
from .rng import make_rng


@dataclass
class CoverConfig:
    r: Optional[int] = None  # the structure serves 3r pairs and absorbs r reserve vertices
    r_fraction: float = 1 / 6  # r = round(pairs * r_fraction) when r is None
    base_l: Optional[int] = None  # longer paths are reduced to this length first
    structure: StructureConfig = field(default_factory=StructureConfig)
    weave: WeaveConfig = field(default_factory=WeaveConfig)
    greedy_budget: int = 20_000
    sweep_budget: int = 100_000
    sweep_undo: int = 2  # greedy paths handed back to the sweep on failure
    small_n: int = 40  # below this, one joint exact search replaces the machinery
    fallback_n: int = 200  # joint search after the absorbing route fails, up to this many vertices
    joint_budget: int = 500_000
    max_retries: int = 5
    verify: bool = False
    verify_d: float = 1.0


@dataclass
class CoverReport:
    phase_times: dict = field(default_factory=dict)
    attempts: int = 0
    r: int = 0
    kind: str = ""
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def cover_problems(G, pairs: Sequence[tuple[int, int]], l: int, paths: Sequence[Sequence[int]]) -> list[str]:
    """Everything wrong with `paths` as a cover of V(G) by x_i,y_i-paths with l vertices."""
    out = []
    if len(paths) != len(pairs):
        out.append(f"{len(paths)} paths for {len(pairs)} pairs")
    seen: set = set()
    for i, (p, (x, y)) in enumerate(zip(paths, pairs)):
        if len(p) != l:
            out.append(f"path {i} has {len(p)} vertices, expected {l}")
        if not p or p[0] != x or p[-1] != y:
            out.append(f"path {i} is not anchored at ({x}, {y})")
        for a, b in zip(p, p[1:]):
            if not G.has_arc(a, b):
                out.append(f"path {i}: missing step {a}-{b}")
        if seen & set(p) or len(set(p)) != len(p):
            out.append(f"path {i} reuses a vertex")
        seen |= set(p)
    if len(seen) != G.n:
        out.append(f"paths cover {len(seen)} of {G.n} vertices")
    return out


def _check_input(G, pairs, l):
    if l < 2:
        raise ValueError("paths need at least 2 vertices")
    if G.n % l or len(pairs) != G.n // l:
        raise ValueError("need l | n and exactly n/l pairs")
    ends = [v for p in pairs for v in p]
    if len(set(ends)) != len(ends):
        raise ValueError("pairs must be disjoint")
    if any(not 0 <= v < G.n for v in ends):
        raise ValueError("pair vertex out of range")


def cover_with_paths(G, pairs: Sequence[tuple[int, int]], l: int, cfg: Optional[CoverConfig] = None, seed=0,
                     report: Optional[CoverReport] = None) -> list[list]:
    """n/l disjoint x_i,y_i-paths with exactly l vertices each, covering V(G).
    In digraphs each path is directed from x_i to y_i."""
    cfg = cfg or CoverConfig()
    report = report if report is not None else CoverReport()
    pairs = [tuple(p) for p in pairs]
    _check_input(G, pairs, l)
    W = [v for v in range(G.n) if v not in {u for p in pairs for u in p}]
    if cfg.verify and W:
        for direction in (("out", "in") if G.directed else ("out",)):
            rep = check_expands_into(G, W, cfg.verify_d, "sampled", 100, seed, direction=direction)
            if not rep.holds:
                raise HypothesisViolation(f"host does not {cfg.verify_d}-expand into W ({direction})")
    if cfg.base_l is not None and l > cfg.base_l:
        paths = _reduce(G, pairs, l, W, cfg, seed, report)
    elif G.n <= cfg.small_n or len(pairs) < 3:
        paths = _small_cover(G, pairs, l, W, cfg)
    else:
        try:
            paths = _base_cover(G, pairs, l, W, cfg, seed, report)
        except CoverFailed:
            # small hosts with short paths cannot fit the edge absorbers
            if G.n > cfg.fallback_n:
                raise
            report.notes.append("absorbing route failed; joint search")
            paths = _small_cover(G, pairs, l, W, cfg)
    probs = cover_problems(G, pairs, l, paths)
    if probs:
        raise AssertionError("cover failed its own check: " + "; ".join(probs[:3]))
    return paths


def cover_with_paths_directed(D, pairs: Sequence[tuple[int, int]], k: int, cfg: Optional[CoverConfig] = None,
                              seed=0, report: Optional[CoverReport] = None) -> list[list]:
    """Directed x_i -> y_i paths with k vertices (length k-1) covering V(D)."""
    if not D.directed:
        raise ValueError("host must be a DiGraph")
    return cover_with_paths(D, pairs, k, cfg, seed, report)


def _small_cover(G, pairs, l, W, cfg) -> list[list]:
    # the requested lengths use up W exactly, so any disjoint routing is a cover
    reqs = [PathRequest(x, y, l - 1) for x, y in pairs]
    res = _joint(G, reqs, mask_of(W), cfg.joint_budget)
    if res is None:
        raise CoverFailed("endgame", "no exact cover found by joint search")
    return res


def _choose_r(cfg: CoverConfig, n_pairs: int) -> int:
    r = cfg.r if cfg.r is not None else round(n_pairs * cfg.r_fraction)
    return max(1, min(r, n_pairs // 3))


def _base_cover(G, pairs, l, W, cfg: CoverConfig, seed, report: CoverReport) -> list[list]:
    n_pairs = len(pairs)
    r = _choose_r(cfg, n_pairs)
    report.r = r
    scfg = StructureConfig(**{**cfg.structure.__dict__, "l": l})
    last_phase = "absorber-build"
    for attempt in range(cfg.max_retries):
        report.attempts = attempt + 1
        rng = make_rng(seed, 0xC0F, attempt)
        order = list(W)
        rng.shuffle(order)
        A = sorted(order[:2 * r])
        W3 = order[2 * r:]
        absorbing = list(range(3 * r))
        X = [pairs[j][0] for j in absorbing]
        Y = [pairs[j][1] for j in absorbing]
        t0 = time.perf_counter()
        try:
            st = build_absorbing_structure(G, A, W3, X, Y, scfg, rng.getrandbits(32))
        except (AbsorberFailed, MatchingInfeasible) as e:
            last_phase = "absorber-build"
            report.failures.append(("absorber-build", str(e)))
            continue
        report.kind = st.kind
        report.phase_times["absorber-build"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        z1 = mask_of(W3) & ~mask_of(st.footprint)
        routed = _greedy_then_sweep(G, [pairs[i] for i in range(3 * r, n_pairs)], l, z1, mask_of(A), r, cfg, rng)
        report.phase_times["endgame"] = time.perf_counter() - t0
        if routed is None:
            last_phase = "endgame"
            report.failures.append(("endgame", f"attempt {attempt}"))
            continue
        used = set()
        for p in routed:
            used.update(p)
        a_prime = [a for a in A if a not in used]
        try:
            absorbed = absorb(st, a_prime)
        except (NoMatching, ValueError) as e:
            last_phase = "absorb"
            report.failures.append(("absorb", str(e)))
            continue
        return absorbed + routed
    raise CoverFailed(last_phase, f"after {cfg.max_retries} attempts")


def _greedy_then_sweep(G, pairs, l, z1: int, amask: int, quota: int, cfg: CoverConfig, rng) -> Optional[list]:
    """Route every pair through z1 plus exactly `quota` vertices of amask, using all of z1."""
    done: list = []
    pool = z1
    deferred = []
    for x, y in pairs[:-1]:
        p = find_exact_path(G, x, y, l - 1, pool, budget=cfg.greedy_budget, rng=rng, prefer="few")
        if p is None:
            deferred.append((x, y))
            continue
        done.append(p)
        pool &= ~mask_of(p[1:-1])
    tail = deferred + [pairs[-1]] if pairs else []
    for undo in range(cfg.sweep_undo + 1):
        got = sweep(G, [(x, y, l - 1) for x, y in tail], pool, amask, quota, cfg.sweep_budget, rng)
        if got is not None:
            return _reorder(pairs, done + got)
        if not done:
            break
        p = done.pop()
        pool |= mask_of(p[1:-1])
        tail = [(p[0], p[-1])] + tail
    return None


def _reorder(pairs, paths):
    by_start = {p[0]: p for p in paths}
    return [by_start[x] for x, _ in pairs]


def sweep(G, reqs: Sequence[tuple[int, int, int]], mandatory: int, optional: int, quota: int, budget: int,
          rng=None) -> Optional[list]:
    """Exact paths (x, y, length) covering every vertex of `mandatory` and exactly
    `quota` vertices of `optional`, nothing else. Depth-first with a degree
    check on the mandatory vertices and fewest-options-first ordering."""
    om, im = G.out_masks, G.in_masks
    slots = sum(k - 1 for _, _, k in reqs)
    if slots != mandatory.bit_count() + quota:
        raise ValueError("request lengths must match |mandatory| + quota")
    bud = Budget(budget)
    out: list = []
    undirected = not G.directed

    def route(ri: int, M: int, O: int, q: int) -> bool:
        if ri == len(reqs):
            return M == 0 and q == 0
        x, y, L = reqs[ri]
        last = ri == len(reqs) - 1
        path = [x]

        def rec(M: int, O: int, q: int) -> bool:
            if not bud.spend():
                return False
            cur = path[-1]
            left = L - (len(path) - 1)
            if left == 1:
                if not om[cur] >> y & 1:
                    return False
                out.append(path + [y])
                if route(ri + 1, M, O, q):
                    return True
                out.pop()
                return False
            avail = M | (O if q > 0 else 0)
            if last:
                pin = avail | (1 << cur)
                pout = avail | (1 << y)
                for m in iter_bits(M):
                    if undirected:
                        if (om[m] & (avail | (1 << cur) | (1 << y))).bit_count() < 2:
                            return False
                    elif not (im[m] & pin) or not (om[m] & pout):
                        return False
            cand = om[cur] & avail
            if left == 2:
                cand &= im[y]
            cs = list(iter_bits(cand))
            if rng is not None:
                rng.shuffle(cs)
            cs.sort(key=lambda c: (om[c] & avail).bit_count() + (0 if M >> c & 1 else 2))
            for c in cs:
                path.append(c)
                bit = 1 << c
                ok = rec(M & ~bit, O, q) if M & bit else rec(M, O & ~bit, q - 1)
                path.pop()
                if ok:
                    return True
                if bud.left < 0:
                    return False
            return False

        return rec(M, O, q)

    return out if route(0, mandatory, optional, quota) else None


# reduction of long paths to the base length

def _reduce(G, pairs, l, W, cfg: CoverConfig, seed, report: CoverReport) -> list[list]:
    """Each x_i,y_i-path of l vertices becomes a connector x_i..z_i of rp edges
    followed by q segments of l0 vertices joined by single edges (l = q*l0 + rp)."""
    l0 = cfg.base_l
    q, rp = divmod(l, l0)
    report.notes.append(f"reduced l={l} to {q} segments of {l0} plus a connector of {rp} edges")
    rng = make_rng(seed, 0x2ED)
    n_pairs = len(pairs)
    m = len(W)
    sizes = [m - 2 * (m // 8), m // 8, m // 8]
    W1, W2, W3 = (sorted(p) for p in split_target(G, W, sizes, 1.0, rng.getrandbits(32),
                                                   verify=False))
    om = G.out_masks
    try:
        if rp == 0:
            conn = [[x] for x, _ in pairs]
        elif rp == 1:
            w2 = mask_of(W2)
            got = generalized_matching([x for x, _ in pairs], 1, lambda x: iter_bits(om[x] & w2), rng=rng)
            conn = [[x, got[x][0]] for x, _ in pairs]
        else:
            zs = W2[:n_pairs]
            orient = (1,) * rp if G.directed else None
            reqs = [PathRequest(x, z, rp, orient) for (x, _), z in zip(pairs, zs)]
            conn = connect_pairs_exact(G, reqs, W1, cfg.weave, rng.getrandbits(32))
    except (MatchingInfeasible, StageStalled, NoPathFound) as e:
        raise CoverFailed("reduction", f"connectors: {e}") from e
    used = {v for p in conn for v in p}
    # (q-1) disjoint edges per pair from what is left of W1 and W2
    free = [v for v in W1 + W2 if v not in used]
    rng.shuffle(free)
    fmask = mask_of(free)
    edges = []
    need = n_pairs * (q - 1)
    for u in free:
        if len(edges) == need:
            break
        if not fmask >> u & 1:
            continue
        nb = om[u] & fmask & ~(1 << u)
        if not nb:
            continue
        v = (nb & -nb).bit_length() - 1
        fmask &= ~(1 << u) & ~(1 << v)
        edges.append((u, v))
    if len(edges) < need:
        raise CoverFailed("reduction", "not enough disjoint edges")
    sub_pairs = []
    for i, (x, y) in enumerate(pairs):
        starts = [conn[i][-1]] + [edges[i * (q - 1) + j][1] for j in range(q - 1)]
        ends = [edges[i * (q - 1) + j][0] for j in range(q - 1)] + [y]
        sub_pairs.extend(zip(starts, ends))
    keep = set(range(G.n)) - {v for p in conn for v in p[:-1]}
    H = induced(G, keep)
    pos = {v: i for i, v in enumerate(H.labels)}
    sub_cfg = CoverConfig(**{**cfg.__dict__, "base_l": None})
    sub = cover_with_paths(H, [(pos[a], pos[b]) for a, b in sub_pairs], l0, sub_cfg, rng.getrandbits(32), report)
    out = []
    for i in range(n_pairs):
        p = list(conn[i][:-1])
        for j in range(q):
            p += [H.labels[v] for v in sub[i * q + j]]
        out.append(p)
    return out
