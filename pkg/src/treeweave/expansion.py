"""Expansion certification, expansion-preserving partitions and the random
expander experiment.

Condition 1 (small sets expand): |N(X, W)| >= d|X| for 1 <= |X| < t.
Condition 2 (large sets touch): e(X, Y) > 0 for disjoint X, Y with |X| = |Y| = t.
Here t = ceil(|W| / 2d), and W = V(G) for plain (n, d)-expanders.

Condition 2 fails for some X of size t exactly when at least t vertices lie
outside X and N(X), so both modes test it through neighbourhood sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from ._bits import iter_bits, mask_of
from .errors import CapExceeded, RetriesExhausted
from .graph import gen_gnp
from .rng import make_rng

DEFAULT_CAP = 10**7
SWEEP_CAP = 200_000


@dataclass
class ExpansionReport:
    holds: bool
    mode: str
    sets_checked: int
    d: float
    threshold: int
    target_size: int
    cond1_witness: Optional[frozenset] = None
    cond2_witness: Optional[tuple] = None

    @property
    def witness(self):
        """(X,) for a condition-1 violation, else (X, Y), else None."""
        if self.cond1_witness is not None:
            return (self.cond1_witness,)
        return self.cond2_witness

    @property
    def failed_conditions(self) -> list[int]:
        out = []
        if self.cond1_witness is not None:
            out.append(1)
        if self.cond2_witness is not None:
            out.append(2)
        return out

    def to_text(self) -> str:
        lines = [
            f"holds: {str(self.holds).lower()}",
            f"mode: {self.mode}",
            f"d: {self.d:g}",
            f"target_size: {self.target_size}",
            f"threshold: {self.threshold}",
            f"sets_checked: {self.sets_checked}",
            "failed_conditions: " + ",".join(map(str, self.failed_conditions)),
        ]
        if self.cond1_witness is not None:
            lines.append("witness_x: " + " ".join(map(str, sorted(self.cond1_witness))))
        if self.cond2_witness is not None:
            x, y = self.cond2_witness
            lines.append("witness_pair_x: " + " ".join(map(str, sorted(x))))
            lines.append("witness_pair_y: " + " ".join(map(str, sorted(y))))
        return "\n".join(lines) + "\n"


def threshold(size: int, d: float) -> int:
    return math.ceil(size / (2 * d))


def _nbr_masks(G, direction: str) -> list[int]:
    return G.in_masks if direction == "in" else G.out_masks


def _cond2_masks(G) -> list[int]:
    # condition 2 counts edges in either direction
    if not G.directed:
        return G.masks
    return [a | b for a, b in zip(G.out_masks, G.in_masks)]


class _Checker:
    def __init__(self, G, wmask: int, d: float, direction: str):
        self.G = G
        self.n = G.n
        self.full = (1 << G.n) - 1
        self.wmask = wmask
        self.d = d
        self.t = threshold(wmask.bit_count(), d)
        self.masks = _nbr_masks(G, direction)
        self.masks2 = _cond2_masks(G)
        self.checked = 0
        self.w1: Optional[frozenset] = None
        self.w2: Optional[tuple] = None

    @property
    def cond2_applies(self) -> bool:
        return 0 < self.t and 2 * self.t <= self.n

    def test1(self, xmask: int, nmask: int, size: int) -> bool:
        self.checked += 1
        if (nmask & ~xmask & self.wmask).bit_count() < self.d * size:
            if self.w1 is None or size < len(self.w1):
                self.w1 = frozenset(iter_bits(xmask))
            return False
        return True

    def test2(self, xmask: int, nmask2: int) -> bool:
        self.checked += 1
        outside = self.full & ~(xmask | nmask2)
        if outside.bit_count() >= self.t:
            if self.w2 is None:
                ys = []
                for v in iter_bits(outside):
                    ys.append(v)
                    if len(ys) == self.t:
                        break
                self.w2 = (frozenset(iter_bits(xmask)), frozenset(ys))
            return False
        return True

    def set1(self, xs: Iterable[int]) -> bool:
        xm, acc, s = 0, 0, 0
        for v in xs:
            xm |= 1 << v
            acc |= self.masks[v]
            s += 1
        return self.test1(xm, acc, s)

    def set2(self, xs: Iterable[int]) -> bool:
        xm, acc = 0, 0
        for v in xs:
            xm |= 1 << v
            acc |= self.masks2[v]
        return self.test2(xm, acc)

    def report(self, mode: str) -> ExpansionReport:
        return ExpansionReport(
            holds=self.w1 is None and self.w2 is None,
            mode=mode,
            sets_checked=self.checked,
            d=self.d,
            threshold=self.t,
            target_size=self.wmask.bit_count(),
            cond1_witness=self.w1,
            cond2_witness=self.w2,
        )


def exhaustive_count(n: int, t: int) -> int:
    total = sum(math.comb(n, s) for s in range(1, min(t, n + 1)))
    if 0 < t and 2 * t <= n:
        total += math.comb(n, t)
    return total


def _exhaustive(ch: _Checker) -> None:
    n, t = ch.n, ch.t
    # condition 1 by increasing size; stop at the first (smallest) violation
    for s in range(1, min(t, n + 1)):
        if ch.w1 is not None:
            break
        for xs in combinations(range(n), s):
            if not ch.set1(xs):
                break
    if ch.cond2_applies:
        for xs in combinations(range(n), t):
            if not ch.set2(xs):
                break


def _sampled(ch: _Checker, budget: int, rng, sweep: int, ball_seeds: int = 512) -> None:
    n, t = ch.n, ch.t
    if n == 0:
        return
    # exhaustive sweep over small sets, as far as it stays cheap
    for s in range(1, min(sweep, t - 1) + 1):
        if math.comb(n, s) > SWEEP_CAP and s > 1:
            break
        for xs in combinations(range(n), s):
            if not ch.set1(xs):
                break
        if ch.w1 is not None:
            break
    if ch.cond2_applies and t <= sweep and math.comb(n, t) <= SWEEP_CAP:
        for xs in combinations(range(n), t):
            if not ch.set2(xs):
                break
    # BFS balls; every vertex seeds one on small graphs, a random sample on large ones
    adj = ch.masks2
    seeds = list(range(n)) if n <= ball_seeds else rng.sample(range(n), ball_seeds)
    marks = _checkpoints(t - 1)
    for v in seeds:
        if ch.w1 is not None and (ch.w2 is not None or not ch.cond2_applies):
            break
        order = _bfs_order(adj, v, t)
        xm = acc = acc2 = 0
        for i, u in enumerate(order, start=1):
            xm |= 1 << u
            acc |= ch.masks[u]
            acc2 |= adj[u]
            if i in marks and ch.w1 is None:
                ch.test1(xm, acc, i)
            if i == t and ch.cond2_applies and ch.w2 is None:
                ch.test2(xm, acc2)
    # random sets
    verts = list(range(n))
    for _ in range(budget):
        if ch.w1 is not None:
            break
        if t > 1:
            s = rng.randint(1, min(t - 1, n))
            ch.set1(rng.sample(verts, s))
    for _ in range(budget):
        if ch.w2 is not None or not ch.cond2_applies:
            break
        ch.set2(rng.sample(verts, t))


def _checkpoints(top: int) -> set[int]:
    """Prefix sizes at which ball prefixes are tested: all small ones, then geometric."""
    out = set(range(1, min(top, 16) + 1))
    s = 16.0
    while s < top:
        s *= 1.25
        out.add(min(top, int(s)))
    return out


def _bfs_order(adj: list[int], root: int, limit: int) -> list[int]:
    order = [root]
    seen = 1 << root
    i = 0
    while i < len(order) and len(order) < limit:
        fresh = adj[order[i]] & ~seen
        seen |= fresh
        for u in iter_bits(fresh):
            order.append(u)
            if len(order) >= limit:
                break
        i += 1
    return order


def check_expands_into(G, W: Optional[Iterable[int]], d: float, mode: str = "sampled", budget: int = 200,
                       seed=0, cap: int = DEFAULT_CAP, sweep: int = 3, direction: str = "out") -> ExpansionReport:
    """Does G d-expand into W? W=None means W = V(G)."""
    if d <= 0:
        raise ValueError("d must be positive")
    wmask = (1 << G.n) - 1 if W is None else mask_of(W)
    if wmask >> G.n:
        raise ValueError("W must be a subset of V(G)")
    ch = _Checker(G, wmask, d, direction)
    if mode == "exhaustive":
        count = exhaustive_count(G.n, ch.t)
        if count > cap:
            raise CapExceeded(f"exhaustive check needs {count} sets (cap {cap})")
        _exhaustive(ch)
    elif mode == "sampled":
        _sampled(ch, budget, make_rng(seed, 0xE1), sweep)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ch.report(mode)


def check_expander(G, d: float, mode: str = "sampled", budget: int = 200, seed=0,
                   cap: int = DEFAULT_CAP, sweep: int = 3, direction: str = "out") -> ExpansionReport:
    """Is G an (n, d)-expander?"""
    return check_expands_into(G, None, d, mode, budget, seed, cap, sweep, direction)


def verify_witness(G, report: ExpansionReport, W: Optional[Iterable[int]] = None, direction: str = "out") -> bool:
    """Independently re-check every witness in a report by direct computation."""
    wset = set(range(G.n)) if W is None else set(W)
    ok = True
    if report.cond1_witness is not None:
        X = set(report.cond1_witness)
        nbrs = set()
        for x in X:
            nbrs.update(G.in_neighbors(x) if direction == "in" else G.out_neighbors(x))
        ok &= len((nbrs - X) & wset) < report.d * len(X)
    if report.cond2_witness is not None:
        X, Y = map(set, report.cond2_witness)
        touching = any(
            y in G.out_neighbors(x) or x in G.out_neighbors(y) for x in X for y in Y
        )
        ok &= not (X & Y) and len(X) == len(Y) == report.threshold and not touching
    return ok


def split_target(G, W: Iterable[int], sizes: list[int], d: float, seed=0, max_retries: int = 10,
                 floor: float = 0.0, budget: int = 100, stats: Optional[dict] = None,
                 verify: bool = True) -> list[frozenset]:
    """Random partition of W into parts of the given sizes, each part W_i
    verified (sampled) to be d_i-expanded into with d_i = (m_i / 5m) d."""
    ws = sorted(set(W))
    m = len(ws)
    if sum(sizes) != m:
        raise ValueError("sizes must sum to |W|")
    if any(s < 0 for s in sizes):
        raise ValueError("sizes must be non-negative")
    ds = [(s / (5 * m)) * d if m else 0.0 for s in sizes]
    if any(di < floor for di in ds):
        raise ValueError(f"part expansion {min(ds):.3g} is below the floor {floor}")
    if len(sizes) == 1:
        if stats is not None:
            stats["attempts"] = 1
        return [frozenset(ws)]
    rng = make_rng(seed, 0x5B1)
    last = None
    for attempt in range(1, max_retries + 1):
        order = ws[:]
        rng.shuffle(order)
        parts, pos = [], 0
        for s in sizes:
            parts.append(frozenset(order[pos:pos + s]))
            pos += s
        bad = None
        if verify:
            for part, di in zip(parts, ds):
                if not part or di <= 0:
                    continue
                rep = check_expands_into(G, part, di, "sampled", budget, rng.getrandbits(32))
                if not rep.holds:
                    bad = rep
                    break
        if bad is None:
            if stats is not None:
                stats["attempts"] = attempt
            return parts
        last = bad
    raise RetriesExhausted(f"no expanding partition after {max_retries} attempts", last)


def random_expander_p(n: int, d: float, factor: float = 7.0) -> float:
    return min(1.0, factor * d * math.log(n) / n)


def verify_random_expansion(n: int, d: float, trials: int, seed=0, factor: float = 7.0,
                            budget: int = 100) -> float:
    """Fraction of G(n, factor*d*log(n)/n) samples passing the sampled expander check."""
    if d < 3:
        raise ValueError("the random-expander statement assumes d >= 3")
    p = random_expander_p(n, d, factor)
    ok = 0
    for i in range(trials):
        G = gen_gnp(n, p, (int(seed) * 1_000_003 + i))
        ok += check_expander(G, d, "sampled", budget, seed=i).holds
    return ok / trials if trials else 0.0
