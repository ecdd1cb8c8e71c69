"""End-to-end spanning-tree embedding in G(n, p): two-phase edge reveal, leafy
or pathy branch, validation, and a Monte-Carlo scan harness."""

from __future__ import annotations

import csv
import math
import time
from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .absorption import StructureConfig
from .cover import CoverConfig, CoverReport, cover_with_paths
from .embed import EmbedConfig, Embedding, StarDemand, attach_stars, embed_forest
from .errors import (CoverFailed, DichotomyViolation, EmbedFailed, HypothesisViolation, MatchingInfeasible,
                     RetriesExhausted)
from .expansion import split_target
from .graph import gen_gnp, induced
from .rng import RngSeed, as_seed
from .trees import Leafy, TreeShape, classify, gen_random_tree, leaves, strip


@dataclass
class ScaleParams:
    """Every tunable constant of the pipeline. Desk defaults are scaled-down
    stand-ins; `asymptotic(n, delta)` evaluates the asymptotic formulas."""
    bare_path_len: Optional[int] = None  # k; None picks the desk value for n
    leaf_fraction: float = 1 / 8  # share of n removed as leaves in the leafy branch
    min_removed: int = 1  # floor on the number of removed leaves
    expander_d: float = 1.0  # expansion factor used when verification is on
    absorber_count: int = 10  # per-vertex absorbers, i.e. twice the template matchings
    cover_r_fraction: float = 1 / 6
    w1_fraction: float = 7 / 8  # pathy branch: share of V reserved for the forest
    embed_retries: int = 5
    cover_retries: int = 5
    verify_expansion: bool = False
    strict_paper_mode: bool = False

    def k_for(self, n: int) -> int:
        if self.bare_path_len is not None:
            return self.bare_path_len
        return desk_bare_path_len(n)

    @classmethod
    def asymptotic(cls, n: int, delta: int) -> "ScaleParams":
        """Constants as the asymptotic argument sets them (natural logarithms)."""
        ln = math.log(n)
        return cls(bare_path_len=math.ceil(1e3 * ln ** 2), leaf_fraction=1 / ln ** 3, min_removed=1,
                   expander_d=delta * ln ** 4 / 20, absorber_count=40, strict_paper_mode=True)

    def check_strict(self, n: int, p: float, delta: int) -> None:
        """In strict mode refuse inputs outside the literal hypotheses."""
        if not self.strict_paper_mode:
            return
        want = ScaleParams.asymptotic(n, delta)
        for f in ("bare_path_len", "leaf_fraction", "expander_d", "absorber_count"):
            if getattr(self, f) != getattr(want, f):
                raise HypothesisViolation(f"strict mode: {f} differs from its formula at n={n}")
        need_p = delta * math.log(n) ** 5 / n
        if need_p > 1:
            raise HypothesisViolation(f"strict mode: p = delta log^5 n / n = {need_p:.3g} exceeds 1 at n={n}")
        if p < need_p:
            raise HypothesisViolation(f"strict mode: p={p} below delta log^5 n / n = {need_p:.3g}")

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> "ScaleParams":
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            key, _, val = ln.partition("=")
            key, val = key.strip(), val.strip()
            if key not in kinds:
                raise ValueError(f"unknown parameter {key!r}")
            kw[key] = _parse_value(val, kinds[key])
        return cls(**kw)


def _parse_value(val: str, kind: str):
    if "bool" in kind:
        if val.lower() not in ("true", "false", "1", "0"):
            raise ValueError(f"bad boolean {val!r}")
        return val.lower() in ("true", "1")
    if val.lower() == "none":
        return None
    if "float" in kind:
        if "/" in val:
            a, b = val.split("/")
            return float(a) / float(b)
        return float(val)
    return int(val)


def desk_bare_path_len(n: int) -> int:
    return max(3, min(math.ceil(math.log2(n) ** 2 / 2), n // 10))


@dataclass
class TrialRecord:
    seed: int
    n: int
    delta: int
    p: float
    family: str = ""
    branch: str = ""
    outcome: str = "failure"
    phase: str = ""
    wall_ms: float = 0.0
    phase_ms: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.outcome == "success"


@dataclass
class EmbeddingReport:
    problems: list

    @property
    def valid(self) -> bool:
        return not self.problems


def verify_embedding(G, T: TreeShape, emb: Embedding) -> EmbeddingReport:
    """Totality over V(T), injectivity and edge preservation, walking T's edge list."""
    problems = []
    img = np.full(T.n, -1, dtype=np.int64)
    for g, h in emb.map.items():
        if not 0 <= g < T.n:
            problems.append(f"guest {g} is not a tree vertex")
        else:
            img[g] = h
    missing = np.flatnonzero(img < 0)
    problems += [f"tree vertex {g} has no image" for g in missing.tolist()]
    bad = np.flatnonzero((img >= G.n))
    problems += [f"tree vertex {g} maps outside the host" for g in bad.tolist()]
    placed = img[img >= 0]
    vals, counts = np.unique(placed, return_counts=True)
    problems += [f"host vertex {h} used {c} times" for h, c in zip(vals.tolist(), counts.tolist()) if c > 1]
    for a, b in T.edges():
        ha, hb = int(img[a]), int(img[b])
        if ha < 0 or hb < 0 or ha >= G.n or hb >= G.n:
            continue
        if not G.has_edge(ha, hb):
            problems.append(f"tree edge {a}-{b} maps to non-edge {ha}-{hb}")
    return EmbeddingReport(problems)


def _phase(rec: TrialRecord, name: str, t0: float) -> float:
    now = time.perf_counter()
    rec.phase_ms[name] = rec.phase_ms.get(name, 0.0) + (now - t0) * 1e3
    return now


def embed_spanning_tree(n: int, p: float, T: TreeShape, params: Optional[ScaleParams] = None, seed=0,
                        delta: Optional[int] = None, family: str = "") -> tuple[Optional[Embedding], TrialRecord]:
    """Embed the spanning tree T into a fresh G(n, p) revealed in two halves.

    Returns (embedding, record); the embedding is None on failure and has always
    passed verify_embedding otherwise.
    """
    params = params or ScaleParams()
    delta = delta if delta is not None else T.max_degree
    s = as_seed(seed)
    rec = TrialRecord(int(s.seed), n, delta, p, family)
    start = time.perf_counter()
    if T.n != n:
        raise ValueError("the tree must have exactly n vertices")
    if T.max_degree > delta:
        raise ValueError("tree exceeds the degree bound")
    params.check_strict(n, p, delta)
    try:
        emb = _run(n, p, T, params, s, rec)
    finally:
        rec.wall_ms = (time.perf_counter() - start) * 1e3
    return emb, rec


def _halves(n: int, p: float, s: RngSeed):
    return gen_gnp(n, p / 2, s.child(1)), gen_gnp(n, p / 2, s.child(2))


def revealed_host(n: int, p: float, seed=0):
    """The full host (both halves) that embed_spanning_tree draws for this seed."""
    G1, G2 = _halves(n, p, as_seed(seed))
    return G1.union(G2)


def _run(n, p, T, params: ScaleParams, s: RngSeed, rec: TrialRecord) -> Optional[Embedding]:
    t0 = time.perf_counter()
    G1, G2 = _halves(n, p, s)
    t0 = _phase(rec, "reveal", t0)
    k = params.k_for(n)
    if n <= 2:
        # nothing to branch on: any edge (or single vertex) does
        H = G1.union(G2)
        rec.branch = "trivial"
        if n == 2 and not H.has_edge(0, 1):
            rec.phase = "embed"
            return None
        emb = Embedding({v: v for v in range(n)})
        return _finish(H, T, emb, rec)
    try:
        kind = classify(T, k)
    except DichotomyViolation:
        rec.branch, rec.phase = "none", "classify"
        return None
    ecfg = EmbedConfig(max_retries=params.embed_retries)
    rng = s.child(3).python()
    if isinstance(kind, Leafy):
        rec.branch = "leafy"
        scaled = int(n * params.leaf_fraction)
        lv = sorted(leaves(T))
        count = min(max(params.min_removed, scaled), len(lv))
        if count != scaled:
            rec.notes.append(f"removed {count} leaves instead of the scaled {scaled}")
        chosen = set(rng.sample(lv, count))
        res = strip(T, chosen)
        try:
            phi = embed_forest(G1, res.forest, None, ecfg, s.child(4))
        except EmbedFailed:
            rec.phase = "embed"
            _phase(rec, "embed", t0)
            return None
        t0 = _phase(rec, "embed", t0)
        H = G1.union(G2)
        used = set(phi.map.values())
        pool = [v for v in range(n) if v not in used]
        centers = sorted(res.demands)
        dem = StarDemand([phi.map[c] for c in centers], {phi.map[c]: res.demands[c] for c in centers}, pool)
        try:
            stars = attach_stars(H, dem, s.child(5))
        except MatchingInfeasible:
            rec.phase = "stars"
            _phase(rec, "stars", t0)
            return None
        _phase(rec, "stars", t0)
        removed_by_center: dict = {}
        for v in sorted(chosen):
            (c,) = T.adj[v]
            removed_by_center.setdefault(c, []).append(v)
        full = dict(phi.map)
        for c, vs in removed_by_center.items():
            for v, h in zip(vs, stars[phi.map[c]]):
                full[v] = h
        return _finish(H, T, Embedding(full), rec)
    rec.branch = "pathy"
    H = G1.union(G2)
    res = strip(T, kind)
    try:
        W1, W2 = split_target(H, range(n), [round(n * params.w1_fraction), n - round(n * params.w1_fraction)],
                              params.expander_d, s.child(6), verify=params.verify_expansion)
    except RetriesExhausted:
        rec.phase = "split"
        return None
    try:
        phi = embed_forest(H, res.forest, W1, ecfg, s.child(4))
    except EmbedFailed:
        rec.phase = "embed"
        _phase(rec, "embed", t0)
        return None
    t0 = _phase(rec, "embed", t0)
    used = set(phi.map.values())
    ends = {phi.map[a] for a, b, _ in res.requests} | {phi.map[b] for a, b, _ in res.requests}
    keep = sorted((set(range(n)) - used) | ends)
    sub = induced(H, keep)
    pos = {v: i for i, v in enumerate(keep)}
    pairs = [(pos[phi.map[a]], pos[phi.map[b]]) for a, b, _ in res.requests]
    ccfg = CoverConfig(r_fraction=params.cover_r_fraction, max_retries=params.cover_retries,
                       structure=StructureConfig(template_matchings=max(1, params.absorber_count // 2)))
    crep = CoverReport()
    try:
        paths = cover_with_paths(sub, pairs, k + 1, ccfg, s.child(7), crep)
    except (CoverFailed, ValueError) as e:
        rec.notes.extend(f"cover {ph}: {msg}" for ph, msg in crep.failures[-3:])
        rec.phase = getattr(e, "phase", "cover")
        rec.phase = f"cover:{rec.phase}"
        _phase(rec, "cover", t0)
        return None
    _phase(rec, "cover", t0)
    rec.notes.extend(crep.notes)
    full = dict(phi.map)
    for (a, b, _), tree_path, host_path in zip(res.requests, res.paths, paths):
        seq = list(tree_path) if tree_path[0] == a else list(tree_path)[::-1]
        for g, h in zip(seq, host_path):
            full[g] = keep[h]
    return _finish(H, T, Embedding(full), rec)


def _finish(H, T, emb: Embedding, rec: TrialRecord) -> Optional[Embedding]:
    report = verify_embedding(H, T, emb)
    if not report.valid:
        rec.phase = "validate"
        rec.notes.extend(report.problems[:5])
        return None
    rec.outcome = "success"
    return emb


# Monte-Carlo scan

SCAN_COLUMNS = ["n", "p", "family", "delta", "trials", "successes", "mean_ms", "branch_counts"]


def trial_seed(seed: int, n: int, trial: int) -> RngSeed:
    """Per-trial seed, shared across p values so cells are paired."""
    return RngSeed(int(seed), (n, trial))


def run_cell(family: str, n: int, p: float, delta: int, trials: int, params: ScaleParams, seed: int,
             records: Optional[list] = None) -> dict:
    succ = 0
    ms = []
    branches: Counter = Counter()
    for t in range(trials):
        ts = trial_seed(seed, n, t)
        T = gen_random_tree(n, delta, family, ts.child(0x7EE))
        _, rec = embed_spanning_tree(n, p, T, params, ts, delta, family)
        succ += rec.success
        ms.append(rec.wall_ms)
        branches[rec.branch] += 1
        if records is not None:
            records.append(rec)
    return {
        "n": n, "p": p, "family": family, "delta": delta, "trials": trials, "successes": succ,
        "mean_ms": f"{(sum(ms) / len(ms)) if ms else 0.0:.1f}",
        "branch_counts": ";".join(f"{b}:{c}" for b, c in sorted(branches.items())),
    }


def threshold_scan(family: str, n_grid: Sequence[int], p_grid: Sequence[float], trials: int,
                   params: Optional[ScaleParams] = None, seed: int = 0, delta: int = 3, out=None,
                   records: Optional[list] = None) -> list[dict]:
    """Success rate per (n, p) cell. Rows are written to `out` (a path or text
    stream) as soon as each cell finishes."""
    if not n_grid or not p_grid:
        raise ValueError("grids must be non-empty")
    params = params or ScaleParams()
    rows = []
    fh = open(out, "w", newline="") if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__") else out
    try:
        writer = None
        if fh is not None:
            writer = csv.DictWriter(fh, SCAN_COLUMNS, lineterminator="\n")
            writer.writeheader()
        for n in n_grid:
            for p in p_grid:
                row = run_cell(family, n, p, delta, trials, params, seed, records)
                rows.append(row)
                if writer is not None:
                    writer.writerow(row)
                    fh.flush()
    finally:
        if fh is not None and fh is not out:
            fh.close()
    return rows


@dataclass
class ScanConfig:
    family: str = "uniform-attachment"
    n: list = field(default_factory=lambda: [128])
    p: list = field(default_factory=lambda: [0.3])
    delta: int = 3
    trials: int = 10
    seed: int = 0

    @classmethod
    def from_text(cls, text: str) -> "ScanConfig":
        cfg = cls()
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            key, _, val = ln.partition("=")
            key, val = key.strip(), val.strip()
            if key == "family":
                cfg.family = val
            elif key == "n":
                cfg.n = [int(x) for x in val.split(",")]
            elif key == "p":
                cfg.p = [float(x) for x in val.split(",")]
            elif key in ("delta", "trials", "seed"):
                setattr(cfg, key, int(val))
            else:
                raise ValueError(f"unknown scan key {key!r}")
        return cfg
