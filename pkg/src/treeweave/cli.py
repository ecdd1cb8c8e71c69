"""Command-line entry point: embed, certify, cover, scan, verify.

Exit codes: 0 success, 1 trial failure (or a failed check), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .cover import CoverConfig, cover_with_paths, cover_with_paths_directed
from .embed import Embedding
from .errors import CoverFailed, TreeweaveError
from .expansion import check_expander
from .graph import read_edge_list
from .pipeline import ScaleParams, ScanConfig, embed_spanning_tree, threshold_scan, verify_embedding
from .trees import FAMILIES, gen_random_tree, read_tree


class UsageError(Exception):
    pass


def _load_params(path) -> ScaleParams:
    if path is None:
        return ScaleParams()
    return ScaleParams.from_text(Path(path).read_text())


def _load_tree(source: str, n: int, delta: int, seed: int):
    if os.path.exists(source):
        return read_tree(source)
    if source in FAMILIES:
        return gen_random_tree(n, delta, source, seed)
    raise UsageError(f"--tree is neither a file nor a family ({', '.join(FAMILIES)})")


def _read_pairs(path) -> list[tuple[int, int]]:
    out = []
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            a, b = ln.split()
            out.append((int(a), int(b)))
    return out


def cmd_embed(a) -> int:
    params = _load_params(a.params)
    T = _load_tree(a.tree, a.n, a.delta, a.seed)
    if T.n != a.n:
        raise UsageError(f"tree has {T.n} vertices, --n is {a.n}")
    emb, rec = embed_spanning_tree(a.n, a.p, T, params, a.seed, max(a.delta, T.max_degree), a.tree)
    print(f"branch: {rec.branch}")
    print(f"outcome: {rec.outcome}")
    if rec.phase:
        print(f"phase: {rec.phase}")
    print(f"wall_ms: {rec.wall_ms:.1f}")
    for note in rec.notes:
        print(f"note: {note}")
    if emb is not None and a.out:
        Path(a.out).write_text(emb.to_text())
    return 0 if rec.success else 1


def cmd_certify(a) -> int:
    G = read_edge_list(a.graph, directed=a.directed)
    rep = check_expander(G, a.d, a.mode, a.budget, a.seed)
    sys.stdout.write(rep.to_text())
    return 0 if rep.holds else 1


def cmd_cover(a) -> int:
    G = read_edge_list(a.graph, directed=a.directed)
    pairs = _read_pairs(a.pairs)
    fn = cover_with_paths_directed if a.directed else cover_with_paths
    try:
        paths = fn(G, pairs, a.len, CoverConfig(), a.seed)
    except CoverFailed as e:
        print(f"cover failed in phase {e.phase}: {e}", file=sys.stderr)
        return 1
    for p in paths:
        print(" ".join(map(str, p)))
    return 0


def cmd_scan(a) -> int:
    cfg = ScanConfig.from_text(Path(a.config).read_text())
    params = _load_params(a.params)
    rows = threshold_scan(cfg.family, cfg.n, cfg.p, cfg.trials, params, cfg.seed, cfg.delta, a.out)
    for r in rows:
        print(f"n={r['n']} p={r['p']} successes={r['successes']}/{r['trials']}")
    return 0


def cmd_verify(a) -> int:
    G = read_edge_list(a.graph)
    T = read_tree(a.tree)
    emb = Embedding.parse(Path(a.embedding).read_text())
    rep = verify_embedding(G, T, emb)
    if rep.valid:
        print("valid")
        return 0
    for p in rep.problems:
        print(p)
    return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treeweave", description="Spanning-tree embedding in random graphs.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    e = sub.add_parser("embed", help="embed one spanning tree into a fresh G(n, p)")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--tree", required=True, help="tree file or family name")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--params", help="key=value parameter file")
    e.add_argument("--delta", type=int, default=3, help="degree bound for generated trees")
    e.add_argument("--out", help="write the embedding here on success")
    e.set_defaults(fn=cmd_embed)

    c = sub.add_parser("certify", help="check the expander property")
    c.add_argument("--graph", required=True)
    c.add_argument("--d", type=float, required=True)
    c.add_argument("--mode", choices=["sampled", "exhaustive"], default="sampled")
    c.add_argument("--budget", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--directed", action="store_true")
    c.set_defaults(fn=cmd_certify)

    v = sub.add_parser("cover", help="cover a graph with exact-length anchored paths")
    v.add_argument("--graph", required=True)
    v.add_argument("--pairs", required=True)
    v.add_argument("--len", type=int, required=True, help="vertices per path")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--directed", action="store_true")
    v.set_defaults(fn=cmd_cover)

    s = sub.add_parser("scan", help="Monte-Carlo success-rate scan")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--params")
    s.set_defaults(fn=cmd_scan)

    f = sub.add_parser("verify", help="validate a stored embedding")
    f.add_argument("--graph", required=True)
    f.add_argument("--tree", required=True)
    f.add_argument("--embedding", required=True)
    f.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)  # exits with 2 on bad usage
    try:
        return a.fn(a)
    except (UsageError, OSError, ValueError) as e:
        print(f"treeweave: {e}", file=sys.stderr)
        return 2
    except TreeweaveError as e:
        print(f"treeweave: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
