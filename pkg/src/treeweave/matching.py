"""Generalized bipartite matching (each left vertex u gets cap[u] distinct partners).

Solved as ordinary maximum matching after splitting u into cap[u] copies, with
Hopcroft-Karp. On failure a deficient set A with sum(cap[A]) > |N(A)| is
extracted from the alternating-path structure.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence, Union

from .errors import MatchingInfeasible

INF = float("inf")


def _hopcroft_karp(adj: list[list[int]], n_right: int) -> tuple[list[int], list[int]]:
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0] * n_left

    def bfs() -> bool:
        q = deque()
        found = False
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        while q:
            u = q.popleft()
            for r in adj[u]:
                w = match_r[r]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative augmenting-path search along the BFS layering
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for r in it:
                w = match_r[r]
                if w == -1:
                    path.append((u, r))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, r))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u)
    return match_l, match_r


def generalized_matching(
    left: Sequence[Hashable],
    capacity: Union[int, Mapping[Hashable, int]],
    candidates: Union[Mapping[Hashable, Iterable[Hashable]], Callable[[Hashable], Iterable[Hashable]]],
    rng: Optional[random.Random] = None,
) -> dict:
    """Assign each u in `left` exactly capacity[u] distinct right vertices from
    candidates(u), all assigned sets disjoint. Raises MatchingInfeasible with a
    deficient set otherwise. `rng` shuffles candidate order (otherwise sorted)."""
    get = candidates if callable(candidates) else candidates.__getitem__
    cap = (lambda u: capacity) if isinstance(capacity, int) else capacity.__getitem__
    right_ids: dict = {}
    right_of: list = []
    cand_idx: dict = {}
    for u in left:
        row = []
        for r in sorted(set(get(u))):
            if r not in right_ids:
                right_ids[r] = len(right_of)
                right_of.append(r)
            row.append(right_ids[r])
        if rng is not None:
            rng.shuffle(row)
        cand_idx[u] = row
    owners = []
    adj = []
    for u in left:
        c = cap(u)
        if c < 0:
            raise ValueError("capacities must be non-negative")
        for _ in range(c):
            owners.append(u)
            adj.append(cand_idx[u])
    match_l, match_r = _hopcroft_karp(adj, len(right_of))
    unmatched = [i for i, r in enumerate(match_l) if r == -1]
    if unmatched:
        # alternating BFS from one unmatched copy gives a Hall violator
        seen_l = {unmatched[0]}
        seen_r = set()
        q = deque([unmatched[0]])
        while q:
            u = q.popleft()
            for r in adj[u]:
                if r not in seen_r:
                    seen_r.add(r)
                    w = match_r[r]
                    if w != -1 and w not in seen_l:
                        seen_l.add(w)
                        q.append(w)
        centers = frozenset(owners[i] for i in seen_l)
        demand = sum(cap(u) for u in centers)
        nbrs = set()
        for u in centers:
            nbrs.update(cand_idx[u])
        assert demand > len(nbrs), "certificate extraction bug"
        raise MatchingInfeasible(centers, demand, len(nbrs))
    out: dict = {u: [] for u in left}
    for i, r in enumerate(match_l):
        out[owners[i]].append(right_of[r])
    return out


def max_matching_size(
    left: Sequence[Hashable],
    capacity: Union[int, Mapping[Hashable, int]],
    candidates,
) -> int:
    """Size of a maximum generalized matching (copies matched)."""
    try:
        res = generalized_matching(left, capacity, candidates)
        return sum(len(v) for v in res.values())
    except MatchingInfeasible:
        pass
    get = candidates if callable(candidates) else candidates.__getitem__
    cap = (lambda u: capacity) if isinstance(capacity, int) else capacity.__getitem__
    ids: dict = {}
    adj = []
    for u in left:
        row = []
        for r in sorted(set(get(u))):
            row.append(ids.setdefault(r, len(ids)))
        adj.extend([row] * cap(u))
    match_l, _ = _hopcroft_karp(adj, len(ids))
    return sum(1 for r in match_l if r != -1)
