"""Independent brute-force oracles used to pin expected values.

Everything here is deliberately naive (exhaustive enumeration, quadratic
dynamic programming) and shares no code path with the implementations it
checks.
"""

from __future__ import annotations

import itertools


def strongly_connected(T, removed=frozenset()) -> bool:
    alive = [v for v in range(T.n) if v not in removed]
    if len(alive) <= 1:
        return True
    start = alive[0]
    for reverse in (False, True):
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in alive:
                if v in seen:
                    continue
                edge = T.has_edge(v, u) if reverse else T.has_edge(u, v)
                if edge:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(alive):
            return False
    return True


def brute_vertex_connectivity(T) -> int:
    """Smallest set whose removal breaks strong connectivity (n-1 cap)."""
    if T.n == 1:
        return 0
    if not strongly_connected(T):
        return 0
    for size in range(1, T.n - 1):
        for removed in itertools.combinations(range(T.n), size):
            if not strongly_connected(T, frozenset(removed)):
                return size
    return T.n - 2


def reachable(T, s, t, removed=frozenset()) -> bool:
    if s in removed or t in removed:
        return False
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        if u == t:
            return True
        for v in range(T.n):
            if v not in seen and v not in removed and T.has_edge(u, v):
                seen.add(v)
                stack.append(v)
    return t in seen


def brute_min_internal_cut(T, s, t, max_size=None) -> int:
    """Minimum internal separator killing every s->t path except a direct edge."""
    interior = [v for v in range(T.n) if v not in (s, t)]
    removed_edge = {(s, t)}

    def reach_no_edge(removed):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in range(T.n):
                if v in seen or v in removed or (u, v) in removed_edge:
                    continue
                if T.has_edge(u, v):
                    seen.add(v)
                    stack.append(v)
        return t in seen

    limit = len(interior) if max_size is None else min(max_size, len(interior))
    for size in range(0, limit + 1):
        for removed in itertools.combinations(interior, size):
            if not reach_no_edge(frozenset(removed)):
                return size
    return len(interior) if max_size is None else None


def simple_paths(T, s, t, banned=frozenset()):
    """All simple directed s->t paths avoiding ``banned``."""
    out: list[tuple[int, ...]] = []
    if s in banned or t in banned:
        return out

    def extend(path, on_path):
        u = path[-1]
        if u == t:
            out.append(tuple(path))
            return
        for v in range(T.n):
            if v in banned or v in on_path:
                continue
            if T.has_edge(u, v):
                path.append(v)
                on_path.add(v)
                extend(path, on_path)
                path.pop()
                on_path.remove(v)

    extend([s], {s})
    return out


def brute_two_linked(T, pairs) -> bool:
    """Exhaustive path-pair enumeration for a 2-pair instance."""
    (x1, y1), (x2, y2) = pairs
    for p1 in simple_paths(T, x1, y1, banned=frozenset({x2, y2})):
        used = frozenset(p1)
        for _ in simple_paths(T, x2, y2, banned=used):
            return True
    return False


def brute_min_disjoint_total(T, sources, sinks, special=None, forbidden=frozenset(), count=None):
    """Minimum total vertex count over all disjoint path systems, or None."""
    sources = sorted(set(sources))
    sinks = sorted(set(sinks))
    if count is None:
        count = len(sources)
    sink_pool = list(sinks) + ([special] if special is not None else [])
    best = [None]

    def go(idx_sources, used, used_sinks, total, remaining):
        if best[0] is not None and total >= best[0]:
            return
        if remaining == 0:
            best[0] = total if best[0] is None else min(best[0], total)
            return
        if len(idx_sources) < remaining:
            return
        s = idx_sources[0]
        rest = idx_sources[1:]
        # choice 1: skip this source entirely (only if enough sources remain)
        go(rest, used, used_sinks, total, remaining)
        # choice 2: route a path from s to any unused sink
        for t in sink_pool:
            if t in used_sinks or t in used:
                continue
            for p in simple_paths(T, s, t, banned=used | forbidden - {s, t}):
                if any(v in used for v in p):
                    continue
                go(rest, used | set(p), used_sinks | {t}, total + len(p), remaining - 1)

    go(tuple(sources), frozenset(), frozenset(), 0, count)
    return best[0]


def lis_dp(ranks) -> int:
    """Quadratic longest strictly increasing subsequence length."""
    n = len(ranks)
    if n == 0:
        return 0
    best = [1] * n
    for i in range(n):
        for j in range(i):
            if ranks[j] < ranks[i]:
                best[i] = max(best[i], best[j] + 1)
    return max(best)


def lds_dp(ranks) -> int:
    return lis_dp([-r for r in ranks])


def hamiltonian_path_exists(nodes, arcs) -> bool:
    nodes = list(nodes)
    for perm in itertools.permutations(nodes):
        if all((a, b) in arcs for a, b in zip(perm, perm[1:])):
            return True
    return False
