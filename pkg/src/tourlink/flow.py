"""Menger-style machinery: vertex cuts, strong connectivity, and minimum
total-vertex disjoint path systems.

All computations run on a unit-vertex-capacity flow model (vertex splitting),
realized two ways: a bitmask residual search for plain max-flow questions
(cuts, local connectivity) and an explicit successive-shortest-augmenting-path
network for the cost-minimal disjoint systems.  Everything is a pure function
of an immutable tournament, so independent computations can run concurrently.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import InfeasibleSystemError
from .tournament import Tournament, bits_of, mask_of, popcount

_INF = float("inf")


@dataclass(frozen=True)
class CutCertificate:
    """Minimum internal separator for an ordered pair plus matching witnesses.

    ``witness_paths`` are internally disjoint s->t paths with nonempty
    interiors, one per cut vertex.  When the edge s->t is present the pair is
    uncuttable by internal vertices; that edge is reported separately as
    ``direct_path`` and ``cut`` is the residual internal cut.
    """

    s: int
    t: int
    cut: frozenset[int]
    witness_paths: tuple[tuple[int, ...], ...]
    direct_path: Optional[tuple[int, int]] = None

    @property
    def uncuttable(self) -> bool:
        return self.direct_path is not None

    @property
    def local_connectivity(self) -> int:
        return len(self.witness_paths) + (1 if self.direct_path else 0)


@dataclass(frozen=True)
class ConnectivityVerdict:
    connected: bool
    k: int
    reason: str
    separator: Optional[frozenset[int]] = None
    pair_witnesses: tuple = ()  # ((s, t, (path, ...)), ...)


@dataclass(frozen=True)
class PathSystem:
    """Pairwise vertex-disjoint paths with declared sources and sinks."""

    paths: tuple[tuple[int, ...], ...]
    sources: frozenset[int]
    sinks: frozenset[int]
    special_sink: Optional[int] = None

    def vertices(self) -> frozenset[int]:
        out: set[int] = set()
        for p in self.paths:
            out.update(p)
        return frozenset(out)

    def total_vertices(self) -> int:
        return sum(len(p) for p in self.paths)

    def vertex_mask(self) -> int:
        return mask_of(self.vertices())


# ---------------------------------------------------------------------------
# Residual search for unit-vertex-capacity max flow (single pair)
# ---------------------------------------------------------------------------
#
# Flow state: succ/pred dicts over interior vertices (pred[h] == -1 marks a
# first hop off s).  One augmentation = one BFS over (vertex, side) states of
# the implicitly split graph; tournament arcs are uncapacitated, so every
# finite-capacity arc is a vertex split and min cuts map directly to vertices.


def _augment(masks, interior: int, s: int, t: int, succ: dict, pred: dict):
    vis_in = 0
    vis_out = 0
    par_in: dict[int, tuple[int, int]] = {}
    par_out: dict[int, tuple[int, int]] = {}
    queue: deque = deque()
    m = masks[s] & interior
    while m:
        low = m & -m
        w = low.bit_length() - 1
        m ^= low
        vis_in |= low
        par_in[w] = (-1, 1)
        queue.append((w, 0))
    done = -1
    while queue:
        v, side = queue.popleft()
        if side == 0:
            if v not in pred:
                if not (vis_out >> v) & 1:
                    vis_out |= 1 << v
                    par_out[v] = (v, 0)
                    queue.append((v, 1))
            else:
                u = pred[v]
                if u >= 0 and not (vis_out >> u) & 1:
                    vis_out |= 1 << u
                    par_out[u] = (v, 0)
                    queue.append((u, 1))
        else:
            sv = succ.get(v, -1)
            if sv != t and (masks[v] >> t) & 1:
                done = v
                break
            fwd = masks[v] & interior & ~vis_in
            if sv >= 0 and sv != t:
                fwd &= ~(1 << sv)
            while fwd:
                low = fwd & -fwd
                w = low.bit_length() - 1
                fwd ^= low
                vis_in |= low
                par_in[w] = (v, 1)
                queue.append((w, 0))
            if v in pred and not (vis_in >> v) & 1:
                vis_in |= 1 << v
                par_in[v] = (v, 1)
                queue.append((v, 0))
    if done < 0:
        return False, vis_in, vis_out

    # Reconstruct the move chain, then replay it onto succ/pred.
    moves = [("add", done, t)]
    v, side = done, 1
    while True:
        if side == 1:
            pv, pside = par_out[v]
            if pv == v and pside == 0:
                side = 0
            else:
                moves.append(("remove", v, pv))
                v, side = pv, 0
        else:
            pv, pside = par_in[v]
            if pv == -1:
                moves.append(("start", v, v))
                break
            if pv == v and pside == 1:
                side = 1
            else:
                moves.append(("add", pv, v))
                v, side = pv, 1
    for kind, u, w in reversed(moves):
        if kind == "start":
            pred[u] = -1
        elif kind == "add":
            succ[u] = w
            if w != t:
                pred[w] = u
        else:  # remove arc u->w
            if succ.get(u) == w:
                del succ[u]
            if pred.get(w) == u:
                del pred[w]
    return True, 0, 0


def _interior_flow(T: Tournament, s: int, t: int, allowed: int, stop_at=None):
    """Max internally disjoint s->t paths with interiors inside ``allowed``,
    ignoring any direct s->t edge.  Stops early once ``stop_at`` paths exist.

    Returns (count, succ, pred, cut_mask); cut_mask is None when stopped early.
    """
    interior = allowed & ~(1 << s) & ~(1 << t)
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    count = 0
    while stop_at is None or count < stop_at:
        ok, vis_in, vis_out = _augment(T.out_masks, interior, s, t, succ, pred)
        if not ok:
            return count, succ, pred, vis_in & ~vis_out & interior
        count += 1
    return count, succ, pred, None


def _paths_from_flow(s: int, t: int, succ: dict, pred: dict) -> list[tuple[int, ...]]:
    paths = []
    for h in sorted(w for w, p in pred.items() if p == -1):
        path = [s, h]
        v = h
        while True:
            w = succ[v]
            path.append(w)
            if w == t:
                break
            v = w
        paths.append(tuple(path))
    return paths


# ---------------------------------------------------------------------------
# Cuts and connectivity
# ---------------------------------------------------------------------------


def local_connectivity(T: Tournament, s: int, t: int, stop_at=None) -> int:
    """Number of internally disjoint s->t paths, counting a direct edge as one."""
    if s == t:
        raise ValueError("s and t must differ")
    edge = 1 if T.has_edge(s, t) else 0
    inner_stop = None if stop_at is None else max(stop_at - edge, 0)
    if inner_stop == 0 and stop_at is not None:
        return edge
    count, _, _, _ = _interior_flow(T, s, t, T.full_mask, stop_at=inner_stop)
    return count + edge

def min_vertex_cut(T: Tournament, s: int, t: int) -> CutCertificate:
    """Minimum internal vertex cut for the ordered pair with Menger witnesses.

    A direct edge s->t cannot be killed by internal vertices; the certificate
    then carries the uncuttable marker (``direct_path``) alongside the
    residual internal cut for the remaining paths.
    """
    if s == t:
        raise ValueError("s and t must differ")
    T._check_vertex(s)
    T._check_vertex(t)
    count, succ, pred, cut_mask = _interior_flow(T, s, t, T.full_mask)
    cut = frozenset(bits_of(cut_mask))
    paths = _paths_from_flow(s, t, succ, pred)
    direct = (s, t) if T.has_edge(s, t) else None
    return CutCertificate(s=s, t=t, cut=cut, witness_paths=tuple(paths), direct_path=direct)


def _shortcut_witnesses(T: Tournament, a: int, b: int, k: int):
    """k internally disjoint a->b paths of length <= 2, or None."""
    common = T.out_masks[a] & T.in_mask(b)
    edge = T.has_edge(a, b)
    if popcount(common) + (1 if edge else 0) < k:
        return None
    paths: list[tuple[int, ...]] = []
    if edge:
        paths.append((a, b))
    for w in bits_of(common):
        if len(paths) >= k:
            break
        paths.append((a, w, b))
    return paths


def _pair_family(n: int, k: int):
    base = list(range(k))
    for a in base:
        for b in base:
            if a != b:
                yield a, b
    for u in base:
        for w in range(k, n):
            yield u, w
            yield w, u


def _first_small_cut(T: Tournament, bound: int):
    """First ordered non-edge pair whose internal cut is below ``bound``."""
    full = T.full_mask
    for a in range(T.n):
        rev = full & ~T.out_masks[a] & ~(1 << a)
        for b in bits_of(rev):
            count, _, _, cut_mask = _interior_flow(T, a, b, full, stop_at=bound)
            if count < bound:
                return frozenset(bits_of(cut_mask))
    return None


def is_k_connected(T: Tournament, k: int) -> ConnectivityVerdict:
    """Certified strong k-connectivity test.

    Positive verdicts carry, for a fixed k-vertex set U, k internally
    disjoint paths for every ordered pair inside U and between U and the
    rest; that family is sufficient because a separator of size below k
    misses some U-vertex.  Negative verdicts carry a separator of size < k.
    """
    if k <= 0:
        return ConnectivityVerdict(True, k, "trivially connected")
    if T.n < k + 1:
        return ConnectivityVerdict(False, k, "too few vertices")
    witnesses = []
    for a, b in _pair_family(T.n, k):
        paths = _shortcut_witnesses(T, a, b, k)
        if paths is None:
            edge = T.has_edge(a, b)
            need = k - (1 if edge else 0)
            count, succ, pred, _ = _interior_flow(T, a, b, T.full_mask, stop_at=need)
            if count < need:
                separator = _first_small_cut(T, k)
                return ConnectivityVerdict(
                    False, k, f"pair ({a}, {b}) has local connectivity below {k}",
                    separator=separator,
                )
            paths = _paths_from_flow(a, b, succ, pred)
            if edge:
                paths = [(a, b)] + paths
        witnesses.append((a, b, tuple(paths)))
    return ConnectivityVerdict(True, k, "certified", pair_witnesses=tuple(witnesses))


def vertex_connectivity(T: Tournament) -> int:
    """Exact strong vertex connectivity.

    Equals the minimum internal cut over ordered pairs (a, b) with no edge
    a->b; each pair's flow is stopped early once it cannot lower the running
    minimum.  Intended for desk-scale instances.
    """
    n = T.n
    if n == 1:
        return 0
    best = n - 2
    for v in range(n):
        dout = T.out_degree(v)
        din = n - 1 - dout
        if dout <= n - 2:
            best = min(best, dout)
        if din <= n - 2:
            best = min(best, din)
    if best == 0:
        return 0
    full = T.full_mask
    for a in range(n):
        rev = full & ~T.out_masks[a] & ~(1 << a)
        for b in bits_of(rev):
            if popcount(T.out_masks[a] & T.in_mask(b)) >= best:
                continue
            count, _, _, _ = _interior_flow(T, a, b, full, stop_at=best)
            if count < best:
                best = count
                if best == 0:
                    return 0
    return best


# ---------------------------------------------------------------------------
# Min-cost disjoint path systems (successive shortest augmenting paths)
# ---------------------------------------------------------------------------


class _CostFlowNet:
    """Explicit vertex-split network with unit vertex capacities.

    Nodes: v_in = 2v, v_out = 2v + 1, super-source 2n, super-sink 2n + 1.
    Tournament arcs cost 1 and are effectively uncapacitated, so minimizing
    arc cost minimizes total edges, equivalently total vertices for a fixed
    number of paths; structural arcs (splits, endpoints) cost 0 and have
    capacity 1, so infeasibility cuts map back to vertices.
    """

    def __init__(self, n_nodes: int):
        self.n_nodes = n_nodes
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []

    def add_arc(self, u: int, v: int, cap: int, cost: int) -> int:
        aid = len(self.to)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.adj[u].append(aid)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        self.adj[v].append(aid + 1)
        return aid

    def tail(self, aid: int) -> int:
        return self.to[aid ^ 1]


def min_cost_disjoint_system(
    T: Tournament,
    sources: Iterable[int],
    sinks: Iterable[int],
    special: Optional[int] = None,
    forbidden: Iterable[int] = (),
    count: Optional[int] = None,
) -> PathSystem:
    """Exactly ``count`` vertex-disjoint paths from sources to sinks (plus the
    optional special sink), avoiding ``forbidden``, with minimum total vertex
    usage.

    Endpoint vertices are used at most once each; when
    count == len(sinks) + 1 and a special sink is given, every sink is
    covered.  Raises :class:`InfeasibleSystemError` carrying a separator of
    size below ``count`` when no such system exists.
    """
    src = sorted(set(sources))
    snk = sorted(set(sinks))
    forbid = frozenset(forbidden)
    if count is None:
        count = len(src)
    if count < 1:
        raise ValueError("count must be >= 1")
    if len(src) < count:
        raise ValueError("fewer sources than requested paths")
    for v in src + snk + ([special] if special is not None else []) + sorted(forbid):
        T._check_vertex(v)
    sink_all = set(snk) | ({special} if special is not None else set())
    if set(src) & sink_all:
        raise ValueError("sources must be disjoint from sinks and the special sink")
    if special is not None and special in snk:
        raise ValueError("special sink must not repeat a sink")
    if forbid & (set(src) | sink_all):
        raise ValueError("forbidden vertices overlap endpoints")
    if count > len(snk) + (1 if special is not None else 0):
        raise ValueError("more paths requested than available sink endpoints")

    n = T.n
    allowed = T.full_mask & ~mask_of(forbid)
    net = _CostFlowNet(2 * n + 2)
    ss, tt = 2 * n, 2 * n + 1
    big = count + 1
    for v in range(n):
        if (allowed >> v) & 1:
            net.add_arc(2 * v, 2 * v + 1, 1, 0)
    for u in range(n):
        if not (allowed >> u) & 1:
            continue
        for w in bits_of(T.out_masks[u] & allowed):
            net.add_arc(2 * u + 1, 2 * w, big, 1)
    for s in src:
        net.add_arc(ss, 2 * s, 1, 0)
    for y in snk:
        net.add_arc(2 * y + 1, tt, 1, 0)
    if special is not None:
        net.add_arc(2 * special + 1, tt, 1, 0)

    sent = _ssp(net, ss, tt, count)
    if sent < count:
        separator = _separator_from_residual(net, ss, n)
        raise InfeasibleSystemError(
            f"only {sent} of {count} disjoint paths exist", separator
        )
    paths = _decompose(net, ss, tt, n)
    system = PathSystem(
        paths=tuple(sorted(paths, key=lambda p: p[0])),
        sources=frozenset(src),
        sinks=frozenset(snk),
        special_sink=special,
    )
    issues = audit_path_system(T, system, forbidden=forbid)
    if issues:
        raise AssertionError(f"internal: invalid flow decomposition: {issues}")
    return system


def _ssp(net: _CostFlowNet, s: int, t: int, units: int) -> int:
    n_nodes = net.n_nodes
    pot = [0] * n_nodes
    sent = 0
    while sent < units:
        dist = [_INF] * n_nodes
        par = [-1] * n_nodes
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            base = d + pot[u]
            for aid in net.adj[u]:
                if net.cap[aid] <= 0:
                    continue
                v = net.to[aid]
                nd = base + net.cost[aid] - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    par[v] = aid
                    heapq.heappush(heap, (nd, v))
        if dist[t] == _INF:
            return sent
        for i in range(n_nodes):
            if dist[i] < _INF:
                pot[i] += dist[i]
        v = t
        while v != s:
            aid = par[v]
            net.cap[aid] -= 1
            net.cap[aid ^ 1] += 1
            v = net.tail(aid)
        sent += 1
    return sent


def _separator_from_residual(net: _CostFlowNet, s: int, n: int) -> frozenset[int]:
    reach = [False] * net.n_nodes
    reach[s] = True
    stack = [s]
    while stack:
        u = stack.pop()
        for aid in net.adj[u]:
            v = net.to[aid]
            if net.cap[aid] > 0 and not reach[v]:
                reach[v] = True
                stack.append(v)
    sep: set[int] = set()
    for u in range(net.n_nodes):
        if not reach[u]:
            continue
        for aid in net.adj[u]:
            if aid & 1 or net.cap[aid] > 0:
                continue
            v = net.to[aid]
            if reach[v]:
                continue
            if u == s:
                sep.add(net.to[aid] // 2)
            elif v == net.n_nodes - 1:
                sep.add(u // 2)
            elif v == u + 1 and u % 2 == 0:
                sep.add(u // 2)
    return frozenset(sep)


def _decompose(net: _CostFlowNet, ss: int, tt: int, n: int) -> list[tuple[int, ...]]:
    flow = {}
    for aid in range(0, len(net.to), 2):
        f = net.cap[aid ^ 1]
        if f > 0:
            flow[aid] = f
    paths = []
    for aid in sorted(a for a in flow if net.tail(a) == ss):
        v = net.to[aid] // 2
        path = [v]
        node = 2 * v + 1
        while True:
            nxt = None
            for a in sorted(net.adj[node]):
                if not (a & 1) and flow.get(a, 0) > 0:
                    nxt = a
                    break
            assert nxt is not None, "internal: broken flow decomposition"
            flow[nxt] -= 1
            if flow[nxt] == 0:
                del flow[nxt]
            target = net.to[nxt]
            if target == tt:
                break
            w = target // 2
            path.append(w)
            node = 2 * w + 1
        paths.append(tuple(path))
    return paths


def audit_path_system(
    T: Tournament, system: PathSystem, forbidden: Iterable[int] = ()
) -> list[str]:
    """All violations of the path-system contract (empty list when clean)."""
    issues = []
    forbid = frozenset(forbidden)
    seen: set[int] = set()
    endpoints: set[int] = set()
    sink_all = set(system.sinks) | (
        {system.special_sink} if system.special_sink is not None else set()
    )
    for idx, p in enumerate(system.paths):
        if len(p) == 0:
            issues.append(f"path {idx} is empty")
            continue
        if len(p) > 1 and not T.is_path(p):
            issues.append(f"path {idx} is not a directed path: {p}")
        if set(p) & seen:
            issues.append(f"path {idx} shares vertices with an earlier path")
        seen.update(p)
        if p[0] not in system.sources:
            issues.append(f"path {idx} starts outside the sources: {p[0]}")
        if p[-1] not in sink_all:
            issues.append(f"path {idx} ends outside the sinks: {p[-1]}")
        if p[0] in endpoints or p[-1] in endpoints:
            issues.append(f"path {idx} repeats an endpoint")
        endpoints.add(p[0])
        endpoints.add(p[-1])
        if set(p) & forbid:
            issues.append(f"path {idx} touches a forbidden vertex")
    return issues
