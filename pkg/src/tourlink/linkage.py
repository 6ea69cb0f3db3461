"""Exact decision procedure for vertex-disjoint directed-paths instances.

The solver is a complete backtracking search over path assignments with
three sound prunes: residual reachability per remaining pair, fail-first
pair ordering by residual distance, and a bottleneck prune that detects two
remaining pairs forced through a common vertex.  ``unknown`` is a
first-class outcome when the node budget runs out, so downstream
certificates never overclaim.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .rng import DeterministicRng
from .tournament import Tournament, bits_of, mask_of

DEFAULT_BUDGET = 10**8

LINKED = "linked"
NOT_LINKED = "not-linked"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class LinkageInstance:
    """Ordered endpoint pairs (x_i, y_i); all 2k endpoints distinct."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, pairs) -> "LinkageInstance":
        return cls(tuple((int(x), int(y)) for x, y in pairs))

    @property
    def k(self) -> int:
        return len(self.pairs)

    def endpoints(self) -> list[int]:
        out = []
        for x, y in self.pairs:
            out.append(x)
            out.append(y)
        return out

    def validate(self, n: int) -> None:
        if self.k < 1:
            raise ValueError("instance needs at least one pair")
        eps = self.endpoints()
        if len(set(eps)) != len(eps):
            raise ValueError("endpoint vertices must be pairwise distinct")
        for v in eps:
            if not (0 <= v < n):
                raise ValueError(f"endpoint {v} out of range [0, {n})")


@dataclass(frozen=True)
class LinkageVerdict:
    status: str  # linked | not-linked | unknown
    paths: Optional[tuple[tuple[int, ...], ...]] = None
    nodes_explored: int = 0
    reason: str = ""

    @property
    def linked(self) -> Optional[bool]:
        if self.status == LINKED:
            return True
        if self.status == NOT_LINKED:
            return False
        return None


@dataclass(frozen=True)
class KLinkedReport:
    status: str  # linked | not-linked | unknown
    k: int
    witness: Optional[LinkageInstance] = None
    witness_verdict: Optional[LinkageVerdict] = None
    instances_checked: int = 0
    nodes_explored: int = 0
    reason: str = ""


def validate_path_system(T: Tournament, instance: LinkageInstance, paths) -> tuple[bool, Optional[str]]:
    """Check orientation, disjointness and endpoint correspondence.

    Returns (True, None) or (False, first violated condition).
    """
    pairs = instance.pairs
    if paths is None or len(paths) != len(pairs):
        return False, "path count does not match pair count"
    seen: set[int] = set()
    for i, (pair, p) in enumerate(zip(pairs, paths)):
        x, y = pair
        if len(p) < 1:
            return False, f"path {i} empty"
        if p[0] != x or p[-1] != y:
            return False, f"path {i} endpoints do not match pair ({x}, {y})"
        if len(set(p)) != len(p):
            return False, f"path {i} repeats a vertex"
        for a, b in zip(p, p[1:]):
            if not (0 <= a < T.n and 0 <= b < T.n) or not T.has_edge(a, b):
                return False, f"path {i} uses a non-edge ({a}, {b})"
        if seen & set(p):
            return False, f"path {i} violates disjointness"
        seen.update(p)
    return True, None


class _BudgetExceeded(Exception):
    pass


class _Searcher:
    def __init__(self, T: Tournament, instance: LinkageInstance, budget: int):
        self.T = T
        self.instance = instance
        self.budget = budget
        self.nodes = 0
        self.full = T.full_mask

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExceeded

    def _pair_allowed(self, j: int, remaining, used_mask: int) -> int:
        """Vertices pair j may use: not on committed paths, not endpoints of
        other unrouted pairs."""
        allowed = self.full & ~used_mask
        for i in remaining:
            if i != j:
                x, y = self.instance.pairs[i]
                allowed &= ~(1 << x) & ~(1 << y)
        x, y = self.instance.pairs[j]
        return allowed | (1 << x) | (1 << y)

    def _distance(self, x: int, y: int, allowed: int) -> Optional[int]:
        if not ((allowed >> x) & 1) or not ((allowed >> y) & 1):
            return None
        dist = 0
        seen = 1 << x
        frontier = seen
        masks = self.T.out_masks
        while frontier:
            if (seen >> y) & 1:
                return dist
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= masks[low.bit_length() - 1]
                m ^= low
            frontier = nxt & allowed & ~seen
            seen |= frontier
            dist += 1
        return dist if (seen >> y) & 1 else None

    def _must_use(self, x: int, y: int, allowed: int) -> int:
        """Mask of vertices lying on every x->y path inside ``allowed``."""
        T = self.T
        fwd = T.reach_mask(1 << x, allowed)
        if not (fwd >> y) & 1:
            return 0
        candidates = fwd & allowed & ~(1 << x) & ~(1 << y)
        out = 0
        for v in bits_of(candidates):
            without = allowed & ~(1 << v)
            if not (T.reach_mask(1 << x, without) >> y) & 1:
                out |= 1 << v
        return out

    def solve(self, remaining: tuple[int, ...], used_mask: int, acc: dict):
        self._tick()
        if not remaining:
            return dict(acc)
        # residual feasibility and fail-first ordering
        dists = {}
        for j in remaining:
            x, y = self.instance.pairs[j]
            allowed = self._pair_allowed(j, remaining, used_mask)
            d = self._distance(x, y, allowed)
            if d is None:
                return None
            dists[j] = d
        if len(remaining) >= 2:
            musts = {}
            for j in remaining:
                x, y = self.instance.pairs[j]
                allowed = self._pair_allowed(j, remaining, used_mask)
                musts[j] = self._must_use(x, y, allowed)
            for a, b in itertools.combinations(remaining, 2):
                if musts[a] & musts[b]:
                    return None
        pick = max(remaining, key=lambda j: (dists[j], -j))
        rest = tuple(j for j in remaining if j != pick)
        x, y = self.instance.pairs[pick]
        allowed = self._pair_allowed(pick, remaining, used_mask)
        return self._extend(pick, rest, used_mask, acc, [x], allowed & ~(1 << x))

    def _extend(self, pick, rest, used_mask, acc, partial, avail: int):
        self._tick()
        T = self.T
        u = partial[-1]
        x, y = self.instance.pairs[pick]
        if u == y:
            acc[pick] = tuple(partial)
            result = self.solve(rest, used_mask | mask_of(partial), acc)
            if result is not None:
                return result
            del acc[pick]
            return None
        # target must stay reachable from the frontier
        if not (T.reach_mask(1 << u, avail | (1 << u)) >> y) & 1:
            return None
        # committing the partial path must not strangle the other pairs
        if rest:
            blocked = used_mask | mask_of(partial)
            for j in rest:
                xj, yj = self.instance.pairs[j]
                allowed_j = self._pair_allowed(j, rest, blocked)
                if not (T.reach_mask(1 << xj, allowed_j) >> yj) & 1:
                    return None
        for v in bits_of(T.out_masks[u] & avail):
            result = self._extend(
                pick, rest, used_mask, acc, partial + [v], avail & ~(1 << v)
            )
            if result is not None:
                return result
        return None


def find_linkage_exact(
    T: Tournament, instance: LinkageInstance, budget: int = DEFAULT_BUDGET
) -> LinkageVerdict:
    """Complete backtracking decision for one linkage instance.

    ``linked`` always carries paths that pass :func:`validate_path_system`;
    ``not-linked`` means the pruned search space was exhausted; ``unknown``
    is returned only when the node budget runs out.
    """
    if isinstance(instance, (list, tuple)):
        instance = LinkageInstance.of(instance)
    instance.validate(T.n)
    searcher = _Searcher(T, instance, budget)
    try:
        result = searcher.solve(tuple(range(instance.k)), 0, {})
    except _BudgetExceeded:
        return LinkageVerdict(UNKNOWN, nodes_explored=searcher.nodes, reason="budget exhausted")
    if result is None:
        return LinkageVerdict(NOT_LINKED, nodes_explored=searcher.nodes)
    paths = tuple(result[i] for i in range(instance.k))
    ok, violation = validate_path_system(T, instance, paths)
    assert ok, f"internal: solver produced an invalid system: {violation}"
    return LinkageVerdict(LINKED, paths=paths, nodes_explored=searcher.nodes)


def _all_instances(n: int, k: int):
    vertices = range(n)
    for xs in itertools.combinations(vertices, k):
        others = [v for v in vertices if v not in xs]
        for ys in itertools.permutations(others, k):
            yield LinkageInstance.of(zip(xs, ys))


def is_k_linked(
    T: Tournament,
    k: int,
    mode: str = "exhaustive",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> KLinkedReport:
    """Quantify linkage over endpoint configurations.

    Exhaustive mode covers every configuration (x-sets as combinations,
    y-assignments as permutations of the rest); sampled mode draws ``trials``
    seeded instances.  The first unlinked instance is returned as a witness.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if T.n < 2 * k:
        return KLinkedReport(NOT_LINKED, k, reason="too few vertices")
    if mode == "exhaustive":
        gen = _all_instances(T.n, k)
    elif mode == "sampled":
        if trials is None or seed is None:
            raise ValueError("sampled mode requires trials and seed")
        rng = DeterministicRng(seed)

        def sampled():
            for _ in range(trials):
                chosen = rng.sample(range(T.n), 2 * k)
                yield LinkageInstance.of(zip(chosen[:k], chosen[k:]))

        gen = sampled()
    else:
        raise ValueError(f"unknown mode {mode!r}")

    total_nodes = 0
    checked = 0
    saw_unknown = False
    for inst in gen:
        verdict = find_linkage_exact(T, inst, budget=budget)
        checked += 1
        total_nodes += verdict.nodes_explored
        if verdict.status == NOT_LINKED:
            return KLinkedReport(
                NOT_LINKED, k, witness=inst, witness_verdict=verdict,
                instances_checked=checked, nodes_explored=total_nodes,
            )
        if verdict.status == UNKNOWN:
            saw_unknown = True
    if saw_unknown:
        return KLinkedReport(
            UNKNOWN, k, instances_checked=checked, nodes_explored=total_nodes,
            reason="budget exhausted on some instances",
        )
    return KLinkedReport(
        LINKED, k, instances_checked=checked, nodes_explored=total_nodes
    )
