"""Degree-balanced vertex subsets and multi-order monotone chains.

Two standalone primitives: extraction of a subset whose out/in-degree ratio
is bounded on a consistent side (with a windowed variant pinning in-degrees
to a short interval), and repeated longest-monotone-subsequence extraction
that yields a subset simultaneously monotone under several total orders.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import StructuredFailure
from .tournament import Tournament

OUT_DOMINANT = "out-dominant"
IN_DOMINANT = "in-dominant"

INCREASING = "increasing"
DECREASING = "decreasing"


@dataclass(frozen=True)
class NearlyRegularWitness:
    """Vertices whose larger degree side is within ``ratio`` of the smaller.

    ``side`` records which side dominates for every member.  The windowed
    variant additionally pins every in-degree to [center_m - 10t, center_m + 10t].
    """

    members: frozenset[int]
    side: str
    ratio: int
    small_instance: bool = False
    center_m: Optional[int] = None
    window_halfwidth: Optional[int] = None


@dataclass(frozen=True)
class ChainWitness:
    """Ordered subset monotone under every input ordering.

    ``directions[i]`` says whether the reported order is increasing or
    decreasing under ordering i; the first ordering is always increasing.
    """

    items: tuple
    directions: tuple[str, ...]


def _qualifying_sides(T: Tournament, ratio: int):
    out_side = []
    in_side = []
    for v in range(T.n):
        dout = T.out_degree(v)
        din = T.n - 1 - dout
        if din <= dout <= ratio * din:
            out_side.append(v)
        if dout <= din <= ratio * dout:
            in_side.append(v)
    return out_side, in_side


def nearly_regular_subset(T: Tournament, ratio: int = 4) -> NearlyRegularWitness:
    """Subset of size at least n/10 with a one-sided bounded degree ratio.

    Collects the vertices whose out/in ratio (either way) lies in [1, ratio],
    splits them by dominant side and returns the larger side; when both sides
    hold at least n/5 vertices the out-dominant side wins.  Instances with
    fewer than 10 vertices are flagged rather than rejected (they can have
    no qualifying vertices at all).
    """
    out_side, in_side = _qualifying_sides(T, ratio)
    n = T.n
    if 5 * len(out_side) >= n and 5 * len(in_side) >= n:
        members, side = out_side, OUT_DOMINANT
    elif len(out_side) >= len(in_side):
        members, side = out_side, OUT_DOMINANT
    else:
        members, side = in_side, IN_DOMINANT
    return NearlyRegularWitness(
        members=frozenset(members),
        side=side,
        ratio=ratio,
        small_instance=n < 10,
    )


def nearly_regular_window_subset(T: Tournament, t: int, ratio: int = 4) -> NearlyRegularWitness:
    """Exactly t nearly-regular vertices with in-degrees in a 20t-wide window.

    Buckets the nearly-regular subset by in-degree into consecutive
    half-open intervals of width 10t (first fullest bucket wins) and returns
    its first t members by id, with the window center taken as the midpoint
    of the selected members' in-degrees.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if t > T.n:
        raise ValueError(f"t={t} exceeds the number of vertices {T.n}")
    base = nearly_regular_subset(T, ratio)
    width = 10 * t
    buckets: dict[int, list[int]] = {}
    for v in sorted(base.members):
        din = T.in_degree(v)
        idx = (din - 1) // width if din >= 1 else 0
        buckets.setdefault(idx, []).append(v)
    if not buckets:
        raise StructuredFailure(
            "window-subset", "no nearly-regular vertices to bucket", {"n": T.n, "t": t}
        )
    best_idx = max(sorted(buckets), key=lambda i: len(buckets[i]))
    best_idx = min(i for i in buckets if len(buckets[i]) == len(buckets[best_idx]))
    chosen = buckets[best_idx][:t]
    if len(chosen) < t:
        raise StructuredFailure(
            "window-subset",
            f"fullest in-degree bucket holds {len(chosen)} < t={t} vertices",
            {"bucket": best_idx, "have": len(chosen), "want": t},
        )
    degs = [T.in_degree(v) for v in chosen]
    center = (min(degs) + max(degs)) // 2
    return NearlyRegularWitness(
        members=frozenset(chosen),
        side=base.side,
        ratio=ratio,
        small_instance=base.small_instance,
        center_m=center,
        window_halfwidth=width,
    )


def _longest_monotone(ranks: Sequence[int], decreasing: bool) -> list[int]:
    """Indices of a longest strictly monotone subsequence (patience piles)."""
    keys = [-r for r in ranks] if decreasing else list(ranks)
    tails: list[int] = []  # key of the smallest tail per pile
    tail_idx: list[int] = []
    back: list[int] = [-1] * len(keys)
    for i, key in enumerate(keys):
        pos = bisect_left(tails, key)
        if pos > 0:
            back[i] = tail_idx[pos - 1]
        if pos == len(tails):
            tails.append(key)
            tail_idx.append(i)
        else:
            tails[pos] = key
            tail_idx[pos] = i
    out: list[int] = []
    cur = tail_idx[-1] if tail_idx else -1
    while cur >= 0:
        out.append(cur)
        cur = back[cur]
    out.reverse()
    return out


def multi_order_monotone_subset(items: Sequence, orderings: Sequence[Sequence]) -> ChainWitness:
    """Subset of size >= |items|^(1/2^(l-1)) monotone under all l orders.

    Sorts by the first ordering, then for each subsequent ordering keeps the
    longer of the longest increasing and longest decreasing subsequence
    (ties go to increasing).  Each ordering must be a duplicate-free sequence
    covering every item; rank is position.
    """
    items = list(items)
    if len(set(items)) != len(items):
        raise ValueError("items must be distinct")
    if len(orderings) < 1:
        raise ValueError("at least one ordering is required")
    rank_maps = []
    for i, ordering in enumerate(orderings):
        seq = list(ordering)
        if len(set(seq)) != len(seq):
            raise ValueError(f"ordering {i} contains duplicates")
        ranks = {item: pos for pos, item in enumerate(seq)}
        missing = [item for item in items if item not in ranks]
        if missing:
            raise ValueError(f"ordering {i} is not total over the items: missing {missing[0]!r}")
        rank_maps.append(ranks)

    current = sorted(items, key=lambda it: rank_maps[0][it])
    directions = [INCREASING]
    for ranks in rank_maps[1:]:
        seq_ranks = [ranks[it] for it in current]
        inc = _longest_monotone(seq_ranks, decreasing=False)
        dec = _longest_monotone(seq_ranks, decreasing=True)
        if len(inc) >= len(dec):
            keep, direction = inc, INCREASING
        else:
            keep, direction = dec, DECREASING
        current = [current[i] for i in keep]
        directions.append(direction)
    return ChainWitness(items=tuple(current), directions=tuple(directions))


def audit_nearly_regular(T: Tournament, witness: NearlyRegularWitness) -> list[str]:
    """Degree-ratio (and window) violations for a witness; empty when clean."""
    issues = []
    for v in sorted(witness.members):
        dout = T.out_degree(v)
        din = T.n - 1 - dout
        if witness.side == OUT_DOMINANT:
            if not (din <= dout <= witness.ratio * din):
                issues.append(f"vertex {v} breaks the out-dominant ratio: ({dout}, {din})")
        else:
            if not (dout <= din <= witness.ratio * dout):
                issues.append(f"vertex {v} breaks the in-dominant ratio: ({dout}, {din})")
        if witness.center_m is not None:
            lo = witness.center_m - witness.window_halfwidth
            hi = witness.center_m + witness.window_halfwidth
            if not (lo <= din <= hi):
                issues.append(f"vertex {v} in-degree {din} outside window [{lo}, {hi}]")
    return issues


def audit_chain(witness: ChainWitness, orderings: Sequence[Sequence]) -> list[str]:
    issues = []
    for i, ordering in enumerate(orderings):
        ranks = {item: pos for pos, item in enumerate(ordering)}
        seq = [ranks[it] for it in witness.items]
        direction = witness.directions[i]
        ok = all(
            (a < b) if direction == INCREASING else (a > b) for a, b in zip(seq, seq[1:])
        )
        if not ok:
            issues.append(f"chain is not {direction} under ordering {i}")
    if witness.directions and witness.directions[0] != INCREASING:
        issues.append("first ordering must be increasing")
    return issues
