"""Greedy subdivision embedding, obstruction-driven partitioning, and the
recursive construction of a classified disjoint-set family.

A subdivision here is a complete pattern on a branch set: one connecting
path of length at most 3 per ordered branch pair, with pairwise disjoint
interiors.  When the greedy embedding fails it fails for a reason that can
be exported as an Obstruction: a pair (x, y) whose common out/in
neighborhood is exhausted and whose residual neighborhoods are fully
dominated one way.  That obstruction in turn induces a partition of the
ambient blocks with one-way domination between the halves, which drives the
recursion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .chains import nearly_regular_window_subset
from .errors import StructuredFailure
from .tournament import Tournament, bits_of, mask_of

SUBDIVISION = "subdivision"
NON_SUBDIVISION = "non-subdivision"


@dataclass
class Subdivision:
    """Branch set plus a connecting path (length <= 3) per ordered pair.

    Connector interiors are pairwise disjoint and avoid the branch set;
    each connector has at most 2 interior vertices.
    """

    branch: tuple[int, ...]
    connectors: dict[tuple[int, int], tuple[int, ...]]

    def interiors(self) -> set[int]:
        out: set[int] = set()
        for path in self.connectors.values():
            out.update(path[1:-1])
        return out

    def translate(self, mapping: Mapping[int, int]) -> "Subdivision":
        return Subdivision(
            branch=tuple(sorted(mapping[v] for v in self.branch)),
            connectors={
                (mapping[a], mapping[b]): tuple(mapping[v] for v in path)
                for (a, b), path in self.connectors.items()
            },
        )


@dataclass
class Obstruction:
    """Why the greedy embedding stalled at the ordered pair (x, y).

    ``used`` holds the connector interiors consumed before the failure;
    the residual sets exclude used, branch and forbidden vertices.  Every
    edge between y_set and x_set runs from y_set to x_set.
    """

    x: int
    y: int
    used: frozenset[int]
    branch: frozenset[int]
    forbidden: frozenset[int]
    x_set: frozenset[int]
    y_set: frozenset[int]


@dataclass(frozen=True)
class PartitionResult:
    side_i: tuple[int, ...]
    side_j: tuple[int, ...]
    pruned: dict


@dataclass(frozen=True)
class FamilyConfig:
    """Size knobs for the family builder.

    Desk-scale defaults; ``paper_w_size`` documents the bound under which
    the construction is unconditional (far beyond desk scale).
    """

    ell: Optional[int] = None
    w_size: Optional[int] = None
    ns_size: Optional[int] = None
    ratio: int = 4

    def resolved_ell(self, k: int) -> int:
        return self.ell if self.ell is not None else max(2 * k + 4, 8)

    def resolved_w_size(self, k: int) -> int:
        if self.w_size is not None:
            return self.w_size
        ell = self.resolved_ell(k)
        return max(4 * ell * ell, 64)

    def resolved_ns_size(self, k: int) -> int:
        return self.ns_size if self.ns_size is not None else 12 * k * k

    @staticmethod
    def paper_w_size(k: int, ell: int) -> int:
        return 12 * k**22 * ell**2


@dataclass
class GoodFamily:
    """Pairwise disjoint classified sets.

    Non-subdivision sets have exactly ``ns_size`` vertices and pairwise
    one-way full domination; each subdivision-labeled set equals the branch
    set of its recorded subdivision, and recorded subdivisions are pairwise
    vertex disjoint.
    """

    sets: dict = field(default_factory=dict)  # index -> frozenset[int]
    subdivisions: dict = field(default_factory=dict)  # index -> Subdivision
    orientation: dict = field(default_factory=dict)  # (min, max) -> (src, dst)
    ns_size: int = 0
    ell: int = 0

    def label(self, idx: int) -> str:
        return SUBDIVISION if idx in self.subdivisions else NON_SUBDIVISION

    def subdivision_indices(self) -> list[int]:
        return sorted(self.subdivisions)

    def non_subdivision_indices(self) -> list[int]:
        return sorted(i for i in self.sets if i not in self.subdivisions)

    def dominates(self, i: int, j: int) -> bool:
        key = (min(i, j), max(i, j))
        return self.orientation.get(key) == (i, j)

    def translate(self, mapping: Mapping[int, int]) -> "GoodFamily":
        return GoodFamily(
            sets={i: frozenset(mapping[v] for v in s) for i, s in self.sets.items()},
            subdivisions={i: sd.translate(mapping) for i, sd in self.subdivisions.items()},
            orientation=dict(self.orientation),
            ns_size=self.ns_size,
            ell=self.ell,
        )

    def to_json_dict(self) -> dict:
        return {
            "ns_size": self.ns_size,
            "ell": self.ell,
            "sets": {str(i): sorted(s) for i, s in self.sets.items()},
            "labels": {str(i): self.label(i) for i in self.sets},
            "subdivisions": {
                str(i): {
                    "branch": list(sd.branch),
                    "connectors": [
                        {"pair": list(pair), "path": list(path)}
                        for pair, path in sorted(sd.connectors.items())
                    ],
                }
                for i, sd in self.subdivisions.items()
            },
            "orientation": [
                {"pair": list(key), "direction": list(val)}
                for key, val in sorted(self.orientation.items())
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Greedy embedding
# ---------------------------------------------------------------------------


def greedy_embed_t2(T: Tournament, branch, forbidden=frozenset()):
    """Embed a complete pattern with branch set ``branch`` or explain why not.

    Ordered pairs are processed in fixed lexicographic order; each pair takes
    the first available of a direct edge, a length-2 path through an unused
    common neighbor (lowest id), or a length-3 path through the
    lexicographically smallest unused pair (w1, w2) with w1 -> w2.  Interiors
    avoid the branch set, ``forbidden``, and previously used vertices.
    Returns a :class:`Subdivision` on success and an :class:`Obstruction`
    at the first stuck pair otherwise.
    """
    branch = tuple(sorted(set(branch)))
    forbidden = frozenset(forbidden)
    if len(branch) < 2:
        raise ValueError("branch set needs at least two vertices")
    if set(branch) & forbidden:
        raise ValueError("branch set overlaps forbidden vertices")
    branch_mask = mask_of(branch)
    blocked = branch_mask | mask_of(forbidden)
    used_mask = 0
    connectors: dict[tuple[int, int], tuple[int, ...]] = {}
    for a in branch:
        for b in branch:
            if a == b:
                continue
            if T.has_edge(a, b):
                connectors[(a, b)] = (a, b)
                continue
            avail = T.full_mask & ~blocked & ~used_mask
            common = T.out_masks[a] & T.in_mask(b) & avail
            if common:
                w = (common & -common).bit_length() - 1
                connectors[(a, b)] = (a, w, b)
                used_mask |= 1 << w
                continue
            x_avail = T.out_masks[a] & avail
            y_avail = T.in_mask(b) & avail
            found = None
            for w1 in bits_of(x_avail):
                targets = T.out_masks[w1] & y_avail & ~(1 << w1)
                if targets:
                    w2 = (targets & -targets).bit_length() - 1
                    found = (w1, w2)
                    break
            if found is not None:
                w1, w2 = found
                connectors[(a, b)] = (a, w1, w2, b)
                used_mask |= (1 << w1) | (1 << w2)
                continue
            used = frozenset(bits_of(used_mask))
            return Obstruction(
                x=a,
                y=b,
                used=used,
                branch=frozenset(branch),
                forbidden=forbidden,
                x_set=frozenset(bits_of(T.out_masks[a] & avail)),
                y_set=frozenset(bits_of(T.in_mask(b) & avail)),
            )
    return Subdivision(branch=branch, connectors=connectors)


def audit_subdivision(T: Tournament, sd: Subdivision, forbidden=frozenset()) -> list[str]:
    issues = []
    branch = set(sd.branch)
    pairs_needed = {(a, b) for a in branch for b in branch if a != b}
    if set(sd.connectors) != pairs_needed:
        issues.append("connector map does not cover every ordered branch pair")
    seen_interiors: set[int] = set()
    for (a, b), path in sorted(sd.connectors.items()):
        if path[0] != a or path[-1] != b:
            issues.append(f"connector ({a}, {b}) has wrong endpoints")
        if len(path) > 4:
            issues.append(f"connector ({a}, {b}) longer than 3 edges")
        if not T.is_path(path):
            issues.append(f"connector ({a}, {b}) is not a directed path")
        interior = set(path[1:-1])
        if interior & branch:
            issues.append(f"connector ({a}, {b}) passes through the branch set")
        if interior & seen_interiors:
            issues.append(f"connector ({a}, {b}) shares interior vertices")
        if interior & set(forbidden):
            issues.append(f"connector ({a}, {b}) uses a forbidden vertex")
        seen_interiors |= interior
    return issues


def audit_obstruction(T: Tournament, obs: Obstruction) -> list[str]:
    issues = []
    if T.has_edge(obs.x, obs.y):
        issues.append("stuck pair has a direct edge")
    excluded = obs.used | obs.branch | obs.forbidden | {obs.x, obs.y}
    avail = T.full_mask & ~mask_of(excluded)
    common = T.out_masks[obs.x] & T.in_mask(obs.y) & avail
    if common:
        issues.append("common neighborhood is not exhausted")
    if obs.x_set != frozenset(bits_of(T.out_masks[obs.x] & avail)):
        issues.append("x_set mismatch")
    if obs.y_set != frozenset(bits_of(T.in_mask(obs.y) & avail)):
        issues.append("y_set mismatch")
    y_mask = mask_of(obs.y_set)
    for v in sorted(obs.x_set):
        if T.out_masks[v] & y_mask:
            issues.append(f"edge from x_set vertex {v} into y_set")
            break
    ell = len(obs.branch)
    if len(obs.used) > ell * (ell - 1):
        issues.append("too many interior vertices consumed")
    return issues


# ---------------------------------------------------------------------------
# Obstruction-driven partition
# ---------------------------------------------------------------------------


def partition_by_obstruction(T: Tournament, blocks: Mapping[int, frozenset], obstruction: Obstruction) -> PartitionResult:
    """Split block indices into two sides with one-way domination.

    A block goes to side I when at least a tenth of it lies in the
    obstruction's y_set (side J symmetrically via x_set); blocks qualifying
    for both are distributed to keep the sides as equal as possible.  The
    pruned blocks satisfy pruned_I -> pruned_J edge-by-edge.
    """
    issues = audit_obstruction(T, obstruction)
    if issues:
        raise ValueError(f"invalid obstruction: {issues[0]}")
    indices = sorted(blocks)
    all_blocks = [frozenset(blocks[i]) for i in indices]
    for a in range(len(all_blocks)):
        for b in range(a + 1, len(all_blocks)):
            if all_blocks[a] & all_blocks[b]:
                raise ValueError("blocks are not pairwise disjoint")
    y_set = obstruction.y_set
    x_set = obstruction.x_set
    side_i: list[int] = []
    side_j: list[int] = []
    flexible: list[int] = []
    for idx in indices:
        block = blocks[idx]
        wy = len(block & y_set)
        wx = len(block & x_set)
        y_ok = 10 * wy >= len(block)
        x_ok = 10 * wx >= len(block)
        if y_ok and x_ok:
            flexible.append(idx)
        elif y_ok:
            side_i.append(idx)
        elif x_ok:
            side_j.append(idx)
        else:
            raise StructuredFailure(
                "partition",
                f"block {idx} misses the tenth-size floor on both sides",
                {"block": idx, "y_part": wy, "x_part": wx, "size": len(block)},
            )
    for idx in flexible:
        if len(side_i) <= len(side_j):
            side_i.append(idx)
        else:
            side_j.append(idx)
    if not side_i or not side_j:
        raise StructuredFailure(
            "partition",
            "all blocks fall on one side of the obstruction",
            {"side_i": len(side_i), "side_j": len(side_j)},
        )
    pruned = {}
    for idx in side_i:
        pruned[idx] = frozenset(blocks[idx] & y_set)
    for idx in side_j:
        pruned[idx] = frozenset(blocks[idx] & x_set)
    return PartitionResult(
        side_i=tuple(sorted(side_i)), side_j=tuple(sorted(side_j)), pruned=pruned
    )


# ---------------------------------------------------------------------------
# Recursive family builder
# ---------------------------------------------------------------------------


def build_good_family(T: Tournament, blocks: Sequence, cfg: FamilyConfig = FamilyConfig()) -> GoodFamily:
    """Recursive construction of the classified family.

    Each level takes a degree-windowed nearly-regular subset of the current
    union, pigeonholes a branch candidate inside one block, and either embeds
    a subdivision (removing its interiors and recursing on the remaining
    blocks) or partitions the blocks along the obstruction and recurses on
    both sides.  Any size shortfall surfaces as a StructuredFailure, never a
    corrupt family.
    """
    k = len(blocks)
    if k < 1:
        raise ValueError("at least one block is required")
    ell = cfg.resolved_ell(k)
    w_floor = cfg.resolved_w_size(k)
    ns_size = cfg.resolved_ns_size(k)
    norm: dict[int, frozenset] = {}
    union: set[int] = set()
    for i, block in enumerate(blocks):
        s = frozenset(block)
        if len(s) < w_floor:
            raise StructuredFailure(
                "family-precondition",
                f"block {i} has {len(s)} < w_size={w_floor} vertices",
                {"block": i, "size": len(s), "w_size": w_floor},
            )
        if s & union:
            raise ValueError("blocks are not pairwise disjoint")
        union |= s
        norm[i] = frozenset(sorted(s)[:w_floor])

    sets: dict[int, frozenset] = {}
    subdivisions: dict[int, Subdivision] = {}
    orientation: dict[tuple[int, int], tuple[int, int]] = {}

    def recurse(cur: dict) -> None:
        if len(cur) == 1:
            ((idx, block),) = cur.items()
            sets[idx] = block
            return
        cur_union = sorted(set().union(*cur.values()))
        k_cur = len(cur)
        t_req = k_cur * ell
        if t_req > len(cur_union):
            raise StructuredFailure(
                "family-window",
                f"need a window subset of size {t_req} from {len(cur_union)} vertices",
                {"t": t_req, "available": len(cur_union)},
            )
        sub, to_sub, to_host = T.induced(cur_union)
        witness = nearly_regular_window_subset(sub, t_req, ratio=cfg.ratio)
        regular_hosts = {to_host[v] for v in witness.members}
        counts = {idx: len(block & regular_hosts) for idx, block in cur.items()}
        best = max(counts.values())
        host_idx = min(i for i, c in counts.items() if c == best)
        candidates = sorted(cur[host_idx] & regular_hosts)
        if len(candidates) < ell:
            raise StructuredFailure(
                "family-pigeonhole",
                f"fullest block holds {len(candidates)} < ell={ell} regular vertices",
                {"block": host_idx, "have": len(candidates), "ell": ell},
            )
        branch = candidates[:ell]
        outside = frozenset(range(T.n)) - set(cur_union)
        result = greedy_embed_t2(T, branch, forbidden=outside)
        if isinstance(result, Subdivision):
            sets[host_idx] = frozenset(result.branch)
            subdivisions[host_idx] = result
            interiors = result.interiors()
            rest = {
                idx: frozenset(block - interiors)
                for idx, block in cur.items()
                if idx != host_idx
            }
            if rest:
                recurse(rest)
            return
        part = partition_by_obstruction(T, cur, result)
        for i in part.side_i:
            for j in part.side_j:
                key = (min(i, j), max(i, j))
                orientation.setdefault(key, (i, j))
        recurse({idx: part.pruned[idx] for idx in part.side_i})
        recurse({idx: part.pruned[idx] for idx in part.side_j})

    recurse(dict(norm))

    for idx in sorted(sets):
        if idx in subdivisions:
            continue
        block = sets[idx]
        if len(block) < ns_size:
            raise StructuredFailure(
                "family-ns-size",
                f"non-subdivision set {idx} has {len(block)} < ns_size={ns_size} vertices",
                {"block": idx, "size": len(block), "ns_size": ns_size},
            )
        sets[idx] = frozenset(sorted(block)[:ns_size])

    fam = GoodFamily(
        sets=sets, subdivisions=subdivisions, orientation=orientation,
        ns_size=ns_size, ell=ell,
    )
    issues = audit_good_family(T, fam)
    if issues:
        raise StructuredFailure("family-audit", issues[0], {"issues": issues})
    return fam


def audit_good_family(T: Tournament, fam: GoodFamily) -> list[str]:
    """Every classified-family invariant, checked directly against T."""
    issues = []
    indices = sorted(fam.sets)
    for a in indices:
        for b in indices:
            if a < b and fam.sets[a] & fam.sets[b]:
                issues.append(f"sets {a} and {b} overlap")
    ns = fam.non_subdivision_indices()
    for i in ns:
        if len(fam.sets[i]) != fam.ns_size:
            issues.append(f"non-subdivision set {i} has size {len(fam.sets[i])} != {fam.ns_size}")
    for ai in range(len(ns)):
        for bi in range(ai + 1, len(ns)):
            i, j = ns[ai], ns[bi]
            key = (min(i, j), max(i, j))
            direction = fam.orientation.get(key)
            if direction is None:
                issues.append(f"non-subdivision pair ({i}, {j}) has no recorded domination")
                continue
            src, dst = direction
            src_mask = mask_of(fam.sets[src])
            for v in sorted(fam.sets[dst]):
                if T.out_masks[v] & src_mask:
                    issues.append(f"domination {src}->{dst} violated at vertex {v}")
                    break
    occupied: set[int] = set()
    for i, sd in sorted(fam.subdivisions.items()):
        if fam.sets[i] != frozenset(sd.branch):
            issues.append(f"subdivision set {i} differs from its branch set")
        issues.extend(f"set {i}: {msg}" for msg in audit_subdivision(T, sd))
        body = set(sd.branch) | sd.interiors()
        if body & occupied:
            issues.append(f"subdivision {i} shares vertices with an earlier one")
        occupied |= body
    return issues
