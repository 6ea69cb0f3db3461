"""Tournament representation and elementary queries.

A tournament on n vertices orients every pair {u, v} in exactly one
direction.  Vertices are dense integer ids 0..n-1 and adjacency is stored
as one out-neighborhood bitmask per vertex, which keeps neighborhood
algebra (intersections, reachability sweeps) cheap at desk scale.
Instances are immutable after construction; every query is a pure read.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .errors import MalformedTournamentError
from .rng import DeterministicRng


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


class InducedTournament(NamedTuple):
    tournament: "Tournament"
    to_sub: dict  # host id -> induced id
    to_host: tuple  # induced id -> host id


class Tournament:
    """Immutable tournament on vertices 0..n-1."""

    __slots__ = ("n", "out_masks", "full_mask")

    def __init__(self, n: int, out_masks: Sequence[int]):
        if n < 1:
            raise MalformedTournamentError("tournament needs at least one vertex")
        if len(out_masks) != n:
            raise MalformedTournamentError("out_masks length does not match n")
        self.n = n
        self.out_masks = tuple(out_masks)
        self.full_mask = (1 << n) - 1
        self._validate()

    def _validate(self) -> None:
        # Cheap structural checks only; constructors that accept raw input
        # (from_matrix, from_text) perform the full pairwise validation.
        full = self.full_mask
        for u, mask in enumerate(self.out_masks):
            if mask & ~full:
                raise MalformedTournamentError(f"vertex {u} has out-neighbors out of range")
            if (mask >> u) & 1:
                raise MalformedTournamentError(f"self-loop at vertex {u}")

    def check_consistent(self) -> None:
        """Full pairwise audit: exactly one orientation per pair."""
        for u in range(self.n):
            for v in range(u + 1, self.n):
                a = (self.out_masks[u] >> v) & 1
                b = (self.out_masks[v] >> u) & 1
                if a and b:
                    raise MalformedTournamentError(
                        f"pair ({u}, {v}) is oriented in both directions"
                    )
                if not a and not b:
                    raise MalformedTournamentError(f"pair ({u}, {v}) has no orientation")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_matrix(cls, n: int, rows: Sequence[Sequence]) -> "Tournament":
        """Build from an n x n orientation table.

        Entry rows[u][v] must be 1 (edge u->v), 0 (edge v->u) or None on
        the diagonal.  Symmetric entries, self-loops and missing
        orientations are rejected with the offending pair named.
        """
        if len(rows) != n or any(len(r) != n for r in rows):
            raise MalformedTournamentError("orientation table is not n x n")
        masks = [0] * n
        for u in range(n):
            if rows[u][u] is not None:
                raise MalformedTournamentError(f"self-loop at vertex {u}")
            for v in range(u + 1, n):
                a, b = rows[u][v], rows[v][u]
                if a is None or b is None:
                    raise MalformedTournamentError(f"pair ({u}, {v}) is missing an orientation")
                if a == b:
                    kind = "oriented in both directions" if a else "has no orientation"
                    raise MalformedTournamentError(f"pair ({u}, {v}) {kind}")
                if a:
                    masks[u] |= 1 << v
                else:
                    masks[v] |= 1 << u
        return cls(n, masks)

    @classmethod
    def random(cls, n: int, seed: int) -> "Tournament":
        """Seeded random tournament: one fair coin per unordered pair.

        Pairs are consumed in row-major order ((0,1), (0,2), ..., (1,2), ...)
        from the splitmix64/v1 bit stream; bit 1 orients u->v for u < v.
        Same (n, seed) always yields the identical orientation table.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = DeterministicRng(seed)
        masks = [0] * n
        for u in range(n):
            need = n - u - 1
            if need <= 0:
                continue
            row = rng.bits(need)
            masks[u] |= (row << (u + 1))
            back = ~row & ((1 << need) - 1)
            for j in _iter_bits(back):
                masks[u + 1 + j] |= 1 << u
        return cls(n, masks)

    @classmethod
    def from_text(cls, text: str) -> "Tournament":
        """Parse the bit-exact text format (see ``to_text``).

        Errors name the offending line and column (1-based).
        """
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines = lines[:-1]
        if not lines:
            raise MalformedTournamentError("line 1: empty input")
        try:
            n = int(lines[0])
        except ValueError:
            raise MalformedTournamentError("line 1: expected decimal vertex count") from None
        if n < 1:
            raise MalformedTournamentError("line 1: vertex count must be >= 1")
        if len(lines) != n + 1:
            raise MalformedTournamentError(
                f"line {len(lines) + 1}: expected {n} rows after the header, got {len(lines) - 1}"
            )
        rows: list[list] = []
        for u in range(n):
            line = lines[u + 1]
            if len(line) != n:
                raise MalformedTournamentError(
                    f"line {u + 2}: expected {n} characters, got {len(line)}"
                )
            row: list = []
            for v, ch in enumerate(line):
                if ch == "1":
                    row.append(1)
                elif ch == "0":
                    row.append(0)
                elif ch == "-":
                    row.append(None)
                else:
                    raise MalformedTournamentError(
                        f"line {u + 2}, column {v + 1}: invalid character {ch!r}"
                    )
            rows.append(row)
        try:
            return cls.from_matrix(n, rows)
        except MalformedTournamentError as exc:
            raise MalformedTournamentError(f"orientation error: {exc}") from None

    # -- serialization --------------------------------------------------

    def to_text(self) -> str:
        """Bit-exact text format: header line with n, then n rows over
        '1'/'0'/'-' ('1' iff u->v, '-' on the diagonal), each row ended by
        a single linefeed, no trailing whitespace."""
        out = [str(self.n)]
        for u in range(self.n):
            mask = self.out_masks[u]
            row = "".join(
                "-" if v == u else ("1" if (mask >> v) & 1 else "0") for v in range(self.n)
            )
            out.append(row)
        return "\n".join(out) + "\n"

    # -- queries --------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return bool((self.out_masks[u] >> v) & 1)

    def in_mask(self, v: int) -> int:
        self._check_vertex(v)
        return self.full_mask & ~self.out_masks[v] & ~(1 << v)

    def out_degree(self, v: int) -> int:
        self._check_vertex(v)
        return popcount(self.out_masks[v])

    def in_degree(self, v: int) -> int:
        return popcount(self.in_mask(v))

    def degrees(self) -> list[tuple[int, int]]:
        """Per-vertex (out-degree, in-degree); sums to n-1 everywhere."""
        return [(self.out_degree(v), self.in_degree(v)) for v in range(self.n)]

    def out_neighbors(self, v: int) -> frozenset[int]:
        self._check_vertex(v)
        return frozenset(_iter_bits(self.out_masks[v]))

    def in_neighbors(self, v: int) -> frozenset[int]:
        return frozenset(_iter_bits(self.in_mask(v)))

    def induced(self, members: Iterable[int]) -> InducedTournament:
        """Subtournament on ``members`` plus the bidirectional id map."""
        hosts = sorted(set(members))
        if not hosts:
            raise ValueError("induced subtournament needs a nonempty vertex set")
        if hosts[0] < 0 or hosts[-1] >= self.n:
            raise ValueError(f"vertex {hosts[0] if hosts[0] < 0 else hosts[-1]} out of range")
        to_sub = {h: i for i, h in enumerate(hosts)}
        host_mask = mask_of(hosts)
        masks = [0] * len(hosts)
        for i, h in enumerate(hosts):
            sub = self.out_masks[h] & host_mask
            mm = 0
            while sub:
                low = sub & -sub
                mm |= 1 << to_sub[low.bit_length() - 1]
                sub ^= low
            masks[i] = mm
        return InducedTournament(Tournament(len(hosts), masks), to_sub, tuple(hosts))

    def is_path(self, vertices: Sequence[int]) -> bool:
        """True iff the sequence is a directed path of distinct vertices."""
        if len(vertices) == 0:
            return False
        if len(set(vertices)) != len(vertices):
            return False
        if any(v < 0 or v >= self.n for v in vertices):
            return False
        return all(self.has_edge(a, b) for a, b in zip(vertices, vertices[1:]))

    def reach_mask(self, sources: int, allowed: int) -> int:
        """Vertices reachable from the source mask inside ``allowed``
        (sources outside ``allowed`` are ignored)."""
        seen = sources & allowed
        frontier = seen
        masks = self.out_masks
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= masks[low.bit_length() - 1]
                m ^= low
            frontier = nxt & allowed & ~seen
            seen |= frontier
        return seen

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise ValueError(f"vertex {v} out of range [0, {self.n})")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Tournament)
            and self.n == other.n
            and self.out_masks == other.out_masks
        )

    def __hash__(self) -> int:
        return hash((self.n, self.out_masks))

    def __repr__(self) -> str:
        return f"Tournament(n={self.n})"


def random_tournament(n: int, seed: int) -> Tournament:
    """Alias for :meth:`Tournament.random`."""
    return Tournament.random(n, seed)


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def bits_of(mask: int) -> list[int]:
    return list(_iter_bits(mask))
