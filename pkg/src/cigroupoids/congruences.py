"""Congruences of finite groupoids and the meet-semidistributivity test.

A congruence is stored as a block-id array: block_of[x] is the id of the
class containing x, with ids normalized so that they appear in increasing
order of least element. The congruence lattice is generated from principal
congruences, which suffices because every congruence is the join of the
principal ones it contains.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from cigroupoids.core import BoundExceeded, CayleyTable

MAX_N_CONGRUENCES = 12


class NotACongruence(Exception):
    """The relation fails to be an operation-compatible equivalence."""

    def __init__(self, reason: str, witness: tuple):
        super().__init__(f"{reason}: witness {witness}")
        self.reason = reason
        self.witness = witness


def _normalize(block_of: list[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    out = []
    for b in block_of:
        if b not in relabel:
            relabel[b] = len(relabel)
        out.append(relabel[b])
    return tuple(out)


@dataclass(frozen=True)
class PartitionCongruence:
    n: int
    block_of: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.block_of) != self.n:
            raise ValueError("block array length must equal n")
        if self.block_of != _normalize(list(self.block_of)):
            raise ValueError("block ids must be normalized by least element")

    @property
    def num_blocks(self) -> int:
        return max(self.block_of) + 1

    def blocks(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for x, b in enumerate(self.block_of):
            out[b].append(x)
        return [tuple(b) for b in out]

    def related(self, a: int, b: int) -> bool:
        return self.block_of[a] == self.block_of[b]

    def is_identity(self) -> bool:
        return self.num_blocks == self.n

    def is_full(self) -> bool:
        return self.num_blocks == 1


def identity_congruence(n: int) -> PartitionCongruence:
    return PartitionCongruence(n, tuple(range(n)))


def full_congruence(n: int) -> PartitionCongruence:
    return PartitionCongruence(n, (0,) * n)


def from_pairs(n: int, pairs) -> PartitionCongruence:
    """Equivalence generated by the pairs (no compatibility check)."""
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return PartitionCongruence(n, _normalize([find(x) for x in range(n)]))


def is_compatible(g: CayleyTable, part: PartitionCongruence) -> tuple[bool, tuple | None]:
    """Check a≡a' and b≡b' imply ab≡a'b'; return a witness on failure."""
    n = g.n
    blocks = part.blocks()
    for blk_a in blocks:
        for a, a2 in itertools.product(blk_a, repeat=2):
            for blk_b in blocks:
                for b, b2 in itertools.product(blk_b, repeat=2):
                    if not part.related(g.rows[a][b], g.rows[a2][b2]):
                        return False, (a, a2, b, b2)
    return True, None


def principal_congruence(g: CayleyTable, a: int, b: int) -> PartitionCongruence:
    """Smallest congruence identifying a and b.

    Standard closure: merge a with b, then repeatedly close merged pairs
    under the translations x -> x*c and x -> c*x; the union-find supplies
    transitivity for free.
    """
    n = g.n
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    work: list[tuple[int, int]] = []

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry
            work.append((x, y))

    union(a, b)
    # each merge event propagates its own translates; transitivity then
    # carries the translates of every derived pair, so one worklist pass
    # reaches the fixpoint
    while work:
        x, y = work.pop()
        for c in range(n):
            union(g.rows[x][c], g.rows[y][c])
            union(g.rows[c][x], g.rows[c][y])
    return PartitionCongruence(n, _normalize([find(x) for x in range(n)]))


def join(p: PartitionCongruence, q: PartitionCongruence) -> PartitionCongruence:
    """Transitive closure of the union."""
    pairs = []
    for part in (p, q):
        for blk in part.blocks():
            pairs.extend(zip(blk, blk[1:]))
    return from_pairs(p.n, pairs)


def meet(p: PartitionCongruence, q: PartitionCongruence) -> PartitionCongruence:
    keyed = [(p.block_of[x], q.block_of[x]) for x in range(p.n)]
    ids: dict[tuple[int, int], int] = {}
    out = []
    for k in keyed:
        if k not in ids:
            ids[k] = len(ids)
        out.append(ids[k])
    return PartitionCongruence(p.n, _normalize(out))


def leq(p: PartitionCongruence, q: PartitionCongruence) -> bool:
    """Refinement order: every p-block lies inside a q-block."""
    return meet(p, q) == p


@dataclass(frozen=True)
class CongruenceLattice:
    n: int
    elements: tuple[PartitionCongruence, ...]

    def height(self) -> int:
        """Length (edge count) of the longest chain."""
        order = sorted(self.elements, key=lambda e: e.num_blocks, reverse=True)
        depth = {e: 0 for e in order}
        for i, e in enumerate(order):
            for f in order[:i]:
                if f != e and leq(f, e):
                    depth[e] = max(depth[e], depth[f] + 1)
        return max(depth.values())

    def atoms(self) -> list[PartitionCongruence]:
        delta = identity_congruence(self.n)
        out = []
        for e in self.elements:
            if e == delta:
                continue
            if not any(
                f != delta and f != e and leq(f, e) for f in self.elements
            ):
                out.append(e)
        return out


def all_congruences(g: CayleyTable) -> CongruenceLattice:
    """The full congruence lattice: principal congruences plus join closure."""
    n = g.n
    if n > MAX_N_CONGRUENCES:
        raise BoundExceeded(f"n={n} exceeds the congruence bound {MAX_N_CONGRUENCES}")
    found = {identity_congruence(n)}
    for a in range(n):
        for b in range(a + 1, n):
            found.add(principal_congruence(g, a, b))
    changed = True
    while changed:
        changed = False
        current = list(found)
        for p, q in itertools.combinations(current, 2):
            j = join(p, q)
            if j not in found:
                found.add(j)
                changed = True
    ordered = sorted(found, key=lambda e: (e.num_blocks, e.block_of), reverse=True)
    return CongruenceLattice(n, tuple(ordered))


def is_sd_meet(lat: CongruenceLattice) -> bool:
    """Meet-semidistributivity, checked over all element triples."""
    for x, y, z in itertools.product(lat.elements, repeat=3):
        if meet(x, y) == meet(x, z):
            if meet(x, join(y, z)) != meet(x, y):
                return False
    return True


def quotient_table(g: CayleyTable, part: PartitionCongruence) -> CayleyTable:
    """The quotient operation on block ids; needs a genuine congruence."""
    ok, witness = is_compatible(g, part)
    if not ok:
        raise NotACongruence("operation compatibility fails", witness)
    reps = [blk[0] for blk in part.blocks()]
    k = len(reps)
    return CayleyTable(
        [
            [part.block_of[g.rows[reps[s]][reps[t]]] for t in range(k)]
            for s in range(k)
        ]
    )
