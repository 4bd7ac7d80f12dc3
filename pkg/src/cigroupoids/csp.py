"""Relations, constraint satisfaction instances, solvers, and the
fiber-collapse reduction.

Instances may be single-sorted (one carrier) or many-sorted (one carrier
per sort, each variable assigned a sort by the domain function). Solvers
are complete searches; the consistency solver prunes with (2,3)-consistency
first but never trades away correctness.

The reduction takes an instance over an idempotent groupoid together with
a pseudopartition term, computes for each variable the join a_v of its
constrained values, and replaces every domain by the σ-class of a_v. The
reduced instance is many-sorted over the σ-fibers and is satisfiable
exactly when the original is.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from cigroupoids.congruences import PartitionCongruence
from cigroupoids.core import BoundExceeded, CayleyTable, Term, check_property
from cigroupoids.plonka import (
    STANDARD_JOIN,
    NotPseudopartition,
    check_pseudopartition,
    join_matrix,
    sigma,
)

BRUTE_LIMIT = 10**7
POLY_MAX_ARITY = 2
POLY_MAX_CARRIER = 4


class SortMismatch(Exception):
    """Relation and operation disagree about the carrier."""


class NotInvariant(Exception):
    """A constraint relation is not preserved by the template operation."""


@dataclass(frozen=True)
class Relation:
    arity: int
    signature: tuple[int, ...]
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self) -> None:
        if len(self.signature) != self.arity:
            raise ValueError("signature length must equal arity")
        for t in self.tuples:
            if len(t) != self.arity:
                raise ValueError(f"tuple {t} has the wrong arity")

    @staticmethod
    def single_sorted(tuples: Iterable[tuple[int, ...]], arity: int, sort: int = 0) -> "Relation":
        return Relation(arity, (sort,) * arity, frozenset(tuples))

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)


@dataclass(frozen=True)
class CSPInstance:
    variables: tuple[str, ...]
    sorts: tuple[CayleyTable, ...]
    domain: tuple[int, ...]  # sort id per variable, aligned with variables
    constraints: tuple[tuple[tuple[str, ...], Relation], ...]

    def __post_init__(self) -> None:
        index = {v: i for i, v in enumerate(self.variables)}
        if len(index) != len(self.variables):
            raise ValueError("duplicate variable names")
        if len(self.domain) != len(self.variables):
            raise ValueError("domain function must cover all variables")
        for s in self.domain:
            if not (0 <= s < len(self.sorts)):
                raise ValueError(f"sort id {s} out of range")
        for scope, rel in self.constraints:
            if len(scope) != rel.arity:
                raise ValueError(f"scope {scope} does not match arity {rel.arity}")
            for pos, v in enumerate(scope):
                if v not in index:
                    raise ValueError(f"unknown variable {v!r} in scope")
                if rel.signature[pos] != self.domain[index[v]]:
                    raise ValueError(
                        f"constraint signature {rel.signature} disagrees with "
                        f"variable {v!r} of sort {self.domain[index[v]]}"
                    )
            for t in rel.tuples:
                for pos, e in enumerate(t):
                    if not (0 <= e < self.sorts[rel.signature[pos]].n):
                        raise ValueError(f"tuple {t} escapes its sort carrier")

    def sort_of(self, v: str) -> int:
        return self.domain[self.variables.index(v)]

    def search_space(self) -> int:
        size = 1
        for s in self.domain:
            size *= self.sorts[s].n
        return size


Solution = dict[str, int]


def single_sorted_instance(
    template: CayleyTable,
    variables: Sequence[str],
    constraints: Sequence[tuple[Sequence[str], Iterable[tuple[int, ...]]]],
) -> CSPInstance:
    """Convenience builder for one-carrier instances."""
    cons = []
    for scope, tuples in constraints:
        tuples = frozenset(tuple(t) for t in tuples)
        arity = len(tuple(scope))
        cons.append((tuple(scope), Relation.single_sorted(tuples, arity)))
    return CSPInstance(
        tuple(variables),
        (template,),
        (0,) * len(variables),
        tuple(cons),
    )


# ---------------------------------------------------------------------------
# Invariance and polymorphisms


def is_invariant(r: Relation, g: CayleyTable) -> bool:
    """Closure of the tuple set under the coordinatewise product of pairs."""
    if any(s != r.signature[0] for s in r.signature):
        raise SortMismatch("relation is not single-sorted")
    for t in r.tuples:
        for e in t:
            if not (0 <= e < g.n):
                raise SortMismatch(f"tuple entry {e} outside carrier 0..{g.n - 1}")
    tuples = r.tuples
    for t1 in tuples:
        for t2 in tuples:
            if tuple(g.rows[a][b] for a, b in zip(t1, t2)) not in tuples:
                return False
    return True


def polymorphisms(
    rels: Sequence[Relation], arity: int, carrier: int
) -> list[tuple[int, ...]] | list[CayleyTable]:
    """All operations of the given arity on 0..carrier-1 preserving rels.

    Backtracks over the operation table with partial-preservation pruning.
    Unary results are image tuples; binary results are Cayley tables.
    """
    if arity > POLY_MAX_ARITY:
        raise BoundExceeded(f"arity {arity} exceeds {POLY_MAX_ARITY}")
    if carrier > POLY_MAX_CARRIER:
        raise BoundExceeded(f"carrier {carrier} exceeds {POLY_MAX_CARRIER}")
    if arity < 1 or carrier < 1:
        raise ValueError("arity and carrier must be positive")
    for r in rels:
        for t in r.tuples:
            for e in t:
                if not (0 <= e < carrier):
                    raise SortMismatch(f"tuple entry {e} outside carrier")

    points = list(itertools.product(range(carrier), repeat=arity))
    index = {p: i for i, p in enumerate(points)}
    table = [-1] * len(points)

    # for each relation, the argument rows: choosing `arity` tuples from R
    # and reading them coordinatewise gives, per coordinate, one point of
    # the operation; the results must again form a tuple of R
    jobs = []
    for r in rels:
        tuples = sorted(r.tuples)
        for choice in itertools.product(tuples, repeat=arity):
            jobs.append(
                (
                    tuple(index[tuple(t[c] for t in choice)] for c in range(r.arity)),
                    r.tuples,
                )
            )

    out: list = []

    def consistent() -> bool:
        for cells, tuples in jobs:
            vals = tuple(table[c] for c in cells)
            if -1 in vals:
                continue
            if vals not in tuples:
                return False
        return True

    def descend(pos: int) -> None:
        if pos == len(points):
            out.append(tuple(table))
            return
        for v in range(carrier):
            table[pos] = v
            if consistent():
                descend(pos + 1)
        table[pos] = -1

    descend(0)
    if arity == 1:
        return out
    return [
        CayleyTable(
            [
                [flat[index[(i, j)]] for j in range(carrier)]
                for i in range(carrier)
            ]
        )
        for flat in out
    ]


# ---------------------------------------------------------------------------
# Solvers


def solve_brute(inst: CSPInstance) -> Solution | None:
    """Exhaustive lexicographic search; the ground-truth oracle."""
    if inst.search_space() > BRUTE_LIMIT:
        raise BoundExceeded(f"search space exceeds {BRUTE_LIMIT}")
    n_vars = len(inst.variables)
    positions = {v: i for i, v in enumerate(inst.variables)}
    # check a constraint as soon as its last scope variable is assigned
    by_last: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in range(n_vars)]
    for scope, rel in inst.constraints:
        idxs = tuple(positions[v] for v in scope)
        by_last[max(idxs)].append((idxs, rel.tuples))
    sizes = [inst.sorts[s].n for s in inst.domain]
    assign = [-1] * n_vars

    def descend(pos: int) -> bool:
        if pos == n_vars:
            return True
        for v in range(sizes[pos]):
            assign[pos] = v
            if all(
                tuple(assign[i] for i in idxs) in tuples
                for idxs, tuples in by_last[pos]
            ):
                if descend(pos + 1):
                    return True
        assign[pos] = -1
        return False

    if descend(0):
        return dict(zip(inst.variables, assign))
    return None


def _pair_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def solve_consistency(inst: CSPInstance) -> Solution | None:
    """(2,3)-consistency propagation, then complete backtracking.

    The propagation phase only prunes; the final search is exhaustive over
    what remains, so the verdict is always correct.
    """
    n_vars = len(inst.variables)
    positions = {v: i for i, v in enumerate(inst.variables)}
    doms: list[set[int]] = [set(range(inst.sorts[s].n)) for s in inst.domain]
    cons = [
        (tuple(positions[v] for v in scope), set(rel.tuples))
        for scope, rel in inst.constraints
    ]
    pair_rel: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for u, v in itertools.combinations(range(n_vars), 2):
        pair_rel[(u, v)] = {(a, b) for a in doms[u] for b in doms[v]}

    def allowed(u: int, a: int, v: int, b: int) -> bool:
        if u == v:
            return a == b
        if u < v:
            return (a, b) in pair_rel[(u, v)]
        return (b, a) in pair_rel[(v, u)]

    changed = True
    while changed:
        changed = False
        # filter constraint tuples against domains and pair relations
        for idxs, tuples in cons:
            keep = set()
            for t in tuples:
                if all(t[p] in doms[idxs[p]] for p in range(len(idxs))) and all(
                    allowed(idxs[p], t[p], idxs[q], t[q])
                    for p in range(len(idxs))
                    for q in range(p + 1, len(idxs))
                ):
                    keep.add(t)
            if len(keep) != len(tuples):
                tuples.intersection_update(keep)
                changed = True
            if not tuples:
                return None
            # re-project: domains and in-scope pair relations shrink to
            # what the surviving tuples support
            for p, u in enumerate(idxs):
                support = {t[p] for t in tuples}
                if doms[u] - support:
                    doms[u] &= support
                    changed = True
                if not doms[u]:
                    return None
            for p in range(len(idxs)):
                for q in range(p + 1, len(idxs)):
                    u, v = idxs[p], idxs[q]
                    if u == v:
                        continue
                    support = (
                        {(t[p], t[q]) for t in tuples}
                        if u < v
                        else {(t[q], t[p]) for t in tuples}
                    )
                    key = _pair_key(u, v)
                    if pair_rel[key] - support:
                        pair_rel[key] &= support
                        changed = True
                        if not pair_rel[key]:
                            return None
        # path consistency through every third variable
        for u, v in itertools.combinations(range(n_vars), 2):
            rel_uv = pair_rel[(u, v)]
            for w in range(n_vars):
                if w == u or w == v:
                    continue
                keep = {
                    (a, b)
                    for a, b in rel_uv
                    if any(
                        allowed(u, a, w, c) and allowed(w, c, v, b)
                        for c in doms[w]
                    )
                }
                if len(keep) != len(rel_uv):
                    rel_uv.intersection_update(keep)
                    changed = True
                    if not rel_uv:
                        return None
        # domains from pair relations
        for (u, v), rel_uv in pair_rel.items():
            du = {a for a, _ in rel_uv}
            dv = {b for _, b in rel_uv}
            if doms[u] - du:
                doms[u] &= du
                changed = True
            if doms[v] - dv:
                doms[v] &= dv
                changed = True
            if not doms[u] or not doms[v]:
                return None

    by_last: list[list[tuple[tuple[int, ...], set]]] = [[] for _ in range(n_vars)]
    for idxs, tuples in cons:
        by_last[max(idxs)].append((idxs, tuples))
    assign = [-1] * n_vars

    def descend(pos: int) -> bool:
        if pos == n_vars:
            return True
        for v in sorted(doms[pos]):
            if not all(
                allowed(u, assign[u], pos, v) for u in range(pos)
            ):
                continue
            assign[pos] = v
            if all(
                tuple(assign[i] for i in idxs) in tuples
                for idxs, tuples in by_last[pos]
            ):
                if descend(pos + 1):
                    return True
        assign[pos] = -1
        return False

    if descend(0):
        return dict(zip(inst.variables, assign))
    return None


# ---------------------------------------------------------------------------
# The fiber-collapse reduction


@dataclass(frozen=True)
class ReductionResult:
    """Reduced instance plus everything needed to audit the construction."""

    reduced: CSPInstance
    trivially_unsat: bool
    a: dict[str, int]  # the fold values a_v, as parent elements
    b_sets: dict[str, tuple[int, ...]]  # normalized B_v, parent elements
    b_prime: dict[str, tuple[int, ...]]  # σ-class of a_v, parent elements
    fiber_globals: tuple[tuple[int, ...], ...]  # reduced sort -> parent elements
    partition: PartitionCongruence
    # maps an original solution through v -> f(v)∨a_v into local coordinates
    transform: Callable[[Mapping[str, int]], Solution] = field(
        compare=False, repr=False
    )


def fold_join(jm: list[list[int]], values: Sequence[int]) -> int:
    """Left fold of the join over the values in the given order."""
    it = iter(values)
    acc = next(it)
    for v in it:
        acc = jm[acc][v]
    return acc


def reduce_instance(
    inst: CSPInstance, join: Term = STANDARD_JOIN
) -> ReductionResult:
    """Collapse every variable's domain to one σ-fiber.

    Requires a single-sorted instance over an idempotent table for which
    the join term satisfies P1..P4 and all constraint relations are
    invariant. Projections are first normalized to a subdirect fixpoint;
    an empty projection short-circuits to a trivially unsatisfiable
    instance.
    """
    if len(inst.sorts) != 1:
        raise ValueError("reduction expects a single-sorted instance")
    g = inst.sorts[0]
    if not check_property(g, "idempotent"):
        raise NotPseudopartition("template is not idempotent")
    status = check_pseudopartition(g, join)
    if not status.pseudopartition:
        raise NotPseudopartition(str(status))
    for scope, rel in inst.constraints:
        if not is_invariant(rel, g):
            raise NotInvariant(f"constraint on {scope} is not invariant")

    jm = join_matrix(g, join)
    part = sigma(g, join)
    blocks = part.blocks()
    local = {x: blocks[s].index(x) for s in range(len(blocks)) for x in blocks[s]}
    fibers = tuple(
        CayleyTable([[local[g.rows[a][b]] for b in blk] for a in blk])
        for blk in blocks
    )

    # subdirect normalization: restrict relations to current projections
    # and recompute until stable
    b_sets: dict[str, set[int]] = {v: set(range(g.n)) for v in inst.variables}
    live = [set(rel.tuples) for _, rel in inst.constraints]
    scopes = [scope for scope, _ in inst.constraints]
    for i, scope in enumerate(scopes):
        for pos, v in enumerate(scope):
            b_sets[v] &= {t[pos] for t in live[i]}
    changed = True
    while changed:
        changed = False
        for i, scope in enumerate(scopes):
            keep = {
                t
                for t in live[i]
                if all(t[pos] in b_sets[v] for pos, v in enumerate(scope))
            }
            if len(keep) != len(live[i]):
                live[i] = keep
                changed = True
            for pos, v in enumerate(scope):
                proj = {t[pos] for t in keep}
                if b_sets[v] - proj:
                    b_sets[v] &= proj
                    changed = True

    empty = any(not s for s in b_sets.values())
    a_v: dict[str, int] = {}
    b_prime: dict[str, tuple[int, ...]] = {}
    domain = []
    for v in inst.variables:
        if b_sets[v]:
            a = fold_join(jm, sorted(b_sets[v]))
            a_v[v] = a
            blk = part.block_of[a]
            b_prime[v] = blocks[blk]
            domain.append(blk)
        else:
            a_v[v] = -1
            b_prime[v] = ()
            domain.append(0)

    new_cons = []
    var_pos = {v: i for i, v in enumerate(inst.variables)}
    for i, scope in enumerate(scopes):
        sig = tuple(domain[var_pos[v]] for v in scope)
        kept = []
        for t in live[i]:
            if all(e in b_prime[v] for e, v in zip(t, scope)):
                kept.append(tuple(local[e] for e in t))
        new_cons.append((tuple(scope), Relation(len(scope), sig, frozenset(kept))))
    for v in inst.variables:
        if not b_sets[v]:
            # an empty unary pins the unsatisfiability in-instance
            new_cons.append(((v,), Relation(1, (domain[var_pos[v]],), frozenset())))

    reduced = CSPInstance(inst.variables, fibers, tuple(domain), tuple(new_cons))

    def transform(solution: Mapping[str, int]) -> Solution:
        if empty:
            raise ValueError("instance is trivially unsatisfiable")
        out = {}
        for v in inst.variables:
            img = jm[solution[v]][a_v[v]]
            out[v] = local[img]
        return out

    return ReductionResult(
        reduced=reduced,
        trivially_unsat=empty,
        a=a_v,
        b_sets={v: tuple(sorted(s)) for v, s in b_sets.items()},
        b_prime=b_prime,
        fiber_globals=tuple(blocks),
        partition=part,
        transform=transform,
    )


# ---------------------------------------------------------------------------
# Many-sorted to product translation


def product_table(tables: Sequence[CayleyTable]) -> CayleyTable:
    """Componentwise operation on the product carrier, mixed-radix encoded."""
    sizes = [t.n for t in tables]
    total = 1
    for s in sizes:
        total *= s
    if total > BRUTE_LIMIT:
        raise BoundExceeded("product carrier too large")

    def unpack(e: int) -> list[int]:
        out = []
        for s in reversed(sizes):
            out.append(e % s)
            e //= s
        return out[::-1]

    def pack(coords: Sequence[int]) -> int:
        e = 0
        for c, s in zip(coords, sizes):
            e = e * s + c
        return e

    rows = []
    for x in range(total):
        xs = unpack(x)
        row = []
        for y in range(total):
            ys = unpack(y)
            row.append(pack([t.rows[a][b] for t, a, b in zip(tables, xs, ys)]))
        rows.append(row)
    return CayleyTable(rows)


def multisorted_to_product(inst: CSPInstance) -> CSPInstance:
    """Re-domain a many-sorted instance over the product of its sorts.

    Original coordinates embed through the sort projections; the other
    coordinates of a lifted tuple are unconstrained, so satisfiability is
    preserved in both directions.
    """
    if len(inst.sorts) == 1:
        return inst
    sizes = [t.n for t in inst.sorts]
    prod = product_table(inst.sorts)
    strides = []
    acc = 1
    for s in reversed(sizes):
        strides.append(acc)
        acc *= s
    strides = strides[::-1]

    def coordinate(e: int, sort: int) -> int:
        return (e // strides[sort]) % sizes[sort]

    new_cons = []
    for scope, rel in inst.constraints:
        lifted = set()
        for t in rel.tuples:
            # all product elements agreeing with t on the scoped sorts
            choices = []
            for pos, e in enumerate(t):
                sort = rel.signature[pos]
                matching = [
                    p for p in range(prod.n) if coordinate(p, sort) == e
                ]
                choices.append(matching)
            for combo in itertools.product(*choices):
                lifted.add(combo)
        new_cons.append(
            (scope, Relation(rel.arity, (0,) * rel.arity, frozenset(lifted)))
        )
    return CSPInstance(
        inst.variables, (prod,), (0,) * len(inst.variables), tuple(new_cons)
    )


# ---------------------------------------------------------------------------
# Instance generation


def close_under(template: CayleyTable, seeds: Iterable[tuple[int, ...]]) -> frozenset:
    """Smallest tuple set containing seeds closed under the coordinatewise op."""
    out = set(tuple(t) for t in seeds)
    frontier = list(out)
    while frontier:
        t1 = frontier.pop()
        for t2 in list(out):
            for p in (
                tuple(template.rows[a][b] for a, b in zip(t1, t2)),
                tuple(template.rows[b][a] for a, b in zip(t1, t2)),
            ):
                if p not in out:
                    out.add(p)
                    frontier.append(p)
    return frozenset(out)


def gen_instance(
    seed: int,
    template: CayleyTable,
    num_vars: int = 5,
    num_constraints: int = 4,
    max_arity: int = 3,
) -> CSPInstance:
    """Deterministic random instance whose relations are invariant by
    construction: each is the closure of a few seed tuples under the
    template operation."""
    rng = random.Random(seed)
    names = tuple(f"v{i}" for i in range(num_vars))
    cons = []
    for _ in range(num_constraints):
        arity = rng.randint(1, min(max_arity, num_vars))
        scope = tuple(rng.sample(names, arity))
        seeds = [
            tuple(rng.randrange(template.n) for _ in range(arity))
            for _ in range(rng.randint(1, 3))
        ]
        tuples = close_under(template, seeds)
        cons.append((scope, Relation.single_sorted(tuples, arity)))
    return CSPInstance(names, (template,), (0,) * num_vars, tuple(cons))


# ---------------------------------------------------------------------------
# File format


def format_csp(inst: CSPInstance) -> str:
    from cigroupoids.core import format_alg

    lines = [f"sorts {len(inst.sorts)}"]
    for t in inst.sorts:
        lines.append(format_alg(t).rstrip("\n"))
    for v, s in zip(inst.variables, inst.domain):
        lines.append(f"var {v} {s}")
    for scope, rel in inst.constraints:
        lines.append("con " + " ".join(scope))
        for t in rel.sorted_tuples():
            lines.append("t " + " ".join(str(e) for e in t))
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_csp(text: str, base_dir: str = ".") -> CSPInstance:
    import os

    from cigroupoids.core import load_alg, parse_alg

    lines = [
        ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")
    ]
    pos = 0
    if not lines or not lines[pos].startswith("sorts "):
        raise ValueError("instance must start with 'sorts <k>'")
    k = int(lines[pos].split()[1])
    pos += 1
    sorts = []
    for _ in range(k):
        if lines[pos].startswith("@file "):
            path = lines[pos][len("@file ") :].strip()
            sorts.append(load_alg(os.path.join(base_dir, path)))
            pos += 1
        else:
            n = int(lines[pos].strip())
            block = lines[pos : pos + n + 1]
            sorts.append(parse_alg("\n".join(block)))
            pos += n + 1
    variables: list[str] = []
    domain: list[int] = []
    cons: list[tuple[tuple[str, ...], Relation]] = []
    while pos < len(lines):
        ln = lines[pos]
        if ln.startswith("var "):
            _, name, sid = ln.split()
            variables.append(name)
            domain.append(int(sid))
            pos += 1
        elif ln.startswith("con "):
            scope = tuple(ln.split()[1:])
            pos += 1
            tuples = []
            while pos < len(lines) and lines[pos] != "end":
                if not lines[pos].startswith("t "):
                    raise ValueError(f"expected tuple line, got {lines[pos]!r}")
                tuples.append(tuple(int(e) for e in lines[pos].split()[1:]))
                pos += 1
            if pos >= len(lines):
                raise ValueError("unterminated constraint block")
            pos += 1  # skip 'end'
            sig = tuple(domain[variables.index(v)] for v in scope)
            cons.append((scope, Relation(len(scope), sig, frozenset(tuples))))
        else:
            raise ValueError(f"unrecognized line {ln!r}")
    return CSPInstance(tuple(variables), tuple(sorts), tuple(domain), tuple(cons))
