"""The sixty identities of Bol-Moufang type and their classification.

An identity of Bol-Moufang type equates two bracketings of the same
four-letter word in three variables, where one variable appears twice.
The six possible words are labeled A..F and the five bracketings 1..5;
the pair (i, j) with i < j names which two bracketings are equated.
Commutative idempotent groupoids satisfying any one of these identities
fall into eight varieties; variety_class gives the class of each identity
and inclusion_order the containment order among the eight classes.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from cigroupoids.core import CayleyTable, Identity, Prod, Term, Var, check_identity

ORDERINGS = {
    "A": "xxyz",
    "B": "xyxz",
    "C": "xyyz",
    "D": "xyzx",
    "E": "xyzy",
    "F": "xyzz",
}

# Bracketing shapes for a word abcd, numbered 1..5.
BRACKETINGS = {
    1: lambda a, b, c, d: Prod(a, Prod(b, Prod(c, d))),
    2: lambda a, b, c, d: Prod(a, Prod(Prod(b, c), d)),
    3: lambda a, b, c, d: Prod(Prod(a, b), Prod(c, d)),
    4: lambda a, b, c, d: Prod(Prod(a, Prod(b, c)), d),
    5: lambda a, b, c, d: Prod(Prod(Prod(a, b), c), d),
}

LETTERS = "ABCDEF"


@dataclass(frozen=True, order=True)
class BMIdentity:
    """One of the sixty names Xij with X in A..F and 1 <= i < j <= 5."""

    letter: str
    i: int
    j: int

    def __post_init__(self) -> None:
        if self.letter not in LETTERS:
            raise ValueError(f"ordering letter must be A..F, got {self.letter!r}")
        if not (1 <= self.i < self.j <= 5):
            raise ValueError(f"need 1 <= i < j <= 5, got ({self.i}, {self.j})")

    @property
    def name(self) -> str:
        return f"{self.letter}{self.i}{self.j}"

    def __str__(self) -> str:
        return self.name


def bm(name: str) -> BMIdentity:
    """Parse a name like 'E15'."""
    if len(name) != 3:
        raise ValueError(f"bad Bol-Moufang name {name!r}")
    return BMIdentity(name[0], int(name[1]), int(name[2]))


def bracketed(word: str, shape: int) -> Term:
    leaves = [Var(c) for c in word]
    return BRACKETINGS[shape](*leaves)


def decode(b: BMIdentity) -> Identity:
    """The actual two-sided identity named by b."""
    word = ORDERINGS[b.letter]
    return Identity(bracketed(word, b.i), bracketed(word, b.j))


ALL_BM: tuple[BMIdentity, ...] = tuple(
    BMIdentity(letter, i, j)
    for letter in LETTERS
    for i, j in itertools.combinations(range(1, 6), 2)
)


def enumerate_bm() -> list[tuple[BMIdentity, Identity]]:
    """All 60 names with their decoded identities, in (letter, i, j) order."""
    return [(b, decode(b)) for b in ALL_BM]


_DUAL_LETTER = {"A": "F", "B": "E", "C": "C", "D": "D", "E": "B", "F": "A"}
_DUAL_BRACKET = {1: 5, 2: 4, 3: 3, 4: 2, 5: 1}


def dual(b: BMIdentity) -> BMIdentity:
    """Mirror-image identity: reverse the word and flip all bracketings.

    Swapping i and j keeps the names in i < j normal form, so the map is an
    involution on the sixty names.
    """
    return BMIdentity(_DUAL_LETTER[b.letter], _DUAL_BRACKET[b.j], _DUAL_BRACKET[b.i])


def classify_bm(g: CayleyTable) -> tuple[bool, ...]:
    """Satisfaction bit for each of the 60 identities, in canonical order."""
    return tuple(check_identity(g, decode(b)) for b in ALL_BM)


def profile_string(profile: tuple[bool, ...]) -> str:
    return "".join("1" if bit else "0" for bit in profile)


# The eight variety classes. Every one of the sixty identities, taken
# together with commutativity and idempotence, defines one of these eight
# varieties (many identities collapse to the same variety).
TABLE1_CLASSES: dict[str, tuple[str, ...]] = {
    "C": ("B45", "D24", "E12"),
    "2SL": ("A13", "A45", "C12", "C45", "F12", "F35"),
    "X": ("A24", "A25", "B24", "B25", "E14", "E24", "F14", "F24"),
    "SL": (
        "A12", "A15", "A23", "A34", "A35",
        "B14", "B15", "B34", "B35",
        "C13", "C14", "C23", "C24", "C25", "C34", "C35",
        "D12", "D14", "D23", "D25", "D34", "D45",
        "E13", "E15", "E23", "E25",
        "F13", "F15", "F23", "F34", "F45",
    ),
    "T2": ("C15",),
    "T1": ("A14", "F25"),
    "S2": ("B12", "D15", "E45"),
    "S1": ("B13", "B23", "D13", "D35", "E34", "E35"),
}

CLASS_NAMES = tuple(TABLE1_CLASSES)


@functools.lru_cache(maxsize=1)
def _class_of() -> dict[BMIdentity, str]:
    out: dict[BMIdentity, str] = {}
    for cls, names in TABLE1_CLASSES.items():
        for name in names:
            out[bm(name)] = cls
    return out


def variety_class(b: BMIdentity) -> str:
    """The class (one of C, 2SL, X, SL, T2, T1, S2, S1) containing b."""
    return _class_of()[b]


# Covers of the containment order on the eight classes: three chains from
# SL up to C. The full order is the reflexive-transitive closure.
INCLUSION_COVERS: tuple[tuple[str, str], ...] = (
    ("SL", "X"), ("X", "2SL"), ("2SL", "C"),
    ("SL", "T1"), ("T1", "T2"), ("T2", "C"),
    ("SL", "S1"), ("S1", "S2"), ("S2", "C"),
)


@functools.lru_cache(maxsize=1)
def inclusion_order() -> frozenset[tuple[str, str]]:
    """All pairs (K1, K2) with K1 a subvariety of K2 (reflexive, transitive)."""
    pairs = {(k, k) for k in CLASS_NAMES} | set(INCLUSION_COVERS)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(tuple(pairs), repeat=2):
            if b == c and (a, d) not in pairs:
                pairs.add((a, d))
                changed = True
    return frozenset(pairs)


def is_subvariety(k1: str, k2: str) -> bool:
    return (k1, k2) in inclusion_order()


def comparable_pairs() -> list[tuple[str, str]]:
    """Strictly ordered pairs (K1, K2) with K1 < K2."""
    return sorted((a, b) for a, b in inclusion_order() if a != b)


def incomparable_pairs() -> list[tuple[str, str]]:
    """Unordered incomparable pairs, each listed once with a < b lexically."""
    out = []
    for a, b in itertools.combinations(sorted(CLASS_NAMES), 2):
        if not is_subvariety(a, b) and not is_subvariety(b, a):
            out.append((a, b))
    return out
