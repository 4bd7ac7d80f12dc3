"""Finite groupoids as Cayley tables, terms over one binary operation, and
identity checking.

Elements are 0-based integers and tables are row major: entry (i, j) of the
table is the product i*j. Terms are fully parenthesized binary trees; there is
no implicit associativity anywhere, since the whole point of this package is
the study of operations that need not associate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple


class UnboundVariable(Exception):
    """A term variable has no value in the given assignment."""


class InvalidExponent(Exception):
    """Power terms x*y^j are only defined for j >= 1."""


class ArityMismatch(Exception):
    """The term's variable count does not fit the requested term condition."""


class NotLatin(Exception):
    """Quasigroup expansion needs a Latin square."""


class BoundExceeded(Exception):
    """The requested computation is outside the supported size bounds."""


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Prod:
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"({self.left} {self.right})"


Term = Var | Prod


def variables(t: Term) -> tuple[str, ...]:
    """Variable names of t in order of first occurrence."""
    seen: list[str] = []

    def walk(u: Term) -> None:
        if isinstance(u, Var):
            if u.name not in seen:
                seen.append(u.name)
        else:
            walk(u.left)
            walk(u.right)

    walk(t)
    return tuple(seen)


def parse_term(text: str) -> Term:
    """Parse the term grammar: term := variable | '(' term ' ' term ')'.

    The infix shorthand 'a*b' is accepted and normalized to '(a b)'; chains
    like 'a*b*c' associate to the left.
    """
    tokens = _tokenize(text)
    pos = 0

    def parse_expr() -> Term:
        nonlocal pos
        t = parse_primary()
        while pos < len(tokens) and tokens[pos] == "*":
            pos += 1
            t = Prod(t, parse_primary())
        return t

    def parse_primary() -> Term:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"unexpected end of term: {text!r}")
        tok = tokens[pos]
        if tok == "(":
            pos += 1
            left = parse_expr()
            if pos < len(tokens) and tokens[pos] == ")":
                # grouping parens around a single (star) expression
                pos += 1
                return left
            right = parse_expr()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ValueError(f"missing ')' in term: {text!r}")
            pos += 1
            return Prod(left, right)
        if tok in (")", "*"):
            raise ValueError(f"unexpected {tok!r} in term: {text!r}")
        pos += 1
        return Var(tok)

    result = parse_expr()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in term: {text!r}")
    return result


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()*":
            tokens.append(c)
            i += 1
        elif c.isalnum() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise ValueError(f"bad character {c!r} in term: {text!r}")
    return tokens


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return f"{self.lhs} ≈ {self.rhs}"


def parse_identity(text: str) -> Identity:
    """Parse 'lhs = rhs' (also accepts the Unicode approx sign)."""
    for sep in ("≈", "="):
        if sep in text:
            lhs, rhs = text.split(sep, 1)
            return Identity(parse_term(lhs), parse_term(rhs))
    raise ValueError(f"identity needs a '=' separator: {text!r}")


def is_regular(ident: Identity) -> bool:
    """True when both sides mention exactly the same variables."""
    return set(variables(ident.lhs)) == set(variables(ident.rhs))


# Argument positions for term conditions follow the customary variable order
# rather than alphabetical or first-occurrence order, so q(x,y,z) = y(xz)
# reads positionally as expected.
CONVENTIONAL_ORDER = ("x", "y", "z", "u", "v", "w")


def positional_variables(t: Term) -> tuple[str, ...]:
    """Variables of t ordered x, y, z, u, v, w first, then first occurrence."""
    occ = variables(t)
    head = [v for v in CONVENTIONAL_ORDER if v in occ]
    tail = [v for v in occ if v not in CONVENTIONAL_ORDER]
    return tuple(head) + tuple(tail)


# ---------------------------------------------------------------------------
# Cayley tables


class CayleyTable:
    """A finite binary operation on {0..n-1}.

    Commutativity and idempotence are deliberately not invariants of the
    type; plenty of useful counterexamples (the left-zero semigroup, say)
    are neither.
    """

    __slots__ = ("n", "rows")

    def __init__(self, rows: Iterable[Iterable[int]]):
        self.rows: tuple[tuple[int, ...], ...] = tuple(tuple(r) for r in rows)
        self.n = len(self.rows)
        if self.n < 1:
            raise ValueError("carrier must have at least one element")
        for r in self.rows:
            if len(r) != self.n:
                raise ValueError("table must be square")
            for v in r:
                if not (0 <= v < self.n):
                    raise ValueError(f"entry {v} outside 0..{self.n - 1}")

    def prod(self, a: int, b: int) -> int:
        return self.rows[a][b]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CayleyTable) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"CayleyTable({list(map(list, self.rows))!r})"


def parse_alg(text: str) -> CayleyTable:
    """Parse the .alg format: '#' comment lines, then n, then n rows."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty algebra file")
    n = int(lines[0].strip())
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} rows, found {len(lines) - 1}")
    rows = [[int(tok) for tok in ln.split()] for ln in lines[1:]]
    return CayleyTable(rows)


def format_alg(g: CayleyTable) -> str:
    """Bit-exact .alg serialization: no trailing spaces, newline terminated."""
    out = [str(g.n)]
    for row in g.rows:
        out.append(" ".join(str(v) for v in row))
    return "\n".join(out) + "\n"


def load_alg(path: str) -> CayleyTable:
    with open(path, encoding="utf-8") as fh:
        return parse_alg(fh.read())


def load_fixture(name: str) -> CayleyTable:
    """Load one of the bundled example tables (fig1 .. fig4c, leftzero)."""
    from importlib.resources import files

    text = files("cigroupoids.data").joinpath(f"{name}.alg").read_text("utf-8")
    return parse_alg(text)


FIXTURE_NAMES = (
    "fig1",
    "fig2a",
    "fig2b",
    "fig3a",
    "fig3b",
    "fig4a",
    "fig4b",
    "fig4c",
    "leftzero",
)


# ---------------------------------------------------------------------------
# Evaluation and identity checking

Assignment = Mapping[str, int]


def eval_term(t: Term, a: Assignment, g: CayleyTable) -> int:
    """Bottom-up evaluation of t under the assignment a."""
    if isinstance(t, Var):
        try:
            return a[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    return g.rows[eval_term(t.left, a, g)][eval_term(t.right, a, g)]


def compile_term(t: Term, order: tuple[str, ...]) -> tuple[tuple[int, int], ...]:
    """Flatten t to postfix ops: (-1, var_index) pushes, (-2, 0) multiplies."""
    ops: list[tuple[int, int]] = []

    def walk(u: Term) -> None:
        if isinstance(u, Var):
            try:
                ops.append((-1, order.index(u.name)))
            except ValueError:
                raise UnboundVariable(u.name) from None
        else:
            walk(u.left)
            walk(u.right)
            ops.append((-2, 0))

    walk(t)
    return tuple(ops)


def _eval_postfix(ops: tuple[tuple[int, int], ...], asg: tuple[int, ...], rows) -> int:
    stack: list[int] = []
    push = stack.append
    for kind, arg in ops:
        if kind == -1:
            push(asg[arg])
        else:
            b = stack.pop()
            a = stack.pop()
            push(rows[a][b])
    return stack[0]


def check_identity(g: CayleyTable, ident: Identity) -> bool:
    """Exhaustive check over all assignments, early exit on the first failure."""
    return check_identity_witness(g, ident) is None


def check_identity_witness(g: CayleyTable, ident: Identity) -> dict[str, int] | None:
    """None when the identity holds; otherwise the first failing assignment."""
    names = tuple(sorted(set(variables(ident.lhs)) | set(variables(ident.rhs))))
    lhs = compile_term(ident.lhs, names)
    rhs = compile_term(ident.rhs, names)
    rows = g.rows
    for asg in itertools.product(range(g.n), repeat=len(names)):
        if _eval_postfix(lhs, asg, rows) != _eval_postfix(rhs, asg, rows):
            return dict(zip(names, asg))
    return None


_X, _Y, _Z, _W = Var("x"), Var("y"), Var("z"), Var("w")

COMMUTATIVE_LAW = Identity(Prod(_X, _Y), Prod(_Y, _X))
IDEMPOTENT_LAW = Identity(Prod(_X, _X), _X)
ASSOCIATIVE_LAW = Identity(Prod(Prod(_X, _Y), _Z), Prod(_X, Prod(_Y, _Z)))
TWO_SEMILATTICE_LAW = Identity(Prod(_X, Prod(_X, _Y)), Prod(_X, _Y))
DISTRIBUTIVE_LAW = Identity(
    Prod(_X, Prod(_Y, _Z)), Prod(Prod(_X, _Y), Prod(_X, _Z))
)
ENTROPIC_LAW = Identity(
    Prod(Prod(_X, _Y), Prod(_Z, _W)), Prod(Prod(_X, _Z), Prod(_Y, _W))
)
SQUAG_LAW = Identity(Prod(_X, Prod(_X, _Y)), _Y)

PROPERTY_LAWS = {
    "commutative": (COMMUTATIVE_LAW,),
    "idempotent": (IDEMPOTENT_LAW,),
    "associative": (ASSOCIATIVE_LAW,),
    "two-semilattice": (TWO_SEMILATTICE_LAW,),
    "distributive": (DISTRIBUTIVE_LAW,),
    "entropic": (ENTROPIC_LAW,),
    "squag": (COMMUTATIVE_LAW, IDEMPOTENT_LAW, SQUAG_LAW),
    "semilattice": (COMMUTATIVE_LAW, IDEMPOTENT_LAW, ASSOCIATIVE_LAW),
}


def is_latin_square(g: CayleyTable) -> bool:
    """Each element exactly once per row and per column."""
    full = set(range(g.n))
    for i in range(g.n):
        if set(g.rows[i]) != full:
            return False
        if {g.rows[j][i] for j in range(g.n)} != full:
            return False
    return True


def check_property(g: CayleyTable, name: str) -> bool:
    if name == "latin-square":
        return is_latin_square(g)
    try:
        laws = PROPERTY_LAWS[name]
    except KeyError:
        raise ValueError(f"unknown property {name!r}") from None
    return all(check_identity(g, law) for law in laws)


PROPERTY_NAMES = ("latin-square",) + tuple(PROPERTY_LAWS)


def power_term(j: int) -> Term:
    """The left-nested power x*y^j: x*y^1 = xy, x*y^(j+1) = (x*y^j)y."""
    if j < 1:
        raise InvalidExponent(j)
    t: Term = Prod(_X, _Y)
    for _ in range(j - 1):
        t = Prod(t, _Y)
    return t


def _as_function(g: CayleyTable, t: Term, arity: int, order: tuple[str, ...] | None):
    names = positional_variables(t) if order is None else tuple(order)
    if len(names) != arity:
        raise ArityMismatch(f"term has {len(names)} variables, need {arity}")
    ops = compile_term(t, names)

    def f(*args: int) -> int:
        return _eval_postfix(ops, args, g.rows)

    return f


def term_condition(
    g: CayleyTable,
    t: Term,
    kind: str,
    k: int | None = None,
    order: tuple[str, ...] | None = None,
) -> bool:
    """Check a named term condition for t on g.

    kind is one of 'wnu', 'nu', 'maltsev', 'edge'. For 'wnu' and 'nu', k is
    the arity; 'maltsev' is ternary; for 'edge', k counts the identities and
    the term is (k+1)-ary. Positions bind variables in the customary order
    x, y, z, u unless an explicit order is given.
    """
    kind = kind.lower()
    n = g.n
    rng = range(n)
    if kind == "maltsev":
        q = _as_function(g, t, 3, order)
        return all(q(x, y, y) == x and q(y, y, x) == x for x in rng for y in rng)
    if kind in ("wnu", "nu"):
        if k is None or k < 2:
            raise ArityMismatch("wnu/nu need an arity k >= 2")
        f = _as_function(g, t, k, order)
        for x in rng:
            if f(*([x] * k)) != x:
                return False
        for x in rng:
            for y in rng:
                vals = []
                for pos in range(k):
                    args = [x] * k
                    args[pos] = y
                    vals.append(f(*args))
                if any(v != vals[0] for v in vals[1:]):
                    return False
                if kind == "nu" and vals[0] != x:
                    return False
        return True
    if kind == "edge":
        if k is None or k < 2:
            raise ArityMismatch("edge needs k >= 2")
        f = _as_function(g, t, k + 1, order)
        patterns = [(0, 1), (0, 2)] + [(p,) for p in range(3, k + 1)]
        for x in rng:
            for y in rng:
                for xs in patterns:
                    args = [y] * (k + 1)
                    for p in xs:
                        args[p] = x
                    if f(*args) != y:
                        return False
        return True
    raise ValueError(f"unknown term condition kind {kind!r}")


class QuasigroupExpansion(NamedTuple):
    mul: CayleyTable
    ldiv: CayleyTable  # entry (a, b) = a \ b, the unique c with a*c = b
    rdiv: CayleyTable  # entry (b, a) = b / a, the unique d with d*a = b


def latin_expand(g: CayleyTable) -> QuasigroupExpansion:
    """Expand a Latin square to its quasigroup divisions."""
    if not is_latin_square(g):
        raise NotLatin("table has a repeated entry in some row or column")
    n = g.n
    ldiv = [[0] * n for _ in range(n)]
    rdiv = [[0] * n for _ in range(n)]
    for a in range(n):
        for c in range(n):
            b = g.rows[a][c]
            ldiv[a][b] = c
    for d in range(n):
        for a in range(n):
            b = g.rows[d][a]
            rdiv[b][a] = d
    return QuasigroupExpansion(g, CayleyTable(ldiv), CayleyTable(rdiv))


def product_algebra(g: CayleyTable, h: CayleyTable) -> CayleyTable:
    """Direct product on pairs, encoded as a*h.n + b."""
    n, m = g.n, h.n
    rows = [[0] * (n * m) for _ in range(n * m)]
    for a in range(n):
        for b in range(m):
            for c in range(n):
                for d in range(m):
                    rows[a * m + b][c * m + d] = g.rows[a][c] * m + h.rows[b][d]
    return CayleyTable(rows)
