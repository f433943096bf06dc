"""Formulas of Łukasiewicz logic with rational truth constants.

The abstract syntax has the two primitive connectives ``~`` and ``->``, the
constants ``#p/q`` and a handful of definitional abbreviations (strong
disjunction ``+``, strong conjunction ``*``, lattice ``\\/`` and ``/\\``,
equivalence ``<->``, powers ``f^n`` and multiples ``n.f``). :func:`to_base`
rewrites the abbreviations away; the proof kernel compares formulas only in
that base form.

Grammar, loosest to tightest binding::

    f      := imp
    imp    := equiv ("->" imp)?            right associative
    equiv  := add ("<->" add)?
    add    := mul (("+" | "\\/") mul)*      left associative
    mul    := unary (("*" | "/\\") unary)*  left associative
    unary  := "~" unary | atom "^" nat | nat "." unary | atom
    atom   := ident | "#" rational | "(" f ")"

Identifiers starting with an uppercase letter are metavariables when a
formula is used as a schema (see :func:`substitute`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .algebra import ONE, ZERO, UnitRational, as_unit, format_rational, parse_rational

__all__ = [
    "Formula",
    "Var",
    "Const",
    "Neg",
    "Imp",
    "SDisj",
    "SConj",
    "Min",
    "Max",
    "Equiv",
    "Pow",
    "NMul",
    "ParseError",
    "parse",
    "to_text",
    "to_base",
    "base_equal",
    "substitute",
    "replace_constants",
    "match",
    "constants_of",
    "variables_of",
    "metavariables_of",
    "is_metavariable",
    "size",
    "base_size_bound",
    "GradedFormula",
    "FuzzyTheory",
    "Theory",
    "parse_theory",
    "parse_theory_entries",
    "format_entry",
    "format_theory",
    "is_comment",
]


class Formula:
    """Immutable formula node with structural equality and a cached hash."""

    __slots__ = ("_hash",)
    _arity_fields: tuple[str, ...] = ()

    def _key(self):
        raise NotImplementedError

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def __str__(self):
        return to_text(self)

    def children(self) -> tuple["Formula", ...]:
        return ()

    # Operator sugar used by tests and templates.
    def __rshift__(self, other):
        return Imp(self, other)

    def __invert__(self):
        return Neg(self)


def _init(obj, **fields):
    for k, v in fields.items():
        object.__setattr__(obj, k, v)


class Var(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        _init(self, name=name)

    def _key(self):
        return self.name

    def __repr__(self):
        return f"Var({self.name!r})"


class Const(Formula):
    __slots__ = ("q",)

    def __init__(self, q):
        _init(self, q=as_unit(q))

    def _key(self):
        return (self.q.numerator, self.q.denominator)

    def __repr__(self):
        return f"Const({format_rational(self.q)})"


class _Unary(Formula):
    __slots__ = ("f",)

    def __init__(self, f: Formula):
        _init(self, f=f)

    def _key(self):
        return (self.f,)

    def children(self):
        return (self.f,)

    def __repr__(self):
        return f"{type(self).__name__}({self.f!r})"


class _Binary(Formula):
    __slots__ = ("a", "b")

    def __init__(self, a: Formula, b: Formula):
        _init(self, a=a, b=b)

    def _key(self):
        return (self.a, self.b)

    def children(self):
        return (self.a, self.b)

    def __repr__(self):
        return f"{type(self).__name__}({self.a!r}, {self.b!r})"


class Neg(_Unary):
    __slots__ = ()


class Imp(_Binary):
    __slots__ = ()


class SDisj(_Binary):
    """Strong disjunction ``a + b``."""

    __slots__ = ()


class SConj(_Binary):
    """Strong conjunction ``a * b``."""

    __slots__ = ()


class Min(_Binary):
    __slots__ = ()


class Max(_Binary):
    __slots__ = ()


class Equiv(_Binary):
    __slots__ = ()


class _Iterated(Formula):
    __slots__ = ("f", "n")

    def __init__(self, f: Formula, n: int):
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValueError(f"exponent must be an integer >= 1, got {n!r}")
        _init(self, f=f, n=n)

    def _key(self):
        return (self.f, self.n)

    def children(self):
        return (self.f,)


class Pow(_Iterated):
    """``f^n``: ``n`` copies of ``f`` joined by strong conjunction."""

    __slots__ = ()

    def __repr__(self):
        return f"Pow({self.f!r}, {self.n})"


class NMul(_Iterated):
    """``n.f``: ``n`` copies of ``f`` joined by strong disjunction."""

    __slots__ = ()

    def __init__(self, n: int, f: Formula):
        super().__init__(f, n)

    def __repr__(self):
        return f"NMul({self.n}, {self.f!r})"


# --------------------------------------------------------------------------
# Lexer and parser

class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<const>\#\s*\d+(?:\s*/\s*\d+)?)
  | (?P<op><->|->|\\/|/\\|[~+*^.()])
  | (?P<nat>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int = 1, col0: int = 1) -> list[_Tok]:
    toks = []
    pos = 0
    ln, lstart = line, -(col0 - 1)
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - lstart + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", ln, col)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                ln += nl
                lstart = pos + chunk.rindex("\n") + 1
        else:
            toks.append(_Tok(kind, m.group(), ln, col))
        pos = m.end()
    toks.append(_Tok("eof", "", ln, pos - lstart + 1))
    return toks


class _Parser:
    def __init__(self, text: str, line: int = 1, col: int = 1):
        self.toks = _tokenize(text, line, col)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def eat(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.eat(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def parse(self) -> Formula:
        f = self.imp()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def imp(self):
        left = self.equiv()
        if self.eat("->"):
            return Imp(left, self.imp())
        return left

    def equiv(self):
        left = self.add()
        if self.eat("<->"):
            return Equiv(left, self.add())
        return left

    def add(self):
        f = self.mul()
        while True:
            if self.eat("+"):
                f = SDisj(f, self.mul())
            elif self.eat("\\/"):
                f = Max(f, self.mul())
            else:
                return f

    def mul(self):
        f = self.unary()
        while True:
            if self.eat("*"):
                f = SConj(f, self.unary())
            elif self.eat("/\\"):
                f = Min(f, self.unary())
            else:
                return f

    def nat(self) -> int:
        tok = self.tok
        if tok.kind != "nat":
            raise self.error("expected a natural number")
        self.i += 1
        n = int(tok.text)
        if n < 1:
            raise self.error("exponent must be at least 1", tok)
        return n

    def unary(self):
        if self.eat("~"):
            return Neg(self.unary())
        if self.tok.kind == "nat":
            n = self.nat()
            self.expect(".")
            return NMul(n, self.unary())
        a = self.atom()
        if self.eat("^"):
            return Pow(a, self.nat())
        return a

    def atom(self):
        tok = self.tok
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text)
        if tok.kind == "const":
            self.i += 1
            body = tok.text[1:].replace(" ", "")
            try:
                q = parse_rational(body)
            except ValueError:
                raise self.error("constant outside [0,1]", tok) from None
            return Const(q)
        if self.eat("("):
            f = self.imp()
            self.expect(")")
            return f
        found = tok.text or "end of input"
        raise self.error(f"expected a formula, found {found!r}")


def parse(text: str, *, line: int = 1, column: int = 1) -> Formula:
    """Parse a formula; ``line``/``column`` offset the error positions."""
    return _Parser(text, line, column).parse()


# --------------------------------------------------------------------------
# Printer

_IMP, _EQUIV, _ADD, _MUL, _UNARY, _ATOM = range(1, 7)


def _level(f: Formula) -> int:
    if isinstance(f, Imp):
        return _IMP
    if isinstance(f, Equiv):
        return _EQUIV
    if isinstance(f, (SDisj, Max)):
        return _ADD
    if isinstance(f, (SConj, Min)):
        return _MUL
    if isinstance(f, (Neg, Pow, NMul)):
        return _UNARY
    return _ATOM


_BIN_OPS = {Imp: "->", Equiv: "<->", SDisj: "+", Max: "\\/", SConj: "*", Min: "/\\"}


def to_text(f: Formula) -> str:
    """Canonical printout; ``parse(to_text(f)) == f`` for every formula."""
    return _show(f)


@lru_cache(maxsize=65536)
def _show(f: Formula) -> str:
    def wrap(g, min_level):
        s = _show(g)
        return s if _level(g) >= min_level else f"({s})"

    if isinstance(f, Var):
        return f.name
    if isinstance(f, Const):
        return "#" + format_rational(f.q)
    if isinstance(f, Neg):
        return "~" + wrap(f.f, _UNARY)
    if isinstance(f, Pow):
        return f"{wrap(f.f, _ATOM)}^{f.n}"
    if isinstance(f, NMul):
        return f"{f.n}.{wrap(f.f, _UNARY)}"
    op = _BIN_OPS[type(f)]
    lvl = _level(f)
    if isinstance(f, Imp):
        return f"{wrap(f.a, lvl + 1)} {op} {wrap(f.b, lvl)}"
    if isinstance(f, Equiv):
        return f"{wrap(f.a, lvl + 1)} {op} {wrap(f.b, lvl + 1)}"
    return f"{wrap(f.a, lvl)} {op} {wrap(f.b, lvl + 1)}"


# --------------------------------------------------------------------------
# Definitional expansion

def _rebuild(f: Formula, kids: tuple[Formula, ...]) -> Formula:
    if isinstance(f, _Unary):
        return type(f)(kids[0])
    if isinstance(f, _Binary):
        return type(f)(kids[0], kids[1])
    if isinstance(f, Pow):
        return Pow(kids[0], f.n)
    if isinstance(f, NMul):
        return NMul(f.n, kids[0])
    return f


def _sdisj(a, b):
    return Imp(Neg(a), b)


def _sconj(a, b):
    return Neg(_sdisj(Neg(a), Neg(b)))


def _min(a, b):
    return _sconj(a, Imp(a, b))


@lru_cache(maxsize=65536)
def to_base(f: Formula) -> Formula:
    """Rewrite every abbreviation into ``~``, ``->`` and constants.

    ``a \\/ b`` becomes ``(a -> b) -> b``, ``a + b`` becomes ``~a -> b``,
    ``a * b`` is ``~(~a + ~b)``, ``a /\\ b`` is ``a * (a -> b)`` and
    ``a <-> b`` is ``(a -> b) /\\ (b -> a)``. Iterates unroll left to right.
    """
    if isinstance(f, (Var, Const)):
        return f
    if isinstance(f, Neg):
        return Neg(to_base(f.f))
    if isinstance(f, Imp):
        return Imp(to_base(f.a), to_base(f.b))
    if isinstance(f, (Pow, NMul)):
        g = to_base(f.f)
        join = _sconj if isinstance(f, Pow) else _sdisj
        out = g
        for _ in range(f.n - 1):
            out = join(out, g)
        return out
    a, b = to_base(f.a), to_base(f.b)
    if isinstance(f, Max):
        return Imp(Imp(a, b), b)
    if isinstance(f, SDisj):
        return _sdisj(a, b)
    if isinstance(f, SConj):
        return _sconj(a, b)
    if isinstance(f, Min):
        return _min(a, b)
    if isinstance(f, Equiv):
        return _min(Imp(a, b), Imp(b, a))
    raise TypeError(f"not a formula: {f!r}")


def base_equal(f: Formula, g: Formula) -> bool:
    return f == g or to_base(f) == to_base(g)


@lru_cache(maxsize=65536)
def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in f.children())


def base_size_bound(f: Formula) -> int:
    """Upper bound on ``size(to_base(f))``.

    With ``a`` and ``b`` the bounds for the arguments, ``->`` costs
    ``a + b + 1``; ``+``, ``*``, ``\\/`` and ``/\\`` cost at most
    ``2(a + b) + 6``; ``<->`` costs ``3(a + b) + 9``; an ``n``-fold iterate
    costs ``n*a + 5(n - 1)``.
    """
    if isinstance(f, (Var, Const)):
        return 1
    if isinstance(f, Neg):
        return 1 + base_size_bound(f.f)
    if isinstance(f, (Pow, NMul)):
        return f.n * base_size_bound(f.f) + 5 * (f.n - 1)
    a, b = base_size_bound(f.a), base_size_bound(f.b)
    if isinstance(f, Imp):
        return a + b + 1
    if isinstance(f, Equiv):
        return 3 * (a + b) + 9
    return 2 * (a + b) + 6


# --------------------------------------------------------------------------
# Schemata

def is_metavariable(name: str) -> bool:
    return name[:1].isupper()


def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(g.children())


def variables_of(f: Formula) -> set[str]:
    return {g.name for g in _walk(f) if isinstance(g, Var)}


def metavariables_of(f: Formula) -> set[str]:
    return {v for v in variables_of(f) if is_metavariable(v)}


def constants_of(f: Formula) -> set[UnitRational]:
    """Rational constants occurring in ``f`` other than ``0`` and ``1``."""
    return {g.q for g in _walk(f) if isinstance(g, Const) and g.q not in (ZERO, ONE)}


def substitute(schema: Formula, binding: Mapping[str, Formula]) -> Formula:
    """Simultaneously replace the metavariables of ``schema``.

    Raises :class:`KeyError` naming the first unbound metavariable. Lowercase
    variables are proposition variables and are left untouched.
    """
    missing = sorted(v for v in metavariables_of(schema) if v not in binding)
    if missing:
        raise KeyError(f"unbound metavariable {missing[0]}")

    def go(f):
        if isinstance(f, Var):
            return binding[f.name] if is_metavariable(f.name) else f
        kids = f.children()
        if not kids:
            return f
        return _rebuild(f, tuple(go(k) for k in kids))

    return go(schema)


def replace_constants(f: Formula, mapping: Mapping[UnitRational, Formula]) -> Formula:
    """Replace every ``Const(q)`` with ``q`` in ``mapping``; others stay."""

    def go(g):
        if isinstance(g, Const):
            return mapping.get(g.q, g)
        kids = g.children()
        if not kids:
            return g
        return _rebuild(g, tuple(go(k) for k in kids))

    return go(f)


def match(pattern: Formula, target: Formula, binding: dict | None = None,
          params: Iterable[str] = ()) -> dict | None:
    """One-way structural matching of a schema against a formula.

    Metavariables listed in ``params`` only match constants. Returns the
    extended binding or ``None``. No normalisation happens here; callers
    pass base forms when they want abbreviation-insensitive matching.
    """
    params = set(params)
    out = dict(binding or {})

    def go(p, t):
        if isinstance(p, Var) and is_metavariable(p.name):
            if p.name in params and not isinstance(t, Const):
                return False
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = t
                return True
            return bound == t
        if type(p) is not type(t):
            return False
        if isinstance(p, (Var, Const)):
            return p == t
        if isinstance(p, (Pow, NMul)) and p.n != t.n:
            return False
        return all(go(a, b) for a, b in zip(p.children(), t.children()))

    return out if go(pattern, target) else None


# --------------------------------------------------------------------------
# Graded formulas and theories

@dataclass(frozen=True)
class GradedFormula:
    formula: Formula
    grade: UnitRational

    def __post_init__(self):
        object.__setattr__(self, "grade", as_unit(self.grade))

    def __str__(self):
        return f"({to_text(self.formula)}, {format_rational(self.grade)})"


class FuzzyTheory:
    """A finitely supported fuzzy set of formulas.

    Formulas are identified up to :func:`to_base`; looking up a formula
    outside the support yields grade 0.
    """

    def __init__(self, items: Mapping[Formula, object] | Iterable = ()):
        self._grades: dict[Formula, UnitRational] = {}
        self._shown: dict[Formula, Formula] = {}
        pairs = items.items() if isinstance(items, Mapping) else items
        for f, g in pairs:
            self.add(f, g)

    def add(self, formula: Formula, grade) -> None:
        grade = as_unit(grade)
        key = to_base(formula)
        # Repeated entries keep the larger grade, as for a union of fuzzy sets.
        if grade > self._grades.get(key, ZERO):
            self._grades[key] = grade
            self._shown[key] = formula

    def __call__(self, formula: Formula) -> UnitRational:
        return self._grades.get(to_base(formula), ZERO)

    grade = __call__

    def support(self) -> list[tuple[Formula, UnitRational]]:
        return [(self._shown[k], g) for k, g in self._grades.items()]

    def __len__(self):
        return len(self._grades)

    def __iter__(self):
        return iter(self.support())

    def __eq__(self, other):
        return isinstance(other, FuzzyTheory) and self._grades == other._grades

    def __repr__(self):
        inner = ", ".join(f"{to_text(f)}: {g}" for f, g in self.support())
        return f"FuzzyTheory({{{inner}}})"

    @classmethod
    def crisp(cls, theory: Iterable[Formula]) -> "FuzzyTheory":
        return cls((f, ONE) for f in theory)

    def is_crisp(self) -> bool:
        return all(g == ONE for g in self._grades.values())


class Theory:
    """A finite crisp set of premises, identified up to :func:`to_base`."""

    def __init__(self, formulas: Iterable[Formula] = ()):
        self._items: dict[Formula, Formula] = {}
        for f in formulas:
            self._items.setdefault(to_base(f), f)

    def __contains__(self, f: Formula) -> bool:
        return to_base(f) in self._items

    def __iter__(self):
        return iter(self._items.values())

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        return isinstance(other, Theory) and self._items.keys() == other._items.keys()

    def __repr__(self):
        return f"Theory([{', '.join(to_text(f) for f in self)}])"

    def union(self, other: Iterable[Formula]) -> "Theory":
        return Theory([*self, *other])


# --------------------------------------------------------------------------
# Theory files

_COMMENT_RE = re.compile(r"\s*#(?!\s*\d)")
_GRADE_RE = re.compile(r"\s*grade\s+([^:]+?)\s*:(.*)$")


def is_comment(line: str) -> bool:
    """Blank lines and ``#`` lines not starting a constant such as ``#1/2``."""
    return not line.strip() or _COMMENT_RE.match(line) is not None


def parse_theory_entries(text: str) -> list[tuple[Formula, UnitRational]]:
    """The entries of a theory file in order, duplicates and zeros included."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if is_comment(line):
            continue
        m = _GRADE_RE.match(line)
        if m:
            try:
                grade = parse_rational(m.group(1))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1) from None
            body, col = m.group(2), m.start(2) + 1
        else:
            grade, body, col = ONE, line, 1
        entries.append((parse(body, line=lineno, column=col), grade))
    return entries


def parse_theory(text: str) -> FuzzyTheory:
    """Read a theory file: ``grade p/q : formula`` or a bare formula (grade 1)."""
    return FuzzyTheory(parse_theory_entries(text))


def format_entry(formula: Formula, grade=ONE) -> str:
    grade = as_unit(grade)
    if grade == ONE:
        return to_text(formula)
    return f"grade {format_rational(grade)} : {to_text(formula)}"


def format_theory(theory: FuzzyTheory | Theory | Iterable[Formula]) -> str:
    lines = []
    if isinstance(theory, FuzzyTheory):
        for f, g in theory.support():
            lines.append(format_entry(f, g))
    else:
        lines = [to_text(f) for f in theory]
    return "".join(line + "\n" for line in lines)
