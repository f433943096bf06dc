"""Implicit definitions of rational constants in constant-free Ł.

The Torrens equation ``a <-> (~a)^(n-1)`` has ``1/n`` as its only solution,
and ``m.a`` then pins ``m/n``. The restricted bookkeeping axioms ``B_q``
with each constant ``p/q`` renamed to a variable define all of
``0, 1/q, ..., 1`` at once. Either device lets :func:`eliminate_constants`
turn an RPL consecution into a constant-free one.

Uniqueness over the reals is a theorem, not something checked here; the grid oracle
:func:`unique_solutions_grid` only sees rational grid points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd, lcm
from typing import Iterable, Iterator

import numpy as np

from .algebra import UnitRational, format_rational, grid
from .proofs.core import BOOK_ONE, BOOK_ZERO, book_imp_formula, book_neg_formula
from .semantics import DEFAULT_BUDGET, grid_models
from .syntax import (
    Equiv,
    Formula,
    Neg,
    NMul,
    Pow,
    Theory,
    Var,
    constants_of,
    replace_constants,
    to_text,
    variables_of,
)

__all__ = [
    "DefinitionTheory",
    "Elimination",
    "torrens_definition",
    "rational_definition",
    "bookkeeping_restricted",
    "bookkeeping_variables",
    "eliminate_constants",
    "unique_solutions_grid",
    "fresh_names",
]


@dataclass(frozen=True)
class DefinitionTheory:
    formulas: tuple[Formula, ...] = ()
    defined: dict = field(default_factory=dict)
    fresh: frozenset = frozenset()

    def __post_init__(self):
        for f in self.formulas:
            if constants_of(f):
                raise ValueError(f"definition {to_text(f)} mentions a rational constant")

    def theory(self) -> Theory:
        return Theory(self.formulas)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)

    def __or__(self, other: "DefinitionTheory") -> "DefinitionTheory":
        return DefinitionTheory(self.formulas + other.formulas,
                                {**self.defined, **other.defined}, self.fresh | other.fresh)

    def mapping_comment(self) -> str:
        """One ``# defines q in var`` comment per defined value."""
        return "".join(f"# defines {format_rational(q)} in {name}\n"
                       for q, name in sorted(self.defined.items()))


def fresh_names(reserved: Iterable[str], stem: str = "z") -> Iterator[str]:
    """``stem``, ``stem1``, ``stem2``, ... skipping reserved names."""
    taken = set(reserved)
    for k in itertools.count():
        name = stem if k == 0 else f"{stem}{k}"
        if name not in taken:
            yield name


def _torrens_formula(n: int, var: str) -> Formula:
    x = Var(var)
    body = Neg(x) if n == 2 else Pow(Neg(x), n - 1)
    return Equiv(x, body)


def torrens_definition(n: int, var: str = "z") -> DefinitionTheory:
    """``{var <-> (~var)^(n-1)}``, defining ``1/n`` in ``var``."""
    if not isinstance(n, int) or n < 2:
        raise ValueError("the Torrens definition needs n >= 2")
    return DefinitionTheory((_torrens_formula(n, var),), {UnitRational(1, n): var},
                            frozenset({var}))


def rational_definition(p: int, q: int, var: str = "z",
                        reserved: Iterable[str] = ()) -> DefinitionTheory:
    """``{a <-> (~a)^(q-1), var <-> p.a}`` with a fresh ``a``, defining ``p/q``.

    The fraction is reduced first. For ``p = 1`` the second formula would
    only rename ``a``, so the Torrens definition is returned in ``var``.
    """
    if q <= 0 or not 0 < p < q:
        raise ValueError("p/q must lie strictly between 0 and 1")
    g = gcd(p, q)
    p, q = p // g, q // g
    if p == 1:
        return torrens_definition(q, var)
    a = next(fresh_names({*reserved, var}, "a"))
    formulas = (_torrens_formula(q, a), Equiv(Var(var), NMul(p, Var(a))))
    return DefinitionTheory(formulas, {UnitRational(p, q): var}, frozenset({a, var}))


def bookkeeping_restricted(q: int) -> tuple[Formula, ...]:
    """``B_q``: bookkeeping axioms whose constants all lie in ``{0, 1/q, ..., 1}``.

    There are ``(q+1)^2`` implication axioms, ``q+1`` negation axioms and the
    two axioms for ``1`` and ``0``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    values = grid(q)
    out = [book_imp_formula(a, b) for a in values for b in values]
    out.extend(book_neg_formula(a) for a in values)
    out.extend([BOOK_ONE, BOOK_ZERO])
    return tuple(out)


def bookkeeping_variables(q: int, reserved: Iterable[str] = ()) -> DefinitionTheory:
    """``B_q`` with each ``p/q`` (``0 < p < q``) renamed to a fresh ``z<p>_<q>``.

    Names use the reduced fraction, so ``2/4`` becomes ``z1_2``. If some
    generated name is reserved, the stem is lengthened (``zz1_2``, ...)
    until none is.
    """
    inner = grid(q)[1:-1]
    reserved = set(reserved)
    for stem in (("z" * k) for k in itertools.count(1)):
        names = {c: f"{stem}{c.numerator}_{c.denominator}" for c in inner}
        if not reserved.intersection(names.values()):
            break
    mapping = {c: Var(name) for c, name in names.items()}
    formulas = tuple(replace_constants(f, mapping) for f in bookkeeping_restricted(q))
    return DefinitionTheory(formulas, names, frozenset(names.values()))


@dataclass(frozen=True)
class Elimination:
    theory: Theory
    definitions: DefinitionTheory
    formula: Formula

    def full_theory(self) -> Theory:
        return self.theory.union(self.definitions.formulas)


def eliminate_constants(theory: Iterable[Formula], formula: Formula,
                        strategy: str = "torrens",
                        reserved: Iterable[str] = ()) -> Elimination:
    """Replace the rational constants of ``theory`` and ``formula`` by defined variables.

    ``torrens`` uses one Torrens variable per denominator ``d`` (standing
    for ``1/d``) plus ``z <-> p.a_d`` for every other numerator; fresh names
    come from ``z, z1, z2, ...``. ``bookkeeping`` uses ``B_q`` over the lcm
    of all denominators.
    """
    premises = list(theory)
    everything = [*premises, formula]
    consts = sorted(set().union(*(constants_of(f) for f in everything)))
    taken = set(reserved).union(*(variables_of(f) for f in everything))
    if not consts:
        return Elimination(Theory(premises), DefinitionTheory(), formula)
    if strategy == "torrens":
        defs = DefinitionTheory()
        names = fresh_names(taken, "z")
        base: dict[int, str] = {}
        for d in sorted({c.denominator for c in consts}):
            base[d] = next(names)
            defs = defs | torrens_definition(d, base[d])
        for c in consts:
            if c.numerator == 1:
                continue
            var = next(names)
            part = DefinitionTheory(
                (Equiv(Var(var), NMul(c.numerator, Var(base[c.denominator]))),),
                {c: var}, frozenset({var}))
            defs = defs | part
        targets = {c: defs.defined[c] for c in consts}
    elif strategy == "bookkeeping":
        q = lcm(*(c.denominator for c in consts))
        defs = bookkeeping_variables(q, taken)
        targets = {c: defs.defined[c] for c in consts}
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    mapping = {c: Var(v) for c, v in targets.items()}
    new_premises = [replace_constants(f, mapping) for f in premises]
    return Elimination(Theory(new_premises), defs, replace_constants(formula, mapping))


def unique_solutions_grid(defs: DefinitionTheory | Iterable[Formula], var: str, n: int, *,
                          budget: int = DEFAULT_BUDGET) -> set[UnitRational]:
    """``{v(var) | v a model of defs on the grid 1/n}``."""
    formulas = defs.formulas if isinstance(defs, DefinitionTheory) else tuple(defs)
    found: set[int] = set()
    for order, rows in grid_models(Theory(formulas), n, [var], budget=budget):
        found.update(int(x) for x in np.unique(rows[:, order.index(var)]))
    return {UnitRational(k, n) for k in found}
