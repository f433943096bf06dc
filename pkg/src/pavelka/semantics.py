"""Evaluation in the standard MV-algebra and grid validity degrees.

:func:`evaluate` is exact. :func:`validity_degree_grid` minimises a formula
over the assignments into the finite subalgebra ``{0, 1/n, ..., 1}`` that
respect a theory. The grid minimum is only an upper bound on the validity
degree; :func:`degree_sandwich` pairs it with the grade of a checked proof
and declares the degree exact when the two meet.

The search works on integer numerators with numpy. Variables are ordered
so that theory constraints become fully assigned as early as possible, and
partial assignments that already violate one are dropped before the next
variable is expanded. Work is counted in expanded grid points and capped by
a budget; exceeding it raises :class:`GridBudgetError` rather than
returning a truncated answer.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import lcm
from threading import Lock
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .algebra import (
    ONE,
    ZERO,
    UnitRational,
    as_unit,
    common_denominator,
    format_rational,
    mv_conj,
    mv_disj,
    mv_equiv,
    mv_imp,
    mv_max,
    mv_min,
    mv_neg,
    mv_nmul,
    mv_pow,
)
from .syntax import (
    Const,
    Equiv,
    Formula,
    FuzzyTheory,
    Imp,
    Max,
    Min,
    Neg,
    NMul,
    Pow,
    SConj,
    SDisj,
    Theory,
    Var,
    constants_of,
    to_base,
    to_text,
    variables_of,
)

__all__ = [
    "Assignment",
    "DegreeReport",
    "GridBudgetError",
    "InvalidCertificate",
    "DEFAULT_BUDGET",
    "evaluate",
    "respects",
    "models",
    "validity_degree_grid",
    "degree_sandwich",
    "grid_denominator_for",
    "grid_models",
    "budget_from_env",
]

Assignment = Mapping[str, UnitRational]

#: Maximum number of grid points the search may expand.
DEFAULT_BUDGET = 5_000_000

_CHUNK = 1 << 18


class GridBudgetError(RuntimeError):
    """The grid search would exceed its point budget."""


class InvalidCertificate(ValueError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("PAVELKA_BUDGET")
    if raw is None or not raw.strip():
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError("PAVELKA_BUDGET must be positive")
    return value


# --------------------------------------------------------------------------
# Exact evaluation

_BINARY = {
    Imp: mv_imp,
    SDisj: mv_disj,
    SConj: mv_conj,
    Min: mv_min,
    Max: mv_max,
    Equiv: mv_equiv,
}


def evaluate(f: Formula, v: Assignment) -> UnitRational:
    """Value of ``f`` under ``v`` in the standard algebra.

    Sugar nodes are evaluated by their algebraic operation, which agrees
    with evaluating the :func:`~pavelka.syntax.to_base` expansion.
    """
    if isinstance(f, Var):
        try:
            return as_unit(v[f.name])
        except KeyError:
            raise KeyError(f"unassigned variable {f.name}") from None
    if isinstance(f, Const):
        return f.q
    if isinstance(f, Neg):
        return mv_neg(evaluate(f.f, v))
    op = _BINARY.get(type(f))
    if op is not None:
        return op(evaluate(f.a, v), evaluate(f.b, v))
    if isinstance(f, Pow):
        return mv_pow(evaluate(f.f, v), f.n)
    if isinstance(f, NMul):
        return mv_nmul(evaluate(f.f, v), f.n)
    raise TypeError(f"not a formula: {f!r}")


def _as_fuzzy(theory) -> FuzzyTheory:
    if theory is None:
        return FuzzyTheory()
    if isinstance(theory, FuzzyTheory):
        return theory
    return FuzzyTheory.crisp(theory)


def respects(v: Assignment, theory) -> bool:
    """Whether every formula of the theory takes at least its grade under ``v``."""
    return all(evaluate(f, v) >= g for f, g in _as_fuzzy(theory).support())


def models(v: Assignment, theory: Iterable[Formula]) -> bool:
    return all(evaluate(f, v) == ONE for f in theory)


# --------------------------------------------------------------------------
# Vectorised evaluation on numerators

Columns = Mapping[str, np.ndarray]


def _compile(f: Formula, n: int) -> Callable[[Columns], np.ndarray]:
    """Compile ``f`` to a function on integer numerator columns over ``n``."""
    if isinstance(f, Var):
        name = f.name
        return lambda env: env[name]
    if isinstance(f, Const):
        if n % f.q.denominator:
            raise ValueError(f"grid {n} does not contain {format_rational(f.q)}")
        k = f.q.numerator * (n // f.q.denominator)
        return lambda env: np.int64(k)
    if isinstance(f, Neg):
        g = _compile(f.f, n)
        return lambda env: n - g(env)
    if isinstance(f, (Pow, NMul)):
        g, k = _compile(f.f, n), f.n
        if isinstance(f, Pow):
            return lambda env: np.maximum(0, k * g(env) - (k - 1) * n)
        return lambda env: np.minimum(n, k * g(env))
    a, b = _compile(f.a, n), _compile(f.b, n)
    if isinstance(f, Imp):
        return lambda env: np.minimum(n, n - a(env) + b(env))
    if isinstance(f, SDisj):
        return lambda env: np.minimum(n, a(env) + b(env))
    if isinstance(f, SConj):
        return lambda env: np.maximum(0, a(env) + b(env) - n)
    if isinstance(f, Min):
        return lambda env: np.minimum(a(env), b(env))
    if isinstance(f, Max):
        return lambda env: np.maximum(a(env), b(env))
    if isinstance(f, Equiv):
        return lambda env: n - np.abs(a(env) - b(env))
    raise TypeError(f"not a formula: {f!r}")


@dataclass
class _Constraint:
    formula: Formula
    threshold: int
    names: frozenset
    fn: Callable = field(repr=False)


class _Work:
    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0
        self._lock = Lock()

    def spend(self, points: int) -> None:
        with self._lock:
            self.used += points
            if self.used > self.budget:
                raise GridBudgetError(
                    f"grid search needs more than {self.budget} points; "
                    "raise PAVELKA_BUDGET or lower the grid denominator")


def _order(names: list[str], constraints: list[_Constraint]) -> list[str]:
    """Greedy order: next is the variable that completes most constraints."""
    remaining = set(names)
    order: list[str] = []
    open_cs = [set(c.names) for c in constraints]
    while remaining:
        def score(x):
            completes = sum(1 for s in open_cs if s and s <= {x})
            touches = sum(1 for s in open_cs if x in s)
            return (-completes, -touches, x)
        best = min(remaining, key=score)
        order.append(best)
        remaining.discard(best)
        for s in open_cs:
            s.discard(best)
    return order


def _blocks(order, constraints, n, work, prefix: np.ndarray) -> Iterator[np.ndarray]:
    """Yield arrays of feasible rows; columns follow ``order``."""
    due = [[] for _ in order]
    for c in constraints:
        last = max((order.index(x) for x in c.names), default=-1)
        due[last].append(c)
    values = np.arange(n + 1, dtype=np.int64)

    def expand(level: int, rows: np.ndarray):
        if level == len(order):
            yield rows
            return
        step = max(1, _CHUNK // (n + 1))
        for start in range(0, len(rows), step):
            part = rows[start:start + step]
            grown = np.empty((len(part) * (n + 1), level + 1), dtype=np.int64)
            grown[:, :level] = np.repeat(part, n + 1, axis=0)
            grown[:, level] = np.tile(values, len(part))
            work.spend(len(grown))
            if due[level]:
                env = {x: grown[:, i] for i, x in enumerate(order[:level + 1])}
                keep = np.ones(len(grown), dtype=bool)
                for c in due[level]:
                    keep &= np.broadcast_to(c.fn(env), keep.shape) >= c.threshold
                grown = grown[keep]
            if len(grown):
                yield from expand(level + 1, grown)

    level = prefix.shape[1]
    for c in constraints:
        if not c.names:
            if np.all(c.fn({}) < c.threshold):
                return
    yield from expand(level, prefix)


def _constraints(theory: FuzzyTheory, n: int) -> list[_Constraint]:
    out = []
    for f, g in theory.support():
        if g == ZERO:
            continue
        out.append(_Constraint(f, g.numerator * (n // g.denominator),
                               frozenset(variables_of(f)), _compile(f, n)))
    return out


def grid_models(theory, n: int, variables: Iterable[str] = (), *,
                budget: int = DEFAULT_BUDGET, split: int = 1
                ) -> Iterator[tuple[list[str], np.ndarray]]:
    """Enumerate grid assignments respecting ``theory`` in blocks.

    Yields ``(names, rows)`` where ``rows`` holds numerators over ``n`` and
    its columns follow ``names``. With ``split > 1`` the first variable's
    values are searched by a thread pool; the set of rows is unchanged.
    """
    fuzzy = _as_fuzzy(theory)
    cs = _constraints(fuzzy, n)
    names = sorted(set(variables).union(*(c.names for c in cs)))
    order = _order(names, cs)
    work = _Work(budget)
    if not order:
        ok = all(np.all(c.fn({}) >= c.threshold) for c in cs)
        if ok:
            yield order, np.zeros((1, 0), dtype=np.int64)
        return
    if split <= 1:
        for rows in _blocks(order, cs, n, work, np.zeros((1, 0), dtype=np.int64)):
            yield order, rows
        return
    firsts = np.array_split(np.arange(n + 1, dtype=np.int64), split)
    # The prefix level skips its own constraint check, so redo it here.
    first_cs = [c for c in cs if c.names and c.names <= {order[0]}]

    def run(vals):
        if len(vals) == 0:
            return []
        work.spend(len(vals))
        keep = np.ones(len(vals), dtype=bool)
        for c in first_cs:
            keep &= np.broadcast_to(c.fn({order[0]: vals}), keep.shape) >= c.threshold
        prefix = vals[keep].reshape(-1, 1)
        rest = [c for c in cs if c not in first_cs]
        if not len(prefix):
            return []
        return list(_blocks(order, rest, n, work, prefix))

    with ThreadPoolExecutor(max_workers=split) as pool:
        for blocks in pool.map(run, firsts):
            for rows in blocks:
                yield order, rows


# --------------------------------------------------------------------------
# Degrees

@dataclass(frozen=True)
class DegreeReport:
    upper: UnitRational
    lower: UnitRational | None
    grid_denominator: int
    exact: bool
    witness: tuple[tuple[str, UnitRational], ...] | None = None
    inconsistent: bool = False
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.lower is not None and self.lower > self.upper:
            raise ValueError("certified lower bound exceeds the grid upper bound")
        if self.exact != (self.lower is not None and self.lower == self.upper):
            raise ValueError("exact flag must mean lower == upper")

    @property
    def value(self) -> UnitRational | None:
        return self.upper if self.exact else None

    def __str__(self):
        parts = [f"upper={format_rational(self.upper)}",
                 f"lower={format_rational(self.lower) if self.lower is not None else 'none'}",
                 f"grid={self.grid_denominator}",
                 f"exact={'true' if self.exact else 'false'}"]
        if self.exact:
            parts.append(f"value={format_rational(self.upper)}")
        if self.witness is None:
            parts.append("witness=none")
        else:
            shown = ", ".join(f"{k}={format_rational(x)}" for k, x in self.witness)
            parts.append("witness={" + shown + "}")
        if self.inconsistent:
            parts.append("grid-inconsistent")
        return " ".join(parts)


def _theory_denominators(theory: FuzzyTheory, f: Formula) -> int:
    vals = [g for _, g in theory.support()]
    for g in (f, *(h for h, _ in theory.support())):
        vals.extend(constants_of(g))
    return common_denominator(vals)


def grid_denominator_for(theory, f: Formula, n: int | None = None) -> int:
    """The grid actually searched: ``n`` raised to a multiple of every
    occurring denominator, or twice their lcm when ``n`` is omitted."""
    base = _theory_denominators(_as_fuzzy(theory), f)
    if n is None:
        return 2 * base
    if n < 1:
        raise ValueError("grid denominator must be positive")
    return lcm(n, base)


def validity_degree_grid(theory, f: Formula, n: int | None = None, *,
                         budget: int = DEFAULT_BUDGET, split: int = 1) -> DegreeReport:
    """Minimum of ``f`` over grid assignments respecting (or modelling) ``theory``."""
    fuzzy = _as_fuzzy(theory)
    n_eff = grid_denominator_for(fuzzy, f, n)
    warnings = []
    if n is not None and n_eff != n:
        warnings.append(f"grid denominator raised from {n} to {n_eff}")
    objective = _compile(f, n_eff)
    best_val = None
    best_row = None
    names: list[str] = []
    for order, rows in grid_models(fuzzy, n_eff, variables_of(f), budget=budget, split=split):
        names = sorted(order)
        perm = [order.index(x) for x in names]
        rows = rows[:, perm]
        env = {x: rows[:, i] for i, x in enumerate(names)}
        vals = np.broadcast_to(objective(env), (len(rows),))
        low = int(vals.min())
        cand = rows[vals == low]
        # lexsort keys run last to first, so reverse the columns.
        first = cand[np.lexsort(cand.T[::-1])[0]] if cand.shape[1] else cand[0]
        key = (low, tuple(int(x) for x in first))
        if best_val is None or key < (best_val, best_row):
            best_val, best_row = key
    if best_val is None:
        warnings.append("no grid assignment respects the theory")
        return DegreeReport(ONE, None, n_eff, False, None, True, tuple(warnings))
    witness = tuple((x, UnitRational(k, n_eff)) for x, k in zip(names, best_row))
    return DegreeReport(UnitRational(best_val, n_eff), None, n_eff, False, witness,
                        False, tuple(warnings))


def _rpl_theory(theory) -> Theory:
    """Premises available to an RPL certificate over a fuzzy theory."""
    fuzzy = _as_fuzzy(theory)
    out = [Imp(Const(g), f) for f, g in fuzzy.support()]
    out.extend(f for f, g in fuzzy.support() if g == ONE)
    return Theory(out)


def degree_sandwich(theory, f: Formula, certificate, n: int | None = None, *,
                    rules=None, budget: int = DEFAULT_BUDGET) -> DegreeReport:
    """Combine a checked proof (lower bound) with the grid minimum (upper bound).

    A graded certificate must conclude ``(f, r)``; an RPL certificate must
    conclude ``#r -> f`` (or ``f`` itself, read as grade 1).
    """
    from .proofs import GradedProof, check_grpl, check_rpl

    if isinstance(certificate, GradedProof):
        report = check_grpl(certificate, _as_fuzzy(theory), rules=rules)
        if not report.ok:
            raise InvalidCertificate(f"invalid certificate: {report}", report)
        concl = report.conclusion
        if to_base(concl.formula) != to_base(f):
            raise InvalidCertificate(
                f"certificate concludes {to_text(concl.formula)}, not {to_text(f)}", report)
        lower = concl.grade
    else:
        report = check_rpl(certificate, _rpl_theory(theory), rules=rules)
        if not report.ok:
            raise InvalidCertificate(f"invalid certificate: {report}", report)
        concl = to_base(report.conclusion)
        if isinstance(concl, Imp) and isinstance(concl.a, Const) and concl.b == to_base(f):
            lower = concl.a.q
        elif concl == to_base(f):
            lower = ONE
        else:
            raise InvalidCertificate(
                f"certificate concludes {to_text(report.conclusion)}, "
                f"expected #r -> {to_text(f)}", report)
    grid = validity_degree_grid(theory, f, n, budget=budget)
    if lower > grid.upper:
        raise InvalidCertificate("certificate grade exceeds the grid minimum; "
                                 "the checker or the search is unsound", report)
    return DegreeReport(grid.upper, lower, grid.grid_denominator, lower == grid.upper,
                        grid.witness, grid.inconsistent, grid.warnings)
