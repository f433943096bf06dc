"""Proof objects and the trusted checkers for Ł, RPL and GRPL.

The kernel is deliberately small. It recognises instances of the four
Łukasiewicz axiom schemata (instantiated by an explicit substitution, never
by unification), the bookkeeping axioms, hypotheses and modus ponens, plus
the graded axioms and the two graded rules. Every comparison is syntactic
equality after :func:`~pavelka.syntax.to_base`.

A ``Derived`` step is accepted only if the registered rule's template,
instantiated for that step, passes the same kernel; nothing about a derived
rule is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from ..algebra import ONE, ZERO, UnitRational, as_unit, format_rational, mv_conj, mv_imp, mv_neg
from ..syntax import (
    Const,
    Equiv,
    Formula,
    FuzzyTheory,
    GradedFormula,
    Imp,
    Neg,
    Theory,
    Var,
    constants_of,
    match,
    metavariables_of,
    parse,
    substitute,
    to_base,
    to_text,
)

__all__ = [
    "AXIOMS",
    "AxiomL",
    "BookImp",
    "BookNeg",
    "BookOne",
    "BookZero",
    "Hyp",
    "GrConst",
    "GrZero",
    "MP",
    "GMP",
    "Lift",
    "Derived",
    "Justification",
    "ProofLine",
    "GradedProofLine",
    "Proof",
    "GradedProof",
    "CheckReport",
    "book_imp_formula",
    "book_neg_formula",
    "BOOK_ONE",
    "BOOK_ZERO",
    "check_luk",
    "check_rpl",
    "check_grpl",
    "check",
]

AXIOMS: dict[str, Formula] = {
    "A1": parse("Phi -> (Psi -> Phi)"),
    "A2": parse("(Phi -> Psi) -> ((Psi -> Chi) -> (Phi -> Chi))"),
    "A3": parse("((Phi -> Psi) -> Psi) -> ((Psi -> Phi) -> Phi)"),
    "A4": parse("(~Phi -> ~Psi) -> (Psi -> Phi)"),
}


def book_imp_formula(q, r) -> Formula:
    q, r = as_unit(q), as_unit(r)
    return Equiv(Imp(Const(q), Const(r)), Const(mv_imp(q, r)))


def book_neg_formula(q) -> Formula:
    q = as_unit(q)
    return Equiv(Neg(Const(q)), Const(mv_neg(q)))


BOOK_ONE = Equiv(Const(ONE), Const(ONE))
BOOK_ZERO = Equiv(Const(ZERO), Const(ZERO))


# --------------------------------------------------------------------------
# Justifications

def _freeze(binding: Mapping[str, Formula] | Iterable | None) -> tuple:
    if not binding:
        return ()
    items = binding.items() if isinstance(binding, Mapping) else binding
    return tuple(sorted(items, key=lambda kv: kv[0]))


def _show_binding(binding: tuple) -> str:
    return "[" + ", ".join(f"{k} := {to_text(v)}" for k, v in binding) + "]"


@dataclass(frozen=True)
class AxiomL:
    name: str
    binding: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "binding", _freeze(self.binding))

    @property
    def subst(self) -> dict[str, Formula]:
        return dict(self.binding)

    def __str__(self):
        return f"ax {self.name}{_show_binding(self.binding)}"


@dataclass(frozen=True)
class BookImp:
    q: UnitRational
    r: UnitRational

    def __post_init__(self):
        object.__setattr__(self, "q", as_unit(self.q))
        object.__setattr__(self, "r", as_unit(self.r))

    def __str__(self):
        return f"book-imp[{format_rational(self.q)}, {format_rational(self.r)}]"


@dataclass(frozen=True)
class BookNeg:
    q: UnitRational

    def __post_init__(self):
        object.__setattr__(self, "q", as_unit(self.q))

    def __str__(self):
        return f"book-neg[{format_rational(self.q)}]"


@dataclass(frozen=True)
class BookOne:
    def __str__(self):
        return "book-one"


@dataclass(frozen=True)
class BookZero:
    def __str__(self):
        return "book-zero"


@dataclass(frozen=True)
class Hyp:
    def __str__(self):
        return "hyp"


@dataclass(frozen=True)
class GrConst:
    """Graded axiom (B): the constant ``#q`` in grade ``q``."""

    q: UnitRational

    def __post_init__(self):
        object.__setattr__(self, "q", as_unit(self.q))

    def __str__(self):
        return f"ax-const[{format_rational(self.q)}]"


@dataclass(frozen=True)
class GrZero:
    """Graded axiom (D): any formula in grade 0."""

    def __str__(self):
        return "ax-zero"


@dataclass(frozen=True)
class MP:
    minor: int
    major: int

    def __str__(self):
        return f"mp {self.minor} {self.major}"


@dataclass(frozen=True)
class GMP:
    minor: int
    major: int

    def __str__(self):
        return f"gmp {self.minor} {self.major}"


@dataclass(frozen=True)
class Lift:
    ref: int
    r: UnitRational

    def __post_init__(self):
        object.__setattr__(self, "r", as_unit(self.r))

    def __str__(self):
        return f"lift {self.ref} [{format_rational(self.r)}]"


@dataclass(frozen=True)
class Derived:
    rule: str
    refs: tuple[int, ...] = ()
    binding: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "refs", tuple(self.refs))
        object.__setattr__(self, "binding", _freeze(self.binding))

    @property
    def subst(self) -> dict[str, Formula]:
        return dict(self.binding)

    def __str__(self):
        parts = ["dr", self.rule, *map(str, self.refs)]
        if self.binding:
            parts.append(_show_binding(self.binding))
        return " ".join(parts)


Justification = Union[AxiomL, BookImp, BookNeg, BookOne, BookZero, Hyp, GrConst, GrZero,
                      MP, GMP, Lift, Derived]

_BOOK = (BookImp, BookNeg, BookOne, BookZero)


def _refs(j) -> tuple[int, ...]:
    if isinstance(j, (MP, GMP)):
        return (j.minor, j.major)
    if isinstance(j, Lift):
        return (j.ref,)
    if isinstance(j, Derived):
        return j.refs
    return ()


# --------------------------------------------------------------------------
# Proofs

@dataclass(frozen=True)
class ProofLine:
    index: int
    formula: Formula
    justification: Justification


@dataclass(frozen=True)
class GradedProofLine:
    index: int
    formula: Formula
    grade: UnitRational
    justification: Justification

    def __post_init__(self):
        object.__setattr__(self, "grade", as_unit(self.grade))

    @property
    def graded(self) -> GradedFormula:
        return GradedFormula(self.formula, self.grade)


@dataclass(frozen=True)
class Proof:
    lines: tuple[ProofLine, ...]

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    @property
    def conclusion(self) -> Formula | None:
        return self.lines[-1].formula if self.lines else None

    def __len__(self):
        return len(self.lines)

    def __getitem__(self, index: int) -> ProofLine:
        """1-based access matching the line indices."""
        return self.lines[index - 1]

    def uses_derived(self) -> bool:
        return any(isinstance(l.justification, Derived) for l in self.lines)


@dataclass(frozen=True)
class GradedProof:
    lines: tuple[GradedProofLine, ...]

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    @property
    def conclusion(self) -> GradedFormula | None:
        return self.lines[-1].graded if self.lines else None

    def __len__(self):
        return len(self.lines)

    def __getitem__(self, index: int) -> GradedProofLine:
        return self.lines[index - 1]

    def uses_derived(self) -> bool:
        return any(isinstance(l.justification, Derived) for l in self.lines)


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    first_error: tuple[int, str] | None = None
    conclusion: Formula | GradedFormula | None = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            c = self.conclusion
            shown = str(c) if isinstance(c, GradedFormula) else to_text(c)
            return f"OK {shown}"
        line, reason = self.first_error
        return f"FAIL line {line}: {reason}"


class _LineError(Exception):
    pass


# --------------------------------------------------------------------------
# Checking

def _as_theory(theory) -> Theory:
    if theory is None:
        return Theory()
    if isinstance(theory, Theory):
        return theory
    if isinstance(theory, FuzzyTheory):
        return Theory(f for f, g in theory.support() if g == ONE)
    return Theory(theory)


def _as_fuzzy(theory) -> FuzzyTheory:
    if theory is None:
        return FuzzyTheory()
    if isinstance(theory, FuzzyTheory):
        return theory
    return FuzzyTheory.crisp(_as_theory(theory))


def _check_axiom(j: AxiomL, formula: Formula) -> None:
    schema = AXIOMS.get(j.name)
    if schema is None:
        raise _LineError(f"unknown axiom {j.name}")
    subst = j.subst
    wanted = metavariables_of(schema)
    if set(subst) != wanted:
        raise _LineError("bad instantiation: binding must cover exactly "
                         + ", ".join(sorted(wanted)))
    if to_base(substitute(schema, subst)) != to_base(formula):
        raise _LineError("bad instantiation")


_BOOK_IMP_SHAPE = to_base(Equiv(Imp(Var("Q"), Var("R")), Var("K")))
_BOOK_NEG_SHAPE = to_base(Equiv(Neg(Var("Q")), Var("K")))


def _check_book(j, formula: Formula) -> None:
    base = to_base(formula)
    if isinstance(j, BookImp):
        expected = book_imp_formula(j.q, j.r)
        m = match(_BOOK_IMP_SHAPE, base, params=("Q", "R", "K"))
        stated = (j.q, j.r)
    elif isinstance(j, BookNeg):
        expected = book_neg_formula(j.q)
        m = match(_BOOK_NEG_SHAPE, base, params=("Q", "K"))
        stated = (j.q,)
    else:
        expected = BOOK_ONE if isinstance(j, BookOne) else BOOK_ZERO
        if base != to_base(expected):
            raise _LineError("bookkeeping shape mismatch")
        return
    if base == to_base(expected):
        return
    if m is not None:
        found = tuple(m[k].q for k in ("Q", "R")[:len(stated)])
        if found == stated:
            raise _LineError("bookkeeping value mismatch")
    raise _LineError("bookkeeping shape mismatch")


def _ref(refs_ok: int, i: int) -> None:
    if not 1 <= i < refs_ok:
        raise _LineError(f"reference {i} is not an earlier line")


def _check_derived(j: Derived, premises: list[Formula], formula: Formula,
                   system: str, rules) -> None:
    rule = rules.get(j.rule)
    if rule is None:
        raise _LineError(f"unregistered rule {j.rule}")
    if system == "luk" and rule.system != "luk":
        raise _LineError(f"derived rule {j.rule} needs constants; not available in Ł")
    try:
        rules.verify_step(rule, premises, formula, j.subst, system)
    except ValueError as exc:
        raise _LineError(str(exc)) from None


def _run(lines, system: str, theory, rules) -> CheckReport:
    """Shared loop for the three calculi; ``system`` is luk, rpl or grpl."""
    graded = system == "grpl"
    if not lines:
        return CheckReport(False, (0, "empty proof"))
    if rules is None:
        from .rules import default_rules
        rules = default_rules()
    seen: list = []
    for pos, line in enumerate(lines, 1):
        j = line.justification
        f = line.formula
        try:
            if line.index != pos:
                raise _LineError(f"line index {line.index} out of order")
            try:
                for i in _refs(j):
                    _ref(pos, i)
            except _LineError as exc:
                if isinstance(j, (MP, GMP)):
                    raise _LineError(f"{type(j).__name__} shape mismatch: {exc}") from None
                raise
            if system == "luk":
                if constants_of(f):
                    raise _LineError("constant in Ł proof")
                if isinstance(j, _BOOK):
                    raise _LineError("bookkeeping axiom not available in Ł")
            if graded:
                _check_graded_line(j, line, seen, theory, rules)
            else:
                _check_plain_line(j, f, seen, system, theory, rules)
        except _LineError as exc:
            return CheckReport(False, (pos, str(exc)))
        seen.append(line)
    last = lines[-1]
    return CheckReport(True, None, last.graded if graded else last.formula)


def _check_plain_line(j, f, seen, system, theory: Theory, rules) -> None:
    if isinstance(j, AxiomL):
        _check_axiom(j, f)
    elif isinstance(j, _BOOK):
        _check_book(j, f)
    elif isinstance(j, Hyp):
        if f not in theory:
            raise _LineError("hypothesis not in theory")
    elif isinstance(j, MP):
        minor, major = seen[j.minor - 1].formula, seen[j.major - 1].formula
        if to_base(major) != Imp(to_base(minor), to_base(f)):
            raise _LineError("MP shape mismatch")
    elif isinstance(j, Derived):
        _check_derived(j, [seen[i - 1].formula for i in j.refs], f, system, rules)
    else:
        raise _LineError(f"justification {j} not allowed in {system.upper()} proofs")


def _check_graded_line(j, line: GradedProofLine, seen, theory: FuzzyTheory, rules) -> None:
    f, g = line.formula, line.grade
    if isinstance(j, AxiomL):
        _check_axiom(j, f)
        if g != ONE:
            raise _LineError("axiom grade mismatch")
    elif isinstance(j, _BOOK):
        _check_book(j, f)
        if g != ONE:
            raise _LineError("axiom grade mismatch")
    elif isinstance(j, GrConst):
        if to_base(f) != Const(j.q):
            raise _LineError("constant axiom shape mismatch")
        if g != j.q:
            raise _LineError("axiom grade mismatch")
    elif isinstance(j, GrZero):
        if g != ZERO:
            raise _LineError("axiom grade mismatch")
    elif isinstance(j, Hyp):
        if g != theory(f):
            raise _LineError("hypothesis grade mismatch")
    elif isinstance(j, GMP):
        minor, major = seen[j.minor - 1], seen[j.major - 1]
        if to_base(major.formula) != Imp(to_base(minor.formula), to_base(f)):
            raise _LineError("GMP shape mismatch")
        if g != mv_conj(minor.grade, major.grade):
            raise _LineError("grade arithmetic")
    elif isinstance(j, Lift):
        src = seen[j.ref - 1]
        if to_base(f) != Imp(Const(j.r), to_base(src.formula)):
            raise _LineError("lift shape mismatch")
        if g != mv_imp(j.r, src.grade):
            raise _LineError("grade arithmetic")
    elif isinstance(j, Derived):
        if g != ONE or any(seen[i - 1].grade != ONE for i in j.refs):
            raise _LineError("derived rule requires grade 1")
        _check_derived(j, [seen[i - 1].formula for i in j.refs], f, "rpl", rules)
    else:
        raise _LineError(f"justification {j} not allowed in GRPL proofs")


def check_luk(proof: Proof, theory=None, rules=None) -> CheckReport:
    """Check a proof in Łukasiewicz logic (A1-A4, modus ponens, no constants)."""
    return _run(proof.lines, "luk", _as_theory(theory), rules)


def check_rpl(proof: Proof, theory=None, rules=None) -> CheckReport:
    """Check a proof in Rational Pavelka logic (Ł plus bookkeeping axioms)."""
    return _run(proof.lines, "rpl", _as_theory(theory), rules)


def check_grpl(proof: GradedProof, theory=None, rules=None) -> CheckReport:
    """Check a graded proof from a fuzzy theory."""
    return _run(proof.lines, "grpl", _as_fuzzy(theory), rules)


def check(system: str, proof, theory=None, rules=None) -> CheckReport:
    fn = {"luk": check_luk, "rpl": check_rpl, "grpl": check_grpl}[system]
    return fn(proof, theory, rules)
