"""Derived rules: registration, builders, the standard library, expansion.

A derived rule is a named schema ``premises / conclusion`` together with a
template: a function that, for one instantiation of the rule's
metavariables, returns a proof of the conclusion from the premises used as
hypotheses. Templates may themselves use earlier rules. The checkers verify
every ``Derived`` step by building and checking that instance, so a wrong
template is caught on first use; registration additionally probes every
rational parameter with denominator at most 4.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from ..algebra import ONE, ZERO, UnitRational, as_unit, mv_conj, mv_imp, mv_neg
from ..syntax import (
    Const,
    Formula,
    Imp,
    Neg,
    Var,
    match,
    metavariables_of,
    parse,
    substitute,
    to_base,
)
from .core import (
    AXIOMS,
    BOOK_ONE,
    BOOK_ZERO,
    AxiomL,
    BookImp,
    BookNeg,
    BookOne,
    BookZero,
    CheckReport,
    Derived,
    GMP,
    GradedProof,
    GradedProofLine,
    GrConst,
    GrZero,
    Hyp,
    Lift,
    MP,
    Proof,
    ProofLine,
    book_imp_formula,
    book_neg_formula,
    check_luk,
    check_rpl,
)

__all__ = [
    "DerivedRule",
    "RuleRegistry",
    "RuleRegistrationError",
    "ProofBuilder",
    "GradedProofBuilder",
    "PROBE_VALUES",
    "LIBRARY_RULES",
    "default_rules",
    "register_derived_rule",
    "expand_to_kernel",
    "expand_with_origins",
]

#: Rational parameters tried when a rule is registered.
PROBE_VALUES: tuple[UnitRational, ...] = tuple(sorted(
    {UnitRational(p, q) for q in range(1, 5) for p in range(q + 1)}))

#: The named library the translators rely on.
LIBRARY_RULES = ("identity", "transitivity-chain", "exchange", "gmp-sim", "lift-sim", "book-swap")


class RuleRegistrationError(ValueError):
    pass


Template = Callable[["RuleRegistry", dict], Proof]


@dataclass(frozen=True)
class DerivedRule:
    name: str
    premises: tuple[Formula, ...]
    conclusion: Formula
    template: Template = field(compare=False)
    params: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    system: str = "rpl"

    @property
    def inputs(self) -> tuple[str, ...]:
        """Metavariables a caller must determine (formula slots and params)."""
        names = set().union(*(metavariables_of(p) for p in self.premises),
                            metavariables_of(self.conclusion))
        return tuple(sorted(names - set(self.outputs)))

    @property
    def formula_slots(self) -> tuple[str, ...]:
        return tuple(n for n in self.inputs if n not in self.params)


@dataclass(frozen=True)
class TemplateInstance:
    rule: DerivedRule
    proof: Proof
    premises: tuple[Formula, ...]
    conclusion: Formula
    binding: dict
    schema_ok: bool


class RuleRegistry:
    """Mutable while rules are added; :meth:`freeze` makes it read-only."""

    def __init__(self):
        self._rules: dict[str, DerivedRule] = {}
        self._cache: dict = {}
        self.frozen = False

    def __contains__(self, name):
        return name in self._rules

    def __iter__(self):
        return iter(self._rules.values())

    def get(self, name: str) -> DerivedRule | None:
        return self._rules.get(name)

    def names(self) -> list[str]:
        return list(self._rules)

    def freeze(self) -> "RuleRegistry":
        self.frozen = True
        return self

    def copy(self) -> "RuleRegistry":
        new = RuleRegistry()
        new._rules = dict(self._rules)
        return new

    # -- registration -----------------------------------------------------

    def register(self, name: str, premises: Sequence[Formula | str], conclusion: Formula | str,
                 template: Template | Proof, *, params: Iterable[str] = (),
                 outputs: Iterable[str] = (), system: str = "rpl", probe: bool = True) -> str:
        if self.frozen:
            raise RuleRegistrationError("registry is frozen")
        if name in self._rules:
            raise RuleRegistrationError(f"rule {name} already registered")
        if system not in ("luk", "rpl"):
            raise RuleRegistrationError(f"unknown system {system}")
        as_f = lambda f: parse(f) if isinstance(f, str) else f
        if isinstance(template, Proof):
            template = _static_template(template)
        rule = DerivedRule(name, tuple(map(as_f, premises)), as_f(conclusion), template,
                           tuple(params), tuple(outputs), system)
        if probe:
            self._probe(rule)
        self._rules[name] = rule
        return name

    def _probe(self, rule: DerivedRule) -> None:
        slots = rule.formula_slots
        simple = {s: Var(f"p{k}") for k, s in enumerate(slots, 1)}
        compound_pool = [parse("p1 -> p2"), parse("~p3"), parse("p2 -> ~(p1 -> p3)")]
        compound = {s: compound_pool[k % len(compound_pool)] for k, s in enumerate(slots)}
        for values in itertools.product(PROBE_VALUES, repeat=len(rule.params)):
            for slot_binding in (simple, compound):
                binding = dict(slot_binding)
                binding.update({p: Const(v) for p, v in zip(rule.params, values)})
                try:
                    inst = self._instantiate(rule, binding)
                    report = self.report(inst, rule.system)
                except Exception as exc:  # noqa: BLE001 - report any template crash
                    raise RuleRegistrationError(
                        f"template of {rule.name} failed for {_show(binding)}: {exc}") from exc
                if not report.ok:
                    raise RuleRegistrationError(
                        f"template of {rule.name} fails kernel check for {_show(binding)}: "
                        f"{report}")

    # -- instantiation ----------------------------------------------------

    def _instantiate(self, rule: DerivedRule, binding: Mapping[str, Formula]) -> TemplateInstance:
        key = (rule.name, tuple(sorted((k, to_base(v)) for k, v in binding.items()
                                       if k in rule.inputs)))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        inputs = {k: binding[k] for k in rule.inputs}
        for p in rule.params:
            if not isinstance(to_base(inputs[p]), Const):
                raise ValueError(f"parameter {p} of {rule.name} must be a constant")
        proof = rule.template(self, {k: to_base(v) if k in rule.params else v
                                     for k, v in inputs.items()})
        premises = tuple(substitute(p, inputs) for p in rule.premises)
        full = match(to_base(rule.conclusion), to_base(proof.conclusion),
                     {k: to_base(v) for k, v in inputs.items()},
                     params=(*rule.params, *rule.outputs))
        schema_ok = full is not None
        if full is None:
            full = {**inputs, **{k: Const(ZERO) for k in rule.outputs}}
        for k, v in inputs.items():
            full[k] = v
        conclusion = substitute(rule.conclusion, full)
        inst = TemplateInstance(rule, proof, premises, conclusion, full, schema_ok)
        self._cache[key] = inst
        return inst

    def report(self, inst: TemplateInstance, system: str) -> CheckReport:
        """Kernel verdict on a template instance, for use inside ``system``.

        Rules registered for Ł are constant-free schemata, but their
        instances inside RPL proofs may mention constants, so the checker
        follows the context rather than the rule.
        """
        key = (id(inst), system)
        hit = self._cache.get(key)
        if hit is not None:
            return hit[1]
        checker = check_luk if system == "luk" else check_rpl
        report = checker(inst.proof, inst.premises, rules=self)
        if report.ok and not inst.schema_ok:
            report = CheckReport(False, (len(inst.proof),
                                         "template conclusion does not match schema"))
        self._cache[key] = (inst, report)
        return report

    def resolve(self, rule: DerivedRule, premises: Sequence[Formula],
                conclusion: Formula | None = None,
                binding: Mapping[str, Formula] | None = None) -> dict:
        """Determine a full binding from explicit entries plus matching."""
        if len(premises) != len(rule.premises):
            raise ValueError(f"derived rule {rule.name} expects {len(rule.premises)} premises")
        given = dict(binding or {})
        acc = {k: to_base(v) for k, v in given.items()}
        params = (*rule.params, *rule.outputs)
        for schema, prem in zip(rule.premises, premises):
            acc = match(to_base(schema), to_base(prem), acc, params=params)
            if acc is None:
                raise ValueError("derived rule premise mismatch")
        if conclusion is not None:
            got = match(to_base(rule.conclusion), to_base(conclusion), acc, params=params)
            if got is None:
                raise ValueError("derived rule conclusion mismatch")
            acc = got
        missing = [k for k in rule.inputs if k not in acc]
        if missing:
            raise ValueError(f"derived rule {rule.name}: cannot determine {missing[0]}")
        # Keep caller-supplied spellings; matched values are base forms.
        acc.update({k: v for k, v in given.items()})
        return acc

    def instance(self, rule: DerivedRule | str, premises: Sequence[Formula],
                 conclusion: Formula | None = None,
                 binding: Mapping[str, Formula] | None = None) -> TemplateInstance:
        if isinstance(rule, str):
            rule = self._rules[rule]
        full = self.resolve(rule, premises, conclusion, binding)
        return self._instantiate(rule, full)

    def verify_step(self, rule: DerivedRule, premises: Sequence[Formula], formula: Formula,
                    binding: Mapping[str, Formula] | None = None,
                    system: str = "rpl") -> TemplateInstance:
        inst = self.instance(rule, premises, formula, binding)
        report = self.report(inst, system)
        if not report.ok:
            line, reason = report.first_error
            raise ValueError(f"derived rule {rule.name} template fails at line {line}: {reason}")
        if to_base(inst.conclusion) != to_base(formula):
            raise ValueError("derived rule conclusion mismatch")
        for want, got in zip(inst.premises, premises):
            if to_base(want) != to_base(got):
                raise ValueError("derived rule premise mismatch")
        return inst


def _show(binding) -> str:
    from ..syntax import to_text
    return "{" + ", ".join(f"{k} := {to_text(v)}" for k, v in sorted(binding.items())) + "}"


def _static_template(proof: Proof) -> Template:
    """Turn a proof written over metavariables into a template."""

    def build(registry, binding):
        def sub_j(j):
            if isinstance(j, AxiomL):
                return AxiomL(j.name, {k: substitute(v, binding) for k, v in j.binding})
            if isinstance(j, Derived):
                return Derived(j.rule, j.refs, {k: substitute(v, binding) for k, v in j.binding})
            return j
        return Proof(tuple(ProofLine(l.index, substitute(l.formula, binding), sub_j(l.justification))
                           for l in proof.lines))

    return build


def register_derived_rule(name, premises, conclusion, template, *, registry: RuleRegistry,
                          params=(), outputs=(), system="rpl") -> str:
    """Register a rule after probing its template; returns the rule id."""
    return registry.register(name, premises, conclusion, template, params=params,
                             outputs=outputs, system=system)


# --------------------------------------------------------------------------
# Builders

class ProofBuilder:
    """Append-only construction of kernel or tier-2 proofs.

    Every method returns the 1-based index of the line it added. ``source``
    tags each new line for provenance bookkeeping in the translators.
    """

    def __init__(self, registry: RuleRegistry | None = None):
        self.registry = registry
        self.lines: list[ProofLine] = []
        self.provenance: list = []
        self.source = "glue"

    def _add(self, formula: Formula, just) -> int:
        idx = len(self.lines) + 1
        self.lines.append(ProofLine(idx, formula, just))
        self.provenance.append(self.source)
        return idx

    def f(self, i: int) -> Formula:
        return self.lines[i - 1].formula

    def hyp(self, formula: Formula) -> int:
        return self._add(formula, Hyp())

    def ax(self, name: str, **binding: Formula) -> int:
        return self._add(substitute(AXIOMS[name], binding), AxiomL(name, binding))

    def book_imp(self, q, r) -> int:
        return self._add(book_imp_formula(q, r), BookImp(q, r))

    def book_neg(self, q) -> int:
        return self._add(book_neg_formula(q), BookNeg(q))

    def book_one(self) -> int:
        return self._add(BOOK_ONE, BookOne())

    def book_zero(self) -> int:
        return self._add(BOOK_ZERO, BookZero())

    def mp(self, minor: int, major: int) -> int:
        return self._add(_consequent(self.f(major)), MP(minor, major))

    def dr(self, name: str, *refs: int, **binding: Formula) -> int:
        inst = self.registry.instance(name, [self.f(i) for i in refs], None, binding)
        return self._add(inst.conclusion, Derived(name, refs, inst.binding))

    def script(self, steps, **binding: Formula) -> int:
        """Replay a fixed axiom/MP script; returns the index of its last line."""
        local = {}
        for k, step in enumerate(steps, 1):
            if step[0] == "mp":
                local[k] = self.mp(local[step[1]], local[step[2]])
            else:
                _, name, sub = step
                local[k] = self.ax(name, **{m: substitute(_schema(s), binding)
                                            for m, s in sub.items()})
        return local[len(steps)]

    def proof(self) -> Proof:
        return Proof(tuple(self.lines))


class GradedProofBuilder:
    """Builder for graded proofs; mirrors :class:`ProofBuilder`."""

    def __init__(self, registry: RuleRegistry | None = None):
        self.registry = registry
        self.lines: list[GradedProofLine] = []
        self.provenance: list = []
        self.source = "glue"

    def _add(self, formula, grade, just) -> int:
        idx = len(self.lines) + 1
        self.lines.append(GradedProofLine(idx, formula, as_unit(grade), just))
        self.provenance.append(self.source)
        return idx

    def f(self, i: int) -> Formula:
        return self.lines[i - 1].formula

    def grade(self, i: int) -> UnitRational:
        return self.lines[i - 1].grade

    def hyp(self, formula: Formula, grade) -> int:
        return self._add(formula, grade, Hyp())

    def ax(self, name: str, **binding: Formula) -> int:
        return self._add(substitute(AXIOMS[name], binding), ONE, AxiomL(name, binding))

    def book(self, just) -> int:
        if isinstance(just, BookImp):
            formula = book_imp_formula(just.q, just.r)
        elif isinstance(just, BookNeg):
            formula = book_neg_formula(just.q)
        else:
            formula = BOOK_ONE if isinstance(just, BookOne) else BOOK_ZERO
        return self._add(formula, ONE, just)

    def const(self, q) -> int:
        q = as_unit(q)
        return self._add(Const(q), q, GrConst(q))

    def zero(self, formula: Formula) -> int:
        return self._add(formula, ZERO, GrZero())

    def gmp(self, minor: int, major: int) -> int:
        return self._add(_consequent(self.f(major)),
                         mv_conj(self.grade(minor), self.grade(major)), GMP(minor, major))

    def lift(self, ref: int, r) -> int:
        r = as_unit(r)
        return self._add(Imp(Const(r), self.f(ref)), mv_imp(r, self.grade(ref)), Lift(ref, r))

    def dr(self, name: str, *refs: int, **binding: Formula) -> int:
        inst = self.registry.instance(name, [self.f(i) for i in refs], None, binding)
        return self._add(inst.conclusion, ONE, Derived(name, refs, inst.binding))

    def proof(self) -> GradedProof:
        return GradedProof(tuple(self.lines))


def _consequent(f: Formula) -> Formula:
    if isinstance(f, Imp):
        return f.b
    base = to_base(f)
    if not isinstance(base, Imp):
        raise ValueError("modus ponens on a non-implication")
    return base.b


@lru_cache(maxsize=None)
def _schema(text: str) -> Formula:
    return parse(text)


# --------------------------------------------------------------------------
# Kernel scripts found by condensed detachment over A1-A4.

_IDENTITY = [
    ("ax", "A1", {"Phi": "Phi", "Psi": "Phi"}),
    ("ax", "A1", {"Phi": "Phi -> Phi -> Phi", "Psi": "Phi -> Phi -> Phi -> Phi"}),
    ("mp", 1, 2),
    ("ax", "A3", {"Phi": "Phi", "Psi": "Phi -> Phi -> Phi"}),
    ("mp", 3, 4),
    ("ax", "A1", {"Phi": "Phi", "Psi": "Phi -> Phi -> Phi"}),
    ("ax", "A2", {"Phi": "Phi", "Psi": "(Phi -> Phi -> Phi) -> Phi", "Chi": "Phi"}),
    ("mp", 6, 7),
    ("mp", 5, 8),
]

_EXCHANGE = [
    ("ax", "A3", {"Phi": "Chi", "Psi": "Psi"}),
    ("ax", "A1", {"Phi": "Psi", "Psi": "Chi -> Psi"}),
    ("ax", "A2", {"Phi": "Psi", "Psi": "(Chi -> Psi) -> Psi", "Chi": "(Psi -> Chi) -> Chi"}),
    ("mp", 2, 3),
    ("mp", 1, 4),
    ("ax", "A2", {"Phi": "Phi", "Psi": "Psi -> Chi", "Chi": "Chi"}),
    ("ax", "A2", {"Phi": "Phi -> Psi -> Chi", "Psi": "((Psi -> Chi) -> Chi) -> Phi -> Chi",
                  "Chi": "Psi -> Phi -> Chi"}),
    ("mp", 6, 7),
    ("ax", "A2", {"Phi": "Psi", "Psi": "(Psi -> Chi) -> Chi", "Chi": "Phi -> Chi"}),
    ("ax", "A2", {"Phi": "Psi -> (Psi -> Chi) -> Chi",
                  "Psi": "(((Psi -> Chi) -> Chi) -> Phi -> Chi) -> Psi -> Phi -> Chi",
                  "Chi": "(Phi -> Psi -> Chi) -> Psi -> Phi -> Chi"}),
    ("mp", 9, 10),
    ("mp", 8, 11),
    ("mp", 5, 12),
]

_DNE = [
    *_IDENTITY[:5],
    ("ax", "A4", {"Phi": "Phi", "Psi": "Phi -> Phi -> Phi"}),
    ("ax", "A2", {"Phi": "~Phi -> ~(Phi -> Phi -> Phi)", "Psi": "(Phi -> Phi -> Phi) -> Phi",
                  "Chi": "Phi"}),
    ("mp", 6, 7),
    ("mp", 5, 8),
    ("ax", "A4", {"Phi": "~(Phi -> Phi -> Phi)", "Psi": "~Phi"}),
    ("ax", "A1", {"Phi": "~~Phi", "Psi": "~~(Phi -> Phi -> Phi)"}),
    ("ax", "A2", {"Phi": "~~Phi", "Psi": "~~(Phi -> Phi -> Phi) -> ~~Phi",
                  "Chi": "~Phi -> ~(Phi -> Phi -> Phi)"}),
    ("mp", 11, 12),
    ("mp", 10, 13),
    ("ax", "A2", {"Phi": "~~Phi", "Psi": "~Phi -> ~(Phi -> Phi -> Phi)", "Chi": "Phi"}),
    ("mp", 14, 15),
    ("mp", 9, 16),
]

_DNI = [
    ("ax", "A1", {"Phi": "Phi", "Psi": "Phi"}),
    ("ax", "A1", {"Phi": "Phi -> Phi -> Phi", "Psi": "~Phi -> Phi -> Phi -> Phi"}),
    ("mp", 1, 2),
    ("ax", "A3", {"Phi": "~Phi", "Psi": "Phi -> Phi -> Phi"}),
    ("mp", 3, 4),
    ("ax", "A4", {"Phi": "~Phi", "Psi": "Phi -> Phi -> Phi"}),
    ("ax", "A2", {"Phi": "~~Phi -> ~(Phi -> Phi -> Phi)", "Psi": "(Phi -> Phi -> Phi) -> ~Phi",
                  "Chi": "~Phi"}),
    ("mp", 6, 7),
    ("mp", 5, 8),
    ("ax", "A4", {"Phi": "~(Phi -> Phi -> Phi)", "Psi": "~~Phi"}),
    ("ax", "A1", {"Phi": "~~~Phi", "Psi": "~~(Phi -> Phi -> Phi)"}),
    ("ax", "A2", {"Phi": "~~~Phi", "Psi": "~~(Phi -> Phi -> Phi) -> ~~~Phi",
                  "Chi": "~~Phi -> ~(Phi -> Phi -> Phi)"}),
    ("mp", 11, 12),
    ("mp", 10, 13),
    ("ax", "A2", {"Phi": "~~~Phi", "Psi": "~~Phi -> ~(Phi -> Phi -> Phi)", "Chi": "~Phi"}),
    ("mp", 14, 15),
    ("mp", 9, 16),
    ("ax", "A4", {"Phi": "~~Phi", "Psi": "Phi"}),
    ("mp", 17, 18),
]


# --------------------------------------------------------------------------
# Library templates. Each receives the builder and the binding by keyword.

def _t(fn):
    def template(registry, binding):
        b = ProofBuilder(registry)
        fn(b, **binding)
        return b.proof()
    template.__name__ = fn.__name__
    return template


@_t
def _identity(b, Phi):
    b.script(_IDENTITY, Phi=Phi)


@_t
def _exchange(b, Phi, Psi, Chi):
    h = b.hyp(Imp(Phi, Imp(Psi, Chi)))
    thm = b.script(_EXCHANGE, Phi=Phi, Psi=Psi, Chi=Chi)
    b.mp(h, thm)


@_t
def _transitivity(b, Phi, Psi, Chi):
    h1 = b.hyp(Imp(Phi, Psi))
    h2 = b.hyp(Imp(Psi, Chi))
    a2 = b.ax("A2", Phi=Phi, Psi=Psi, Chi=Chi)
    b.mp(h2, b.mp(h1, a2))


@_t
def _dne(b, Phi):
    b.script(_DNE, Phi=Phi)


@_t
def _dni(b, Phi):
    b.script(_DNI, Phi=Phi)


@_t
def _suffix(b, Phi, Psi, Chi):
    h = b.hyp(Imp(Phi, Psi))
    b.mp(h, b.ax("A2", Phi=Phi, Psi=Psi, Chi=Chi))


@_t
def _prefix(b, Phi, Psi, Chi):
    h = b.hyp(Imp(Psi, Chi))
    a2 = b.ax("A2", Phi=Phi, Psi=Psi, Chi=Chi)
    swapped = b.dr("exchange", a2)
    b.mp(h, swapped)


def _trans(b, i, j):
    return b.dr("transitivity-chain", i, j)


@_t
def _contrapose(b, Phi, Psi):
    h = b.hyp(Imp(Phi, Psi))
    left = _trans(b, b.dr("dne", Phi=Phi), h)
    both = _trans(b, left, b.dr("dni", Phi=Psi))
    a4 = b.ax("A4", Phi=Neg(Phi), Psi=Neg(Psi))
    b.mp(both, a4)


@_t
def _contraposition(b, Phi, Psi):
    a2 = b.ax("A2", Phi=Neg(Neg(Phi)), Psi=Phi, Chi=Psi)
    first = b.mp(b.dr("dne", Phi=Phi), a2)
    second = b.dr("prefix", b.dr("dni", Phi=Psi), Phi=Neg(Neg(Phi)))
    third = b.ax("A4", Phi=Neg(Phi), Psi=Neg(Psi))
    _trans(b, _trans(b, first, second), third)


@_t
def _uncurry(b, Phi, Psi, Chi):
    h = b.hyp(Imp(Phi, Imp(Psi, Chi)))
    inner = _trans(b, h, b.dr("contraposition", Phi=Psi, Psi=Chi))
    swapped = b.dr("exchange", inner)
    flipped = b.dr("contrapose", swapped)
    _trans(b, flipped, b.dr("dne", Phi=Chi))


def _conj_parts(Phi, Psi):
    fwd = Imp(Phi, Psi)
    return fwd, Imp(fwd, Imp(Psi, Phi))


@_t
def _equiv_elim_l(b, Phi, Psi):
    from ..syntax import Equiv
    p, r = _conj_parts(Phi, Psi)
    a4 = b.ax("A4", Phi=Neg(r), Psi=Neg(p))
    a1 = b.ax("A1", Phi=Neg(Neg(p)), Psi=Neg(Neg(r)))
    step = b.dr("exchange", _trans(b, a1, a4))
    flipped = b.dr("contrapose", step)
    out = _trans(b, flipped, b.dr("dne", Phi=p))
    b.mp(b.hyp(Equiv(Phi, Psi)), out)


@_t
def _equiv_elim_r(b, Phi, Psi):
    from ..syntax import Equiv
    p, r = _conj_parts(Phi, Psi)
    mp_form = b.dr("exchange", b.dr("identity", Phi=r))
    lifted = _trans(b, b.dr("dne", Phi=p), mp_form)
    out = b.dr("uncurry", lifted)
    b.mp(b.hyp(Equiv(Phi, Psi)), out)


@_t
def _one_intro(b):
    eq = b.book_imp(ONE, ONE)
    fwd = b.dr("equiv-elim-l", eq)
    b.mp(b.dr("identity", Phi=Const(ONE)), fwd)


@_t
def _ex_falso(b, Phi):
    one = b.dr("one-intro")
    weak = b.mp(one, b.ax("A1", Phi=Const(ONE), Psi=Neg(Phi)))
    back = b.dr("equiv-elim-r", b.book_neg(ZERO))
    chain = _trans(b, weak, back)
    b.mp(chain, b.ax("A4", Phi=Phi, Psi=Const(ZERO)))


@_t
def _book_swap(b, Phi, R, Q):
    h = b.hyp(Imp(Imp(R, Q), Phi))
    back = b.dr("equiv-elim-r", b.book_imp(R.q, Q.q))
    _trans(b, back, h)


@_t
def _lift_sim(b, Phi, Q, R):
    h = b.hyp(Imp(Q, Phi))
    pre = b.dr("prefix", h, Phi=R)
    b.dr("book-swap", pre, R=R, Q=Q)


@_t
def _gmp_sim(b, Phi, Psi, R, S):
    r, s = R.q, S.q
    u = mv_neg(s)
    w = mv_imp(r, u)
    h1 = b.hyp(Imp(R, Phi))
    h2 = b.hyp(Imp(S, Imp(Phi, Psi)))
    curried = _trans(b, h1, b.dr("exchange", h2))
    tail = b.dr("uncurry", curried)
    # #t -> ~#w -> ~(#r -> #u) -> ~(#r -> ~#s) -> Psi
    t_to_nw = b.dr("equiv-elim-r", b.book_neg(w))
    nw_to = b.dr("contrapose", b.dr("equiv-elim-l", b.book_imp(r, u)))
    ns_to_u = b.dr("equiv-elim-l", b.book_neg(s))
    mid = b.dr("contrapose", b.dr("prefix", ns_to_u, Phi=R))
    _trans(b, _trans(b, _trans(b, t_to_nw, nw_to), mid), tail)


def _build_library() -> RuleRegistry:
    reg = RuleRegistry()
    add = reg.register
    add("identity", [], "Phi -> Phi", _identity, system="luk")
    add("exchange", ["Phi -> (Psi -> Chi)"], "Psi -> (Phi -> Chi)", _exchange, system="luk")
    add("transitivity-chain", ["Phi -> Psi", "Psi -> Chi"], "Phi -> Chi", _transitivity,
        system="luk")
    add("dne", [], "~~Phi -> Phi", _dne, system="luk")
    add("dni", [], "Phi -> ~~Phi", _dni, system="luk")
    add("suffix", ["Phi -> Psi"], "(Psi -> Chi) -> (Phi -> Chi)", _suffix, system="luk")
    add("prefix", ["Psi -> Chi"], "(Phi -> Psi) -> (Phi -> Chi)", _prefix, system="luk")
    add("contrapose", ["Phi -> Psi"], "~Psi -> ~Phi", _contrapose, system="luk")
    add("contraposition", [], "(Phi -> Psi) -> (~Psi -> ~Phi)", _contraposition, system="luk")
    add("uncurry", ["Phi -> (Psi -> Chi)"], "~(Phi -> ~Psi) -> Chi", _uncurry, system="luk")
    add("equiv-elim-l", ["Phi <-> Psi"], "Phi -> Psi", _equiv_elim_l, system="luk")
    add("equiv-elim-r", ["Phi <-> Psi"], "Psi -> Phi", _equiv_elim_r, system="luk")
    add("one-intro", [], "#1", _one_intro)
    add("ex-falso", [], "#0 -> Phi", _ex_falso)
    add("book-swap", ["(R -> Q) -> Phi"], "K -> Phi", _book_swap,
        params=("R", "Q"), outputs=("K",))
    add("lift-sim", ["Q -> Phi"], "K -> (R -> Phi)", _lift_sim,
        params=("Q", "R"), outputs=("K",))
    add("gmp-sim", ["R -> Phi", "S -> (Phi -> Psi)"], "T -> Psi", _gmp_sim,
        params=("R", "S"), outputs=("T",))
    return reg.freeze()


_DEFAULT: RuleRegistry | None = None


def default_rules() -> RuleRegistry:
    """The frozen standard library, built and probed on first use."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = _build_library()
    return _DEFAULT


# --------------------------------------------------------------------------
# Expansion

def _remap(j, m: dict[int, int]):
    if isinstance(j, MP):
        return MP(m[j.minor], m[j.major])
    if isinstance(j, GMP):
        return GMP(m[j.minor], m[j.major])
    if isinstance(j, Lift):
        return Lift(m[j.ref], j.r)
    if isinstance(j, Derived):
        return Derived(j.rule, tuple(m[i] for i in j.refs), j.binding)
    return j


def _splice(inst: TemplateInstance, refs: Sequence[int], emit, rules) -> int:
    """Emit the kernel form of a template instance; returns its last index."""
    kernel = expand_to_kernel(inst.proof, rules)
    hyp_target = {}
    for prem, ref in zip(inst.premises, refs):
        hyp_target.setdefault(to_base(prem), ref)
    local: dict[int, int] = {}
    for tl in kernel.lines:
        if isinstance(tl.justification, Hyp):
            local[tl.index] = hyp_target[to_base(tl.formula)]
        else:
            local[tl.index] = emit(tl.formula, _remap(tl.justification, local))
    return local[len(kernel.lines)]


def expand_to_kernel(proof: Proof | GradedProof, rules: RuleRegistry | None = None):
    """Replace every ``Derived`` step by its (recursively expanded) template.

    Graded proofs keep their graded lines; a grade-1 derived step becomes
    grade-1 axioms and graded modus ponens.
    """
    return expand_with_origins(proof, rules)[0]


def expand_with_origins(proof: Proof | GradedProof, rules: RuleRegistry | None = None):
    """As :func:`expand_to_kernel`, also returning for every output line the
    index of the input line it was produced for."""
    rules = rules or default_rules()
    graded = isinstance(proof, GradedProof)
    out: list = []
    origins: list[int] = []
    where: dict[int, int] = {}
    current = [0]

    def emit(formula, just, grade=ONE):
        idx = len(out) + 1
        if graded:
            if isinstance(just, MP):
                just = GMP(just.minor, just.major)
            out.append(GradedProofLine(idx, formula, grade, just))
        else:
            out.append(ProofLine(idx, formula, just))
        origins.append(current[0])
        return idx

    for line in proof.lines:
        j = line.justification
        current[0] = line.index
        if isinstance(j, Derived):
            rule = rules.get(j.rule)
            if rule is None:
                raise KeyError(f"unregistered rule {j.rule}")
            prem = [proof[i].formula for i in j.refs]
            inst = rules.instance(rule, prem, line.formula, j.subst)
            last = _splice(inst, [where[i] for i in j.refs], emit, rules)
            if last == len(out):
                old = out[-1]
                out[-1] = (GradedProofLine(old.index, line.formula, old.grade, old.justification)
                           if graded else ProofLine(old.index, line.formula, old.justification))
            where[line.index] = last
        else:
            where[line.index] = emit(line.formula, _remap(j, where),
                                     line.grade if graded else ONE)
    return (GradedProof(tuple(out)) if graded else Proof(tuple(out))), origins
