"""Constructive translations between RPL and GRPL proofs.

Each translator checks its input, builds the target proof line by line and
re-checks the result with the target checker before returning it. Outputs
use the registered derived rules; ``kernel=True`` expands them away.

Every output line carries provenance: the index of the source line it
stands for, or ``"glue"`` for auxiliary steps.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import ONE, ZERO, as_unit
from .proofs import (
    GMP,
    MP,
    AxiomL,
    BookImp,
    BookNeg,
    BookOne,
    BookZero,
    CheckReport,
    Derived,
    GradedProof,
    GradedProofBuilder,
    GrConst,
    GrZero,
    Hyp,
    Lift,
    Proof,
    ProofBuilder,
    RuleRegistry,
    check_grpl,
    check_rpl,
    default_rules,
    expand_with_origins,
)
from .syntax import Const, Formula, FuzzyTheory, GradedFormula, Imp, Theory

__all__ = [
    "TranslationError",
    "TranslationResult",
    "push_pull",
    "grpl_to_rpl",
    "rpl_to_grpl",
    "normalize_grades",
    "grpl_self_embed",
    "rpl_theory_of",
]

_BOOK = (BookImp, BookNeg, BookOne, BookZero)


class TranslationError(ValueError):
    """The source proof is invalid or violates the translator's precondition."""


@dataclass(frozen=True)
class TranslationResult:
    output: Proof | GradedProof
    theory: Theory | FuzzyTheory
    conclusion: Formula | GradedFormula
    provenance: tuple
    report: CheckReport

    @property
    def system(self) -> str:
        return "grpl" if isinstance(self.output, GradedProof) else "rpl"

    def all_grades_one(self) -> bool:
        return (isinstance(self.output, GradedProof)
                and all(l.grade == ONE for l in self.output.lines))


def rpl_theory_of(theory: FuzzyTheory) -> Theory:
    """``{#r -> psi | (psi, r) in the support}``."""
    return Theory(Imp(Const(g), f) for f, g in theory.support())


def _fuzzy(theory) -> FuzzyTheory:
    if theory is None:
        return FuzzyTheory()
    if isinstance(theory, FuzzyTheory):
        return theory
    return FuzzyTheory.crisp(theory)


def _crisp(theory) -> Theory:
    if theory is None:
        return Theory()
    if isinstance(theory, Theory):
        return theory
    if isinstance(theory, FuzzyTheory):
        if not theory.is_crisp():
            raise TranslationError("an RPL theory must be crisp")
        return Theory(f for f, _ in theory.support())
    return Theory(theory)


def _finish(builder, theory, rules, kernel: bool) -> TranslationResult:
    proof = builder.proof()
    prov = list(builder.provenance)
    if kernel:
        proof, origins = expand_with_origins(proof, rules)
        prov = [prov[k - 1] for k in origins]
    if isinstance(proof, GradedProof):
        report = check_grpl(proof, theory, rules=rules)
    else:
        report = check_rpl(proof, theory, rules=rules)
    if not report.ok:
        raise TranslationError(f"translation produced an invalid proof: {report}")
    return TranslationResult(proof, theory, report.conclusion, tuple(prov), report)


# --------------------------------------------------------------------------
# Graded push and pull

def push_pull(direction: str, q, formula: Formula, *, rules: RuleRegistry | None = None
              ) -> TranslationResult:
    """Move a grade into the formula (``forward``) or back out (``backward``).

    Forward derives ``(#q -> phi, 1)`` from ``(phi, q)`` by lifting with
    ``r = q``; backward derives ``(phi, q)`` from ``(#q -> phi, 1)`` with the
    constant axiom and graded modus ponens.
    """
    q = as_unit(q)
    rules = rules or default_rules()
    b = GradedProofBuilder(rules)
    b.source = 1
    if direction == "forward":
        h = b.hyp(formula, q)
        b.source = "glue"
        b.lift(h, q)
        theory = FuzzyTheory([(formula, q)])
    elif direction == "backward":
        pushed = Imp(Const(q), formula)
        h = b.hyp(pushed, ONE)
        b.source = "glue"
        b.gmp(b.const(q), h)
        theory = FuzzyTheory([(pushed, ONE)])
    else:
        raise ValueError("direction must be 'forward' or 'backward'")
    return _finish(b, theory, rules, False)


# --------------------------------------------------------------------------
# The embedding of GRPL into RPL, written once for three targets.

class _Target:
    """Emits the RPL image of a graded proof into a plain or grade-1 builder.

    ``premise`` decides how a hypothesis ``(psi, r)`` enters: as an RPL
    hypothesis ``#r -> psi``, as a grade-1 graded hypothesis of the same
    formula, or through push glue from ``(psi, 1)``.
    """

    def __init__(self, rules, graded: bool, premise: str):
        self.graded = graded
        self.premise_mode = premise
        self.b = GradedProofBuilder(rules) if graded else ProofBuilder(rules)

    def ax(self, name, **binding):
        return self.b.ax(name, **binding)

    def book(self, just):
        if self.graded:
            return self.b.book(just)
        return {BookImp: lambda: self.b.book_imp(just.q, just.r),
                BookNeg: lambda: self.b.book_neg(just.q),
                BookOne: self.b.book_one,
                BookZero: self.b.book_zero}[type(just)]()

    def mp(self, i, j):
        return self.b.gmp(i, j) if self.graded else self.b.mp(i, j)

    def dr(self, name, *refs, **binding):
        return self.b.dr(name, *refs, **binding)

    def push(self, i):
        """From ``phi`` at line ``i`` derive ``#1 -> phi``."""
        f = self.b.f(i)
        return self.mp(i, self.ax("A1", Phi=f, Psi=Const(ONE)))

    def pull(self, i):
        """From ``#1 -> phi`` at line ``i`` derive ``phi``."""
        return self.mp(self.dr("one-intro"), i)

    def premise(self, formula, grade):
        pushed = Imp(Const(grade), formula)
        if self.premise_mode == "glue":
            if grade != ONE:
                raise TranslationError("grade normalisation needs a theory in grade 1")
            return self.push(self.b.hyp(formula, ONE))
        if self.graded:
            return self.b.hyp(pushed, ONE)
        return self.b.hyp(pushed)


def _embed(proof: GradedProof, theory: FuzzyTheory, target: _Target) -> int:
    b = target.b
    b.source = "glue"
    image: dict[int, int] = {}
    for line in proof.lines:
        j, f, g = line.justification, line.formula, line.grade
        if isinstance(j, AxiomL):
            last = target.push(target.ax(j.name, **j.subst))
        elif isinstance(j, _BOOK):
            last = target.push(target.book(j))
        elif isinstance(j, GrConst):
            last = target.dr("identity", Phi=f)
        elif isinstance(j, GrZero) or (isinstance(j, Hyp) and g == ZERO):
            last = target.dr("ex-falso", Phi=f)
        elif isinstance(j, Hyp):
            last = target.premise(f, g)
        elif isinstance(j, GMP):
            minor, major = proof[j.minor], proof[j.major]
            last = target.dr("gmp-sim", image[j.minor], image[j.major],
                             Phi=minor.formula, Psi=f,
                             R=Const(minor.grade), S=Const(major.grade))
        elif isinstance(j, Lift):
            src = proof[j.ref]
            last = target.dr("lift-sim", image[j.ref], Phi=src.formula,
                             Q=Const(src.grade), R=Const(j.r))
        elif isinstance(j, Derived):
            pulled = [target.pull(image[i]) for i in j.refs]
            last = target.push(target.dr(j.rule, *pulled, **j.subst))
        else:
            raise TranslationError(f"line {line.index}: unexpected justification {j}")
        b.provenance[last - 1] = line.index
        image[line.index] = last
    return image[len(proof)]


def _checked_graded(proof: GradedProof, theory: FuzzyTheory, rules) -> GradedFormula:
    report = check_grpl(proof, theory, rules=rules)
    if not report.ok:
        raise TranslationError(f"source proof is invalid: {report}")
    return report.conclusion


def grpl_to_rpl(proof: GradedProof, theory=None, *, rules: RuleRegistry | None = None,
                kernel: bool = False) -> TranslationResult:
    """RPL proof of ``#q -> phi`` from ``{#r -> psi}`` for a graded proof of ``(phi, q)``."""
    rules = rules or default_rules()
    theory = _fuzzy(theory)
    _checked_graded(proof, theory, rules)
    target = _Target(rules, graded=False, premise="hyp")
    _embed(proof, theory, target)
    return _finish(target.b, rpl_theory_of(theory), rules, kernel)


def grpl_self_embed(proof: GradedProof, theory=None, *, rules: RuleRegistry | None = None,
                    kernel: bool = False) -> TranslationResult:
    """All-grade-1 graded proof of ``(#q -> phi, 1)`` from ``{(#r -> psi, 1)}``."""
    rules = rules or default_rules()
    theory = _fuzzy(theory)
    _checked_graded(proof, theory, rules)
    target = _Target(rules, graded=True, premise="hyp")
    _embed(proof, theory, target)
    return _finish(target.b, FuzzyTheory.crisp(rpl_theory_of(theory)), rules, kernel)


def normalize_grades(proof: GradedProof, theory=None, *, rules: RuleRegistry | None = None,
                     kernel: bool = False) -> TranslationResult:
    """Rebuild a graded proof of ``(phi, 1)`` so that every line has grade 1.

    Needs every grade of the theory to be 1. Source line ``(phi_i, q_i)``
    becomes ``(#q_i -> phi_i, 1)``; hypotheses are pushed in with glue and
    the last line is pulled back to ``(phi, 1)``.
    """
    rules = rules or default_rules()
    theory = _fuzzy(theory)
    concl = _checked_graded(proof, theory, rules)
    if concl.grade != ONE:
        raise TranslationError("conclusion grade must be 1")
    if not theory.is_crisp():
        raise TranslationError("every grade of the theory must be 1")
    target = _Target(rules, graded=True, premise="glue")
    last = _embed(proof, theory, target)
    b = target.b
    b.source = "glue"
    one = b.const(ONE)
    b.source = len(proof)
    b.gmp(one, last)
    return _finish(b, theory, rules, kernel)


def rpl_to_grpl(proof: Proof, theory=None, *, rules: RuleRegistry | None = None,
                kernel: bool = False) -> TranslationResult:
    """Grade every line 1: axioms stay axioms, hypotheses come from ``{(psi, 1)}``,
    modus ponens becomes graded modus ponens."""
    rules = rules or default_rules()
    crisp = _crisp(theory)
    report = check_rpl(proof, crisp, rules=rules)
    if not report.ok:
        raise TranslationError(f"source proof is invalid: {report}")
    b = GradedProofBuilder(rules)
    for line in proof.lines:
        j = line.justification
        b.source = line.index
        if isinstance(j, MP):
            j = GMP(j.minor, j.major)
        elif not isinstance(j, (AxiomL, Hyp, Derived, *_BOOK)):
            raise TranslationError(f"line {line.index}: unexpected justification {j}")
        b._add(line.formula, ONE, j)
    return _finish(b, FuzzyTheory.crisp(crisp), rules, kernel)
