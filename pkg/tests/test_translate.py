import random

import pytest

from conftest import load_graded_corpus, load_kernel_corpus
from gen import random_kernel_proof
from pavelka.algebra import ONE, UnitRational
from pavelka.proofs import (
    Derived,
    MP,
    Proof,
    ProofLine,
    check_grpl,
    check_rpl,
    parse_graded_proof,
    parse_proof,
)
from pavelka.syntax import Const, FuzzyTheory, GradedFormula, Imp, Theory, parse, to_base
from pavelka.translate import (
    TranslationError,
    grpl_self_embed,
    grpl_to_rpl,
    normalize_grades,
    push_pull,
    rpl_theory_of,
    rpl_to_grpl,
)

U = UnitRational
GMP_THEORY = FuzzyTheory([(parse("p"), "2/3"), (parse("p -> q"), "2/3")])
GMP_PROOF = parse_graded_proof(
    "1 : 2/3 : p ; hyp\n2 : 2/3 : p -> q ; hyp\n3 : 1/3 : q ; gmp 1 2")


def test_grpl_to_rpl_example(rules):
    res = grpl_to_rpl(GMP_PROOF, GMP_THEORY, rules=rules)
    assert res.system == "rpl"
    assert to_base(res.conclusion) == to_base(parse("#1/3 -> q"))
    assert res.theory == Theory([parse("#2/3 -> p"), parse("#2/3 -> p -> q")])
    assert check_rpl(res.output, res.theory, rules).ok


def test_push_pull_examples():
    fwd = push_pull("forward", "1/2", parse("p"))
    assert fwd.conclusion == GradedFormula(parse("#1/2 -> p"), ONE)
    back = push_pull("backward", "1/2", parse("p"))
    assert back.conclusion == GradedFormula(parse("p"), U(1, 2))
    assert fwd.provenance == (1, "glue")
    with pytest.raises(ValueError):
        push_pull("sideways", 1, parse("p"))


def test_rpl_to_grpl_example():
    proof = parse_proof("1 : p ; hyp\n2 : p -> q ; hyp\n3 : q ; mp 1 2")
    res = rpl_to_grpl(proof, [parse("p"), parse("p -> q")])
    assert res.all_grades_one()
    assert res.conclusion == GradedFormula(parse("q"), ONE)
    assert res.provenance == (1, 2, 3)


def test_rpl_to_grpl_rejects_fuzzy_theory():
    proof = parse_proof("1 : p ; hyp")
    with pytest.raises(TranslationError, match="crisp"):
        rpl_to_grpl(proof, FuzzyTheory([(parse("p"), "1/2")]))


def test_invalid_source_is_reported():
    bad = parse_graded_proof("1 : 2/3 : p ; hyp\n2 : 2/3 : p -> q ; hyp\n3 : 1/2 : q ; gmp 1 2")
    with pytest.raises(TranslationError, match="source proof is invalid"):
        grpl_to_rpl(bad, GMP_THEORY)


def test_self_embed_example(rules):
    res = grpl_self_embed(GMP_PROOF, GMP_THEORY, rules=rules)
    assert res.all_grades_one()
    assert to_base(res.conclusion.formula) == to_base(parse("#1/3 -> q"))


def test_normalize_example(rules):
    t = FuzzyTheory([(parse("p"), 1), (parse("p -> q"), 1)])
    proof = parse_graded_proof("""\
1 : 1/2 : #1/2 ; ax-const[1/2]
2 : 1 : p ; hyp
3 : 1 : p -> q ; hyp
4 : 1 : q ; gmp 2 3
""")
    res = normalize_grades(proof, t, rules=rules)
    assert res.all_grades_one()
    assert res.conclusion == GradedFormula(parse("q"), ONE)
    assert res.provenance[-1] == 4


def test_normalize_preconditions():
    with pytest.raises(TranslationError, match="grade must be 1"):
        normalize_grades(GMP_PROOF, GMP_THEORY)
    proof = parse_graded_proof("1 : 1 : #1/2 -> p ; hyp")
    fuzzy = FuzzyTheory([(parse("#1/2 -> p"), 1), (parse("q"), "1/2")])
    with pytest.raises(TranslationError, match="every grade"):
        normalize_grades(proof, fuzzy)


def _with_conclusion(proof: Proof) -> Proof:
    """Turn a proof of ``#1 -> phi`` into one of ``phi``."""
    lines = list(proof.lines)
    n = len(lines)
    target = to_base(lines[-1].formula).b
    lines.append(ProofLine(n + 1, Const(ONE), Derived("one-intro", ())))
    lines.append(ProofLine(n + 2, target, MP(n + 1, n)))
    return Proof(tuple(lines))


def test_round_trip_at_grade_one(rules):
    rng = random.Random(31)
    for _ in range(15):
        proof, theory = random_kernel_proof(rng, "rpl", steps=8)
        graded = rpl_to_grpl(proof, theory, rules=rules)
        back = grpl_to_rpl(graded.output, graded.theory, rules=rules)
        closed = _with_conclusion(back.output)
        rep = check_rpl(closed, back.theory, rules)
        assert rep.ok
        assert to_base(rep.conclusion) == to_base(proof.conclusion)
        # Hypotheses #1 -> psi and psi are interderivable; the theory is the pushed one.
        assert back.theory == Theory(Imp(Const(ONE), f) for f in theory)


def test_provenance_is_total(rules):
    for name, proof, theory in load_graded_corpus()[:8]:
        for fn in (grpl_to_rpl, grpl_self_embed):
            res = fn(proof, theory, rules=rules)
            assert len(res.provenance) == len(res.output)
            indices = [p for p in res.provenance if p != "glue"]
            assert indices == sorted(indices)
            assert set(indices) == set(range(1, len(proof) + 1))
            assert res.provenance[-1] == len(proof)


def test_kernel_option_expands_derived(rules):
    res = grpl_to_rpl(GMP_PROOF, GMP_THEORY, rules=rules, kernel=True)
    assert not res.output.uses_derived()
    assert check_rpl(res.output, res.theory, rules).ok
    assert len(res.provenance) == len(res.output)
    plain = grpl_to_rpl(GMP_PROOF, GMP_THEORY, rules=rules)
    assert to_base(res.conclusion) == to_base(plain.conclusion)
    assert res.provenance[-1] == 3


def test_translations_are_deterministic(rules):
    a = grpl_to_rpl(GMP_PROOF, GMP_THEORY, rules=rules)
    b = grpl_to_rpl(GMP_PROOF, GMP_THEORY, rules=rules)
    assert a.output == b.output and a.provenance == b.provenance


def test_rpl_theory_of():
    assert rpl_theory_of(GMP_THEORY) == Theory([parse("#2/3 -> p"), parse("#2/3 -> p -> q")])


def test_kernel_corpus_lifts_to_grade_one(rules):
    for name, system, proof, theory in load_kernel_corpus():
        res = rpl_to_grpl(proof, theory, rules=rules)
        assert res.all_grades_one() and check_grpl(res.output, res.theory, rules).ok
