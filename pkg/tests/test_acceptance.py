"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py``; the terminal summary prints one
``criterion N [PASS|FAIL]`` line each.
"""

import random
import subprocess
import sys
import time
from collections import Counter
from itertools import product

import pytest

from conftest import CORPUS, load_elimination_cases, load_graded_corpus, load_kernel_corpus
from gen import corpus_files, random_kernel_proof
from pavelka.algebra import ONE, UnitRational, grid, mv_conj, mv_disj, mv_imp, mv_max, mv_min, mv_neg
from pavelka.cli import main
from pavelka.definability import (
    bookkeeping_variables,
    eliminate_constants,
    torrens_definition,
    unique_solutions_grid,
)
from pavelka.proofs import (
    LIBRARY_RULES,
    PROBE_VALUES,
    Derived,
    Hyp,
    Proof,
    ProofLine,
    check,
    check_grpl,
    check_rpl,
    expand_to_kernel,
    format_proof,
    parse_any_proof,
    parse_graded_proof,
)
from pavelka.semantics import degree_sandwich, grid_denominator_for, validity_degree_grid
from pavelka.syntax import (
    Const,
    FuzzyTheory,
    Imp,
    Var,
    format_theory,
    parse,
    parse_theory,
    substitute,
    to_base,
    to_text,
)
from pavelka.translate import grpl_self_embed, grpl_to_rpl, normalize_grades, rpl_to_grpl

U = UnitRational
acceptance = pytest.mark.acceptance


@acceptance(1, "algebraic laws hold exactly on grids 1..12 in under 10 s")
def test_algebraic_laws():
    start = time.perf_counter()
    for n in range(1, 13):
        g = grid(n)
        for x in g:
            assert mv_neg(mv_neg(x)) == x
        for x, y in product(g, repeat=2):
            assert mv_min(x, y) == mv_conj(x, mv_imp(x, y))  # divisibility
            assert mv_max(mv_imp(x, y), mv_imp(y, x)) == ONE  # semilinearity
            assert mv_max(x, y) == mv_imp(mv_imp(x, y), y)
            for r in (mv_conj(x, y), mv_disj(x, y), mv_imp(x, y), mv_neg(x)):
                assert n % r.denominator == 0  # closure in the n-element chain
        for x, y, z in product(g, repeat=3):
            assert (mv_conj(x, y) <= z) == (x <= mv_imp(y, z))  # residuation
            assert mv_conj(mv_conj(x, y), z) == mv_conj(x, mv_conj(y, z))
    assert time.perf_counter() - start < 10


def _corrupt(rng, proof: Proof) -> Proof:
    lines = list(proof.lines)
    k = rng.randrange(len(lines))
    line = lines[k]
    other = lines[rng.randrange(len(lines))].formula
    new = rng.choice([Imp(other, line.formula), Imp(line.formula, other), other])
    lines[k] = ProofLine(line.index, new, line.justification)
    return Proof(tuple(lines))


@acceptance(2, "1000 random kernel proofs in Ł and RPL have no grid countermodel")
def test_kernel_soundness_fuzzing(rules):
    rng = random.Random(20240611)
    violations, accepted_corrupt, with_mp = [], 0, 0
    for k in range(1000):
        system = "luk" if k % 2 == 0 else "rpl"
        proof, theory = random_kernel_proof(rng, system, steps=12, max_depth=8)
        assert check(system, proof, theory, rules).ok
        candidates = [proof]
        bad = _corrupt(rng, proof)
        if check(system, bad, theory, rules).ok:
            accepted_corrupt += 1
            candidates.append(bad)
        for p in candidates:
            for line in p.lines:
                # Default grid: twice the lcm of all denominators.
                rep = validity_degree_grid(theory, line.formula)
                if not (rep.inconsistent or rep.upper == ONE):
                    violations.append((k, line.index, str(rep)))
        with_mp += any(_kind(l.justification) == "MP" for l in proof.lines)
    assert violations == []
    assert with_mp > 900  # nearly every proof uses modus ponens
    assert accepted_corrupt < 1000


def _kind(j):
    return type(j).__name__


@acceptance(3, "graded soundness over every line of the GRPL corpus")
def test_graded_soundness(rules):
    corpus = load_graded_corpus()
    assert len(corpus) >= 30
    kinds = Counter()
    violations = []
    for name, proof, theory in corpus:
        assert check_grpl(proof, theory, rules).ok, name
        for line in proof.lines:
            kinds[_kind(line.justification)] += 1
            rep = validity_degree_grid(theory, line.formula)
            if not rep.inconsistent and rep.upper < line.grade:
                violations.append((name, line.index, line.grade, rep.upper))
    assert violations == []
    needed = {"AxiomL", "GrConst", "GrZero", "Hyp", "GMP", "Lift"}
    assert needed <= set(kinds)
    assert {"BookImp", "BookNeg", "BookOne", "BookZero"} <= set(kinds)


@acceptance(4, "embedding lemmas hold on the corpus")
def test_embeddings(rules):
    graded = load_graded_corpus()
    crisp_seen = 0
    for name, proof, theory in graded:
        concl = proof.conclusion
        out = grpl_to_rpl(proof, theory, rules=rules)
        assert check_rpl(out.output, out.theory, rules).ok, name
        assert to_base(out.conclusion) == to_base(Imp(Const(concl.grade), concl.formula))
        emb = grpl_self_embed(proof, theory, rules=rules)
        assert check_grpl(emb.output, emb.theory, rules).ok, name
        assert all(l.grade == ONE for l in emb.output.lines), name
        if theory.is_crisp() and concl.grade == ONE:
            crisp_seen += 1
            norm = normalize_grades(proof, theory, rules=rules)
            assert check_grpl(norm.output, theory, rules).ok, name
            assert all(l.grade == ONE for l in norm.output.lines), name
            assert to_base(norm.conclusion.formula) == to_base(concl.formula)
    assert crisp_seen >= 5
    for name, system, proof, theory in load_kernel_corpus():
        res = rpl_to_grpl(proof, theory, rules=rules)
        assert check_grpl(res.output, res.theory, rules).ok, name
        assert all(l.grade == ONE for l in res.output.lines), name


@acceptance(5, "sandwich instances are exact and fast")
def test_sandwich_instances(rules):
    cases = [
        (FuzzyTheory([(parse("p"), "2/3"), (parse("p -> q"), "2/3")]), "q",
         "1 : 2/3 : p ; hyp\n2 : 2/3 : p -> q ; hyp\n3 : 1/3 : q ; gmp 1 2", None, U(1, 3)),
        (FuzzyTheory([(parse("p"), "1/2")]), "p", "1 : 1/2 : p ; hyp", None, U(1, 2)),
    ]
    for theory, f, cert, n, value in cases:
        start = time.perf_counter()
        rep = degree_sandwich(theory, parse(f), parse_graded_proof(cert), n, rules=rules)
        assert rep.exact and rep.value == value
        assert time.perf_counter() - start < 1
    start = time.perf_counter()
    rep = validity_degree_grid(FuzzyTheory(), parse("p \\/ ~p"), 2)
    assert rep.upper == U(1, 2)
    assert time.perf_counter() - start < 1


@acceptance(6, "Torrens and bookkeeping definitions pin their values on grids")
def test_definability_oracles():
    start = time.perf_counter()
    for n in range(2, 13):
        d = torrens_definition(n)
        for m in range(1, 61):
            expected = {U(1, n)} if m % n == 0 else set()
            assert unique_solutions_grid(d, "z", m) == expected, (n, m)
    for q in (2, 3, 4):
        defs = bookkeeping_variables(q)
        for m in (q, 2 * q, 3 * q):
            for value, var in defs.defined.items():
                assert unique_solutions_grid(defs, var, m) == {value}, (q, m, var)
    assert time.perf_counter() - start < 30


@acceptance(7, "constant elimination preserves grid degrees for both strategies")
def test_constant_elimination():
    cases = load_elimination_cases()
    assert len(cases) >= 20
    for theory, f in cases:
        n = grid_denominator_for(theory, f)
        assert n <= 24
        before = validity_degree_grid(theory, f, n)
        for strategy in ("torrens", "bookkeeping"):
            el = eliminate_constants(theory, f, strategy)
            after = validity_degree_grid(el.full_theory(), el.formula, n)
            assert (after.upper, after.inconsistent) == (before.upper, before.inconsistent), \
                (to_text(f), strategy)


@acceptance(8, "library rules expand to kernel proofs for every probe parameter")
def test_library_expansion(rules):
    for name in LIBRARY_RULES:
        rule = rules.get(name)
        slots = {s: Var(f"p{k}") for k, s in enumerate(rule.formula_slots, 1)}
        for values in product(PROBE_VALUES, repeat=len(rule.params)):
            binding = dict(slots)
            binding.update({p: Const(v) for p, v in zip(rule.params, values)})
            premises = [substitute(p, binding) for p in rule.premises]
            inst = rules.instance(rule, premises, None, binding)
            lines = [ProofLine(i, p, Hyp()) for i, p in enumerate(premises, 1)]
            k = len(lines) + 1
            lines.append(ProofLine(k, inst.conclusion,
                                   Derived(name, tuple(range(1, k)), binding)))
            proof = Proof(tuple(lines))
            assert check_rpl(proof, premises, rules).ok
            kernel = expand_to_kernel(proof, rules)
            assert not kernel.uses_derived(), name
            rep = check_rpl(kernel, premises, rules)
            assert rep.ok, (name, values, str(rep))
            assert to_base(rep.conclusion) == to_base(inst.conclusion)


def _cli(capsys, argv):
    code = main([str(a) for a in argv])
    out, _ = capsys.readouterr()
    return code, out


@acceptance(9, "format round trips, CLI self-round-trip and byte-identical reruns")
def test_format_stability(capsys, tmp_path):
    committed = {p.relative_to(CORPUS).as_posix(): p.read_text()
                 for p in CORPUS.rglob("*") if p.is_file()}
    assert corpus_files() == committed
    for rel, text in committed.items():
        if rel.endswith((".pf", ".gpf")):
            assert format_proof(parse_any_proof(text)) == text, rel
        elif rel.endswith(".th"):
            assert format_theory(parse_theory(text)) == text, rel
        elif rel == "formulas.txt":
            assert "".join(to_text(parse(l)) + "\n" for l in text.splitlines()) == text
        elif rel == "eliminate.txt":
            for line in text.splitlines():
                parts = [p.strip() for p in line.split(";")]
                assert " ; ".join(to_text(parse(p)) for p in parts) == line
        if rel == "eliminate.txt":
            continue
        code, out = _cli(capsys, ["parse", CORPUS / rel])
        assert code == 0 and out == text, rel
        again = tmp_path / "again"
        again.write_text(out)
        assert _cli(capsys, ["parse", again]) == (0, text), rel
    # Reruns of a translation are byte-identical.
    src = CORPUS / "grpl" / "00.gpf"
    th = CORPUS / "grpl" / "00.th"
    runs = []
    for k in range(2):
        out = tmp_path / f"t{k}.pf"
        assert _cli(capsys, ["translate", "--from", "grpl", "--to", "rpl", "-o", out, src, th])[0] == 0
        runs.append(out.read_bytes())
    assert runs[0] == runs[1]
    # And across processes, so no state leaks between runs.
    cmd = [sys.executable, "-m", "pavelka", "parse", str(CORPUS / "formulas.txt")]
    outs = [subprocess.run(cmd, capture_output=True).stdout for _ in range(2)]
    assert outs[0] == outs[1] == (CORPUS / "formulas.txt").read_bytes()
