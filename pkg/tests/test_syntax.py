import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_formula
from pavelka.algebra import ONE, UnitRational, grid
from pavelka.proofs import AXIOMS
from pavelka.semantics import evaluate
from pavelka.syntax import (
    Const,
    Equiv,
    FuzzyTheory,
    Imp,
    Max,
    Min,
    Neg,
    NMul,
    ParseError,
    Pow,
    SConj,
    SDisj,
    Theory,
    Var,
    base_size_bound,
    constants_of,
    format_theory,
    is_comment,
    match,
    parse,
    parse_theory,
    replace_constants,
    size,
    substitute,
    to_base,
    to_text,
    variables_of,
)

p, q, r, a = Var("p"), Var("q"), Var("r"), Var("a")
U = UnitRational


def test_parse_examples():
    assert parse("p -> (q -> p)") == Imp(p, Imp(q, p))
    assert parse("#1/2 -> p") == Imp(Const(U(1, 2)), p)
    assert parse("(~p)^3") == Pow(Neg(p), 3)


@pytest.mark.parametrize("text,tree", [
    ("p -> q -> r", Imp(p, Imp(q, r))),
    ("p + q * r", SDisj(p, SConj(q, r))),
    ("p \\/ q /\\ r", Max(p, Min(q, r))),
    ("p + q + r", SDisj(SDisj(p, q), r)),
    ("p <-> q -> r", Imp(Equiv(p, q), r)),
    ("~p^2", Neg(Pow(p, 2))),
    ("2.~p", NMul(2, Neg(p))),
    ("#0 -> #1", Imp(Const(U(0)), Const(U(1)))),
    ("# 2 / 4", Const(U(1, 2))),
])
def test_precedence(text, tree):
    assert parse(text) == tree


@pytest.mark.parametrize("text,message", [
    ("p ->", "expected a formula"),
    ("#3/2 -> p", "constant outside [0,1]"),
    ("(~p)^0", "exponent must be at least 1"),
    ("0.p", "at least 1"),
    ("(p -> q", "expected ')'"),
    ("p q", "unexpected"),
    ("p $ q", "unexpected character"),
])
def test_parse_errors(text, message):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert message in str(info.value)


def test_error_position():
    with pytest.raises(ParseError) as info:
        parse("p ->")
    assert (info.value.line, info.value.column) == (1, 5)
    with pytest.raises(ParseError) as info:
        parse("p\n-> ->")
    assert info.value.line == 2


def test_print_examples():
    assert to_text(Imp(p, p)) == "p -> p"
    assert to_text(Const(U(2, 3))) == "#2/3"
    assert to_text(NMul(2, a)) == "2.a"
    assert to_text(Pow(Neg(p), 3)) == "(~p)^3"
    assert to_text(Imp(Imp(p, q), r)) == "(p -> q) -> r"
    assert to_text(Equiv(Equiv(p, q), r)) == "(p <-> q) <-> r"


def test_corpus_round_trip():
    from conftest import CORPUS
    for line in (CORPUS / "formulas.txt").read_text().splitlines():
        f = parse(line)
        assert to_text(f) == line
        assert parse(to_text(f)) == f


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_random_round_trip(seed):
    f = random_formula(random.Random(seed), 4, constants=True)
    assert parse(to_text(f)) == f


def test_to_base_examples():
    assert to_base(Max(p, q)) == Imp(Imp(p, q), q)
    assert to_base(SDisj(p, q)) == Imp(Neg(p), q)
    assert to_base(Min(p, q)) == to_base(SConj(p, Imp(p, q)))
    assert to_base(SConj(p, q)) == Neg(Imp(Neg(Neg(p)), Neg(q)))
    assert to_base(Pow(p, 1)) == p
    assert to_base(NMul(2, p)) == to_base(SDisj(p, p))


def _only_base(f):
    if isinstance(f, (Var, Const)):
        return True
    if isinstance(f, Neg):
        return _only_base(f.f)
    return isinstance(f, Imp) and _only_base(f.a) and _only_base(f.b)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_to_base_idempotent_sound_and_bounded(seed):
    f = random_formula(random.Random(seed), 3, constants=True)
    g = to_base(f)
    assert _only_base(g)
    assert to_base(g) == g
    assert size(g) <= base_size_bound(f)
    names = sorted(variables_of(f))
    rng = random.Random(seed)
    for _ in range(10):
        n = rng.choice([2, 3, 4, 6, 12])
        v = {x: rng.choice(grid(n)) for x in names}
        assert evaluate(f, v) == evaluate(g, v)


def test_size_bound_on_corpus():
    from conftest import CORPUS
    for line in (CORPUS / "formulas.txt").read_text().splitlines():
        f = parse(line)
        assert size(to_base(f)) <= base_size_bound(f)


def test_substitute_examples():
    assert to_text(substitute(AXIOMS["A1"], {"Phi": p, "Psi": q})) == "p -> q -> p"
    assert to_text(substitute(AXIOMS["A4"], {"Phi": p, "Psi": q})) == "(~p -> ~q) -> q -> p"
    a3 = substitute(AXIOMS["A3"], {"Phi": p, "Psi": p})
    assert a3 == parse("((p->p)->p) -> ((p->p)->p)")


def test_substitute_unbound():
    with pytest.raises(KeyError, match="Psi"):
        substitute(AXIOMS["A1"], {"Phi": p})


def test_substitute_is_simultaneous():
    f = substitute(parse("Phi -> Psi"), {"Phi": parse("Psi"), "Psi": p})
    assert f == Imp(Var("Psi"), p)


def test_constants_of():
    assert constants_of(parse("#1/2 -> p")) == {U(1, 2)}
    assert constants_of(parse("p -> q")) == set()
    assert constants_of(parse("#1/2 -> #2/3")) == {U(1, 2), U(2, 3)}
    assert constants_of(parse("#0 -> #1")) == set()


def test_replace_constants():
    f = replace_constants(parse("#1/2 -> #1 -> #1/2"), {U(1, 2): Var("z")})
    assert to_text(f) == "z -> #1 -> z"


def test_match_binds_params_to_constants_only():
    pat = parse("R -> Phi")
    assert match(pat, parse("#1/3 -> p"), params=("R",)) == {"R": Const(U(1, 3)), "Phi": p}
    assert match(pat, parse("q -> p"), params=("R",)) is None
    assert match(parse("Phi -> Phi"), parse("p -> q")) is None


def test_fuzzy_theory_defaults_and_union():
    t = FuzzyTheory([(p, "1/2"), (parse("p"), "2/3"), (q, 0)])
    assert t(p) == U(2, 3)
    assert t(r) == 0
    assert len(t) == 1
    assert t(parse("p \\/ q")) == 0
    t2 = FuzzyTheory([(parse("p + q"), 1)])
    assert t2(parse("~p -> q")) == ONE


def test_theory_identifies_up_to_base():
    t = Theory([parse("p + q"), parse("~p -> q")])
    assert len(t) == 1
    assert parse("~p -> q") in t


def test_theory_file_round_trip():
    text = "# a comment\n\ngrade 1/2 : p\n#1/2 -> q\ngrade 2/4 : q\n#comment\n"
    t = parse_theory(text)
    assert t(parse("p")) == U(1, 2)
    assert t(parse("#1/2 -> q")) == ONE
    assert format_theory(t) == "grade 1/2 : p\n#1/2 -> q\ngrade 1/2 : q\n"
    assert parse_theory(format_theory(t)) == t


def test_theory_file_errors_carry_line():
    with pytest.raises(ParseError) as info:
        parse_theory("p\ngrade 1/2 : p ->\n")
    assert info.value.line == 2


def test_comment_rule():
    assert is_comment("# note")
    assert is_comment("   ")
    assert not is_comment("#1/2 -> p")
    assert not is_comment("#0")


def test_formulas_are_immutable_and_hashable():
    f = parse("p -> q")
    with pytest.raises(AttributeError):
        f.a = q
    assert {f: 1}[parse("p->q")] == 1


def test_metavariable_convention():
    schema = parse("Phi -> p")
    assert substitute(schema, {"Phi": q}) == Imp(q, p)
