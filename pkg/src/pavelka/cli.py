"""Command-line interface: ``pavelka <subcommand> ...``.

Exit codes: 0 success, 1 logical failure (a check or translation refused),
2 input error, 3 grid budget exceeded. Results go to standard output as
single lines or files; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .algebra import parse_rational
from .definability import (
    bookkeeping_variables,
    eliminate_constants,
    rational_definition,
)
from .proofs import (
    check,
    format_proof,
    parse_any_proof,
    parse_graded_proof,
    parse_proof,
)
from .semantics import (
    GridBudgetError,
    InvalidCertificate,
    budget_from_env,
    degree_sandwich,
    evaluate,
    validity_degree_grid,
)
from .syntax import (
    FuzzyTheory,
    ParseError,
    Theory,
    format_entry,
    format_theory,
    parse,
    parse_theory,
    parse_theory_entries,
    to_text,
)
from .translate import (
    TranslationError,
    grpl_self_embed,
    grpl_to_rpl,
    normalize_grades,
    rpl_to_grpl,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    """Bad arguments or unreadable input; exit code 2."""


class LogicalFailure(Exception):
    """A check or translation was refused; exit code 1."""


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _parsed(what: str, fn, text: str):
    try:
        return fn(text)
    except ParseError as exc:
        raise InputError(f"{what}:{exc}") from None
    except ValueError as exc:
        raise InputError(f"{what}: {exc}") from None


def _theory(path: str | None) -> FuzzyTheory:
    if path is None:
        return FuzzyTheory()
    return _parsed(path, parse_theory, _read(path))


def _formula(text: str):
    return _parsed("<formula>", parse, text)


def _budget() -> int:
    try:
        return budget_from_env()
    except ValueError as exc:
        raise InputError(f"PAVELKA_BUDGET: {exc}") from None


# --------------------------------------------------------------------------
# Subcommands

_PROOF_LINE = re.compile(r"\s*\d+\s*:")


def _canonical_lines(text: str) -> str:
    """Reprint a formula or theory file entry by entry."""
    return "".join(format_entry(f, g) + "\n" for f, g in parse_theory_entries(text))


def cmd_parse(args) -> int:
    name = "<expr>" if args.expr is not None else args.file
    text = args.expr if args.expr is not None else _read(args.file)
    body = [l for l in text.splitlines() if l.strip() and not l.strip().startswith("#")]
    if body and _PROOF_LINE.match(body[0]):
        proof = _parsed(name, parse_any_proof, text)
        _write(None, format_proof(proof))
    else:
        _write(None, _parsed(name, _canonical_lines, text))
    return EXIT_OK


def cmd_eval(args) -> int:
    f = _formula(args.formula)
    v = {}
    for item in args.assignment:
        if "=" not in item:
            raise InputError(f"assignment {item!r} must look like name=p/q")
        name, value = item.split("=", 1)
        v[name.strip()] = _parsed(f"assignment {name}", parse_rational, value)
    try:
        value = evaluate(f, v)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    print(value)
    return EXIT_OK


def _load_proof(path: str, system: str):
    reader = parse_graded_proof if system == "grpl" else parse_proof
    return _parsed(path, reader, _read(path))


def cmd_check(args) -> int:
    proof = _load_proof(args.proof, args.system)
    theory = _theory(args.theory)
    if args.system != "grpl":
        if not theory.is_crisp():
            raise InputError(f"{args.theory}: graded entries need --system grpl")
        theory = Theory(f for f, _ in theory.support())
    report = check(args.system, proof, theory)
    print(report)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_translate(args) -> int:
    src = _load_proof(args.proof, "grpl" if args.source == "grpl" else "rpl")
    theory = _theory(args.theory)
    pair = (args.source, args.target)
    try:
        if pair == ("grpl", "rpl"):
            if args.normalize_grades:
                raise InputError("--normalize-grades needs --to grpl")
            result = grpl_to_rpl(src, theory, kernel=args.kernel)
        elif pair == ("rpl", "grpl"):
            if args.normalize_grades:
                raise InputError("--normalize-grades needs --from grpl")
            if not theory.is_crisp():
                raise InputError(f"{args.theory}: an RPL theory must be crisp")
            result = rpl_to_grpl(src, theory, kernel=args.kernel)
        elif pair == ("grpl", "grpl"):
            fn = normalize_grades if args.normalize_grades else grpl_self_embed
            result = fn(src, theory, kernel=args.kernel)
        else:
            raise InputError(f"no translation from {args.source} to {args.target}")
    except TranslationError as exc:
        raise LogicalFailure(str(exc)) from None
    text = format_proof(result.output, result.provenance)
    # Re-read and re-check exactly what is about to be written.
    reread = parse_any_proof(text)
    report = check(result.system, reread, result.theory)
    if not report.ok or format_proof(reread, result.provenance) != text:
        raise LogicalFailure(f"translated proof does not re-check: {report}")
    _write(args.output, text)
    if args.theory_out:
        _write(args.theory_out, format_theory(result.theory))
    print(report, file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_degree(args) -> int:
    theory = _theory(args.theory)
    f = _formula(args.formula)
    if args.grid is not None and args.grid < 1:
        raise InputError("--grid must be positive")
    budget = _budget()
    if args.certificate:
        cert = _parsed(args.certificate, parse_any_proof, _read(args.certificate))
        try:
            report = degree_sandwich(theory, f, cert, args.grid, budget=budget)
        except InvalidCertificate as exc:
            raise LogicalFailure(str(exc)) from None
    else:
        report = validity_degree_grid(theory, f, args.grid, budget=budget, split=args.split)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(report)
    return EXIT_OK


def cmd_define(args) -> int:
    q = _parsed("--rational", parse_rational, args.rational)
    if q in (0, 1):
        raise InputError("--rational must lie strictly between 0 and 1")
    if args.strategy == "torrens":
        defs = rational_definition(q.numerator, q.denominator, args.var)
    else:
        defs = bookkeeping_variables(q.denominator)
    text = defs.mapping_comment() + format_theory(defs.theory())
    _write(args.output, text)
    return EXIT_OK


def cmd_eliminate(args) -> int:
    theory = _theory(args.theory)
    if not theory.is_crisp():
        raise InputError(f"{args.theory}: constant elimination needs a crisp theory")
    f = _formula(args.formula)
    result = eliminate_constants([g for g, _ in theory.support()], f, args.strategy)
    t_text = format_theory(result.theory)
    d_text = result.definitions.mapping_comment() + format_theory(result.definitions.theory())
    f_text = to_text(result.formula) + "\n"
    if args.theory_out:
        _write(args.theory_out, t_text)
    if args.defs_out:
        _write(args.defs_out, d_text)
    if args.formula_out:
        _write(args.formula_out, f_text)
    if not (args.theory_out or args.defs_out or args.formula_out):
        _write(None, "# theory\n" + t_text + "# definitions\n" + d_text
               + "# formula\n" + f_text)
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pavelka",
        description="Proof checking and degrees of truth for Ł, RPL and GRPL.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and reprint a formula, theory or proof file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("file", nargs="?", help="input file, '-' for standard input")
    src.add_argument("-e", "--expr", help="parse this text instead of a file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="evaluate a formula under an assignment")
    p.add_argument("formula")
    p.add_argument("assignment", nargs="*", help="name=p/q")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="check a proof file")
    p.add_argument("--system", choices=("luk", "rpl", "grpl"), required=True)
    p.add_argument("proof")
    p.add_argument("theory", nargs="?")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("translate", help="translate a proof between RPL and GRPL")
    p.add_argument("--from", dest="source", choices=("grpl", "rpl"), required=True)
    p.add_argument("--to", dest="target", choices=("grpl", "rpl"), required=True)
    p.add_argument("--normalize-grades", action="store_true",
                   help="for grade-1 conclusions: rebuild with every grade 1")
    p.add_argument("--kernel", action="store_true", help="expand derived rules")
    p.add_argument("-o", "--output", help="output proof file (default: standard output)")
    p.add_argument("--theory-out", help="write the mapped theory here")
    p.add_argument("proof")
    p.add_argument("theory", nargs="?")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("degree", help="grid validity degree, optionally certified")
    p.add_argument("formula")
    p.add_argument("--theory")
    p.add_argument("--grid", type=int, help="grid denominator (raised to fit constants)")
    p.add_argument("--certificate", help="RPL or GRPL proof giving a lower bound")
    p.add_argument("--split", type=int, default=1, help="search threads")
    p.set_defaults(func=cmd_degree)

    p = sub.add_parser("define", help="implicit definition of a rational")
    p.add_argument("--rational", required=True)
    p.add_argument("--strategy", choices=("torrens", "bookkeeping"), default="torrens")
    p.add_argument("--var", default="z")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_define)

    p = sub.add_parser("eliminate", help="replace constants by defined variables")
    p.add_argument("theory")
    p.add_argument("formula")
    p.add_argument("--strategy", choices=("torrens", "bookkeeping"), default="torrens")
    p.add_argument("--theory-out")
    p.add_argument("--defs-out")
    p.add_argument("--formula-out")
    p.set_defaults(func=cmd_eliminate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LogicalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except GridBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
