"""Reading and writing kernel and graded proof files.

Kernel lines read ``<idx> : <formula> ; <just>`` and graded lines
``<idx> : <p/q> : <formula> ; <just>``. Blank lines and lines starting with
``#`` are comments (a proof line always starts with its index, so no
formula can be mistaken for one). Provenance maps are written as
``# <out-line> <= <src-line>|glue`` comments and can be read back.
"""

from __future__ import annotations

import re

from ..algebra import format_rational, parse_rational
from ..syntax import ParseError, parse, to_text
from .core import (
    GMP,
    MP,
    AxiomL,
    BookImp,
    BookNeg,
    BookOne,
    BookZero,
    Derived,
    GradedProof,
    GradedProofLine,
    GrConst,
    GrZero,
    Hyp,
    Lift,
    Proof,
    ProofLine,
)

__all__ = [
    "parse_proof",
    "parse_graded_proof",
    "parse_any_proof",
    "format_proof",
    "format_justification",
    "parse_justification",
    "read_provenance",
]

_NAME = r"[A-Za-z][A-Za-z0-9_-]*"
_AX_RE = re.compile(rf"(?:ax|ax-L)\s+({_NAME})\s*(?:\[(.*)\])?$")
_BOOK_RE = re.compile(r"(?:ax-)?book-(imp|neg)\s*\[(.*)\]$")
_BOOK0_RE = re.compile(r"(?:ax-)?book-(one|zero)$")
_CONST_RE = re.compile(r"ax-const\s*\[(.*)\]$")
_MP_RE = re.compile(r"(mp|gmp)\s+(\d+)\s+(\d+)$")
_LIFT_RE = re.compile(r"lift\s+(\d+)\s*\[(.*)\]$")
_DR_RE = re.compile(rf"dr\s+({_NAME})((?:\s+\d+)*)\s*(?:\[(.*)\])?$")
_PROV_RE = re.compile(r"#\s*(\d+)\s*<=\s*(\d+|glue)\s*$")


def _bindings(text: str | None, line: int, col: int) -> dict:
    out: dict = {}
    if text is None or not text.strip():
        return out
    for part in text.split(","):
        if ":=" not in part:
            raise ParseError(f"binding {part.strip()!r} lacks ':='", line, col)
        name, value = part.split(":=", 1)
        name = name.strip()
        if name in out:
            raise ParseError(f"metavariable {name} bound twice", line, col)
        out[name] = parse(value, line=line, column=col)
    return out


def _rationals(text: str, count: int, line: int, col: int):
    parts = [p for p in text.split(",")]
    if len(parts) != count:
        raise ParseError(f"expected {count} rational argument(s)", line, col)
    try:
        return [parse_rational(p) for p in parts]
    except ValueError as exc:
        raise ParseError(str(exc), line, col) from None


def parse_justification(text: str, line: int = 1, col: int = 1):
    """Parse one justification in either the kernel or the graded spelling."""
    s = text.strip()
    if s == "hyp":
        return Hyp()
    if s == "ax-zero":
        return GrZero()
    if m := _AX_RE.match(s):
        return AxiomL(m.group(1), _bindings(m.group(2), line, col))
    if m := _BOOK_RE.match(s):
        if m.group(1) == "imp":
            return BookImp(*_rationals(m.group(2), 2, line, col))
        return BookNeg(*_rationals(m.group(2), 1, line, col))
    if m := _BOOK0_RE.match(s):
        return BookOne() if m.group(1) == "one" else BookZero()
    if m := _CONST_RE.match(s):
        return GrConst(*_rationals(m.group(1), 1, line, col))
    if m := _MP_RE.match(s):
        cls = MP if m.group(1) == "mp" else GMP
        return cls(int(m.group(2)), int(m.group(3)))
    if m := _LIFT_RE.match(s):
        return Lift(int(m.group(1)), *_rationals(m.group(2), 1, line, col))
    if m := _DR_RE.match(s):
        refs = tuple(int(x) for x in m.group(2).split())
        return Derived(m.group(1), refs, _bindings(m.group(3), line, col))
    raise ParseError(f"unknown justification {s!r}", line, col)


def format_justification(j, graded: bool = False) -> str:
    text = str(j)
    if graded:
        if isinstance(j, AxiomL):
            return "ax-L" + text[2:]
        if isinstance(j, (BookImp, BookNeg, BookOne, BookZero)):
            return "ax-" + text
    return text


def _split_line(raw: str, lineno: int):
    if ";" not in raw:
        raise ParseError("missing ';' before the justification", lineno, len(raw) + 1)
    head, just = raw.split(";", 1)
    fields = head.split(":")
    offsets = []
    pos = 0
    for f in fields:
        offsets.append(pos + 1)
        pos += len(f) + 1
    try:
        idx = int(fields[0])
    except ValueError:
        raise ParseError("line must start with its index", lineno, 1) from None
    return idx, fields[1:], offsets[1:], just, len(head) + 2


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, raw


def parse_any_proof(text: str) -> Proof | GradedProof:
    """Parse a proof file; the presence of a grade column selects the kind."""
    kinds = set()
    lines = []
    for lineno, raw in _lines(text):
        idx, fields, offsets, just, jcol = _split_line(raw, lineno)
        if len(fields) not in (1, 2):
            raise ParseError("expected '<idx> : <formula> ; <just>' or "
                             "'<idx> : <grade> : <formula> ; <just>'", lineno, 1)
        kinds.add(len(fields))
        if len(kinds) > 1:
            raise ParseError("mixed graded and ungraded lines", lineno, 1)
        formula = parse(fields[-1], line=lineno, column=offsets[-1])
        j = parse_justification(just, lineno, jcol)
        if len(fields) == 2:
            try:
                grade = parse_rational(fields[0])
            except ValueError as exc:
                raise ParseError(str(exc), lineno, offsets[0]) from None
            lines.append(GradedProofLine(idx, formula, grade, j))
        else:
            lines.append(ProofLine(idx, formula, j))
    if not lines:
        raise ParseError("empty proof", 1, 1)
    return GradedProof(lines) if 2 in kinds else Proof(lines)


def parse_proof(text: str) -> Proof:
    p = parse_any_proof(text)
    if not isinstance(p, Proof):
        raise ParseError("expected an ungraded proof", 1, 1)
    return p


def parse_graded_proof(text: str) -> GradedProof:
    p = parse_any_proof(text)
    if not isinstance(p, GradedProof):
        raise ParseError("expected a graded proof", 1, 1)
    return p


def format_proof(proof: Proof | GradedProof, provenance=None) -> str:
    """Print a proof; ``provenance`` (one entry per line) becomes comments."""
    graded = isinstance(proof, GradedProof)
    out = []
    if provenance is not None:
        out.extend(f"# {i} <= {src}" for i, src in enumerate(provenance, 1))
    for line in proof.lines:
        just = format_justification(line.justification, graded)
        if graded:
            out.append(f"{line.index} : {format_rational(line.grade)} : "
                       f"{to_text(line.formula)} ; {just}")
        else:
            out.append(f"{line.index} : {to_text(line.formula)} ; {just}")
    return "".join(s + "\n" for s in out)


def read_provenance(text: str) -> list:
    """Recover the provenance comments of a proof file as a list."""
    found = {}
    for raw in text.splitlines():
        m = _PROV_RE.match(raw.strip())
        if m:
            src = m.group(2)
            found[int(m.group(1))] = src if src == "glue" else int(src)
    return [found[i] for i in sorted(found)]
