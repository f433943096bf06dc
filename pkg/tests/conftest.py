from __future__ import annotations

from pathlib import Path

import pytest

from pavelka.proofs import default_rules, parse_graded_proof, parse_proof
from pavelka.syntax import Theory, parse_theory

CORPUS = Path(__file__).parent / "corpus"

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    number, title = marker
    failed = report.outcome == "failed"
    if report.when == "call" or failed:
        prev = _ACCEPTANCE.get(number, (title, "PASS"))[1]
        status = "FAIL" if failed or prev == "FAIL" else "PASS"
        if report.outcome == "skipped":
            status = "SKIP"
        _ACCEPTANCE[number] = (title, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("acceptance")
    if m is not None:
        outcome.get_result().acceptance = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} [{status}] {title}")


@pytest.fixture(scope="session")
def rules():
    return default_rules()


def load_kernel_corpus():
    out = []
    for path in sorted((CORPUS / "kernel").glob("*.pf")):
        system = path.suffixes[0][1:]
        theory = parse_theory(path.with_suffix(".th").read_text())
        out.append((path.name, system, parse_proof(path.read_text()),
                    Theory(f for f, _ in theory.support())))
    return out


def load_graded_corpus():
    out = []
    for path in sorted((CORPUS / "grpl").glob("*.gpf")):
        theory = parse_theory(path.with_suffix(".th").read_text())
        out.append((path.name, parse_graded_proof(path.read_text()), theory))
    return out


def load_elimination_cases():
    from pavelka.syntax import parse
    cases = []
    for line in (CORPUS / "eliminate.txt").read_text().splitlines():
        parts = [p.strip() for p in line.split(";")]
        cases.append((Theory(parse(p) for p in parts[1:]), parse(parts[0])))
    return cases
