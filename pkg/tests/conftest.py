from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relgraph.graphs import Arc, Slice  # noqa: E402
from relgraph.syntax import parse_term  # noqa: E402
from relgraph.terms import Compl, Label, SliceLit  # noqa: E402


def lab(x) -> Label:
    return x if isinstance(x, Label) else parse_term(x)


def mk(arcs, inp, out, nodes=()) -> Slice:
    """Slice from ``(u, label, v)`` triples; string labels are parsed as terms."""
    arcs = tuple(Arc(u, lab(l), v) for u, l, v in arcs)
    all_nodes = (
        set(nodes) | {inp, out} | {n for a in arcs for n in (a.source, a.target)}
    )
    return Slice(frozenset(all_nodes), arcs, inp, out)


def neg(s: Slice) -> Compl:
    return Compl(SliceLit(s))


# Goals of the worked examples used across the suite.
CONVERSE_AXIOM = "p^ ; ~(p;q) <= ~q"
MODULAR_LAW = "r & (s;t) <= s;((s^;r)&t)"
SEVEN_NAMES = (
    "a & (((b;c)&d);(e&(f;g))) <= b;((((b^;a)&(c;e));g^)&(c;f)&(b^;((a;g^)&(d;f))));g"
)
SUM_SHIFT = "p;(q!r) <= (p;q)!r"
HYP_GOAL = "p;r';q <= p;r'';q"
HYP = "r' <= r''"


@pytest.fixture
def examples():
    return {
        "converse": CONVERSE_AXIOM,
        "modular": MODULAR_LAW,
        "seven": SEVEN_NAMES,
        "sum_shift": SUM_SHIFT,
        "hyp_goal": HYP_GOAL,
        "hyp": HYP,
    }


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    report = getattr(acceptance, "REPORT", None)
    if report:
        terminalreporter.section("acceptance criteria")
        for n in sorted(report):
            terminalreporter.write_line(report[n])
