import random

import pytest
from conftest import CONVERSE_AXIOM, MODULAR_LAW, SUM_SHIFT, mk, neg
from oracle import evaluate, graph_ext, models, random_model, random_term

from relgraph.conversion import (
    ConversionLimit,
    NoRedex,
    RuleId,
    apply_at,
    apply_operational,
    apply_structural,
    consecutive_slice,
    convert_inclusion,
    initial_graph,
    label_rule_result,
    next_redex,
    normalize,
    operational_rule,
    slice_rule_result,
    to_basic,
    to_basic_inclusion,
)
from relgraph.graphs import Graph, Slice, embedded_slices, is_basic, single_arc_slice
from relgraph.morphism import find_morphism, is_zero_slice
from relgraph.syntax import parse_inclusion, parse_term
from relgraph.terms import (
    BOTTOM,
    DI,
    ID,
    TOP,
    Compl,
    Conv,
    GraphLit,
    Join,
    Meet,
    Name,
    RelProd,
    RelSum,
    SliceLit,
)

p, q, r, s, t = (Name(n) for n in "pqrst")
X, Y, Z = 0, 1, 2


def test_rule_catalogue():
    assert len(RuleId) == 15
    assert {r.value for r in RuleId} >= {"Bot", "GraphArc", "DerivedComplGraphArc"}


@pytest.mark.parametrize(
    "label, graph",
    [
        (BOTTOM, Graph([])),
        (TOP, Graph([Slice(frozenset({0, 1}), (), 0, 1)])),
        (ID, Graph([Slice(frozenset({0}), (), 0, 0)])),
        (DI, Graph([mk([(0, neg(Slice(frozenset({0}), (), 0, 0)), 1)], 0, 1)])),
        (Conv(p), Graph([mk([(1, "p", 0)], 0, 1)])),
        (Meet(p, q), Graph([mk([(0, "p", 1), (0, "q", 1)], 0, 1)])),
        (Join(p, q), Graph([mk([(0, "p", 1)], 0, 1), mk([(0, "q", 1)], 0, 1)])),
        (RelProd(p, q), Graph([mk([(X, "p", Z), (Z, "q", Y)], X, Y)])),
        (
            RelSum(p, q),
            Graph([mk([(X, neg(consecutive_slice(Compl(p), Compl(q))), Y)], X, Y)]),
        ),
    ],
)
def test_operational_rules(label, graph):
    result, step = apply_operational(label)
    assert result == graph
    assert step.before == label and step.after == GraphLit(graph)


def test_double_complement_rule():
    result, step = apply_operational(Compl(Compl(q)))
    assert result == q
    assert step.rule is RuleId.DOUBLE_COMPL
    assert apply_operational(p) is None
    assert operational_rule(Compl(p)) is None


def test_consecutive_slice_shape():
    c = consecutive_slice(p, q)
    assert c.nodes == {X, Y, Z} and c.input == X and c.output == Y


def test_label_rules():
    assert label_rule_result(RuleId.COMPL_NAME, Compl(r)) == neg(single_arc_slice(r))
    g = Graph([mk([(0, "p", 1)], 0, 1), mk([(0, "q", 1)], 0, 1)])
    got = label_rule_result(RuleId.COMPL_GRAPH, Compl(GraphLit(g)))
    assert got == SliceLit(
        mk([(0, neg(g.slices[0]), 1), (0, neg(g.slices[1]), 1)], 0, 1)
    )
    small = mk([(4, "r", 5), (5, "s", 4)], 4, 5)
    got = label_rule_result(RuleId.COMPL_SMALL_SLICE, Compl(GraphLit(Graph([small]))))
    assert got == GraphLit(Graph([mk([(0, "~r", 1)], 0, 1), mk([(1, "~s", 0)], 0, 1)]))
    with pytest.raises(NoRedex):
        label_rule_result(RuleId.COMPL_NAME, Compl(Compl(r)))
    with pytest.raises(NoRedex):
        label_rule_result(
            RuleId.COMPL_SMALL_SLICE, Compl(SliceLit(consecutive_slice(p, q)))
        )


def test_graph_arc_rule():
    one, looped = mk([(0, "p", 1)], 0, 1), mk([(0, "p", 1), (1, "q", 0)], 0, 0)
    host = mk([(0, "r", 2), (2, GraphLit(Graph([one, looped])), 3), (3, "t", 1)], 0, 1)
    j = next(i for i, a in enumerate(host.arcs) if isinstance(a.label, GraphLit))
    got = slice_rule_result(RuleId.GRAPH_ARC, host, j)
    assert got == Graph(
        [
            mk([(0, "r", 2), (2, "p", 3), (3, "t", 1)], 0, 1),
            mk([(0, "r", 2), (2, "p", 5), (5, "q", 2), (2, "t", 1)], 0, 1),
        ]
    )


def test_derived_rule_replaces_complemented_graph_arc():
    t1, t2 = mk([(0, "p", 1)], 0, 1), mk([(0, "q", 2), (2, "r", 1)], 0, 1)
    host = mk([(0, "s", 1), (0, Compl(GraphLit(Graph([t1, t2]))), 1)], 0, 1)
    j = next(i for i, a in enumerate(host.arcs) if isinstance(a.label, Compl))
    got = slice_rule_result(RuleId.DERIVED_COMPL_GRAPH_ARC, host, j)
    assert got == mk([(0, "s", 1), (0, neg(t1), 1), (0, neg(t2), 1)], 0, 1)
    # Same as the two primitive rules in sequence.
    sliced = mk(
        [
            (0, "s", 1),
            (0, label_rule_result(RuleId.COMPL_GRAPH, host.arcs[j].label), 1),
        ],
        0,
        1,
    )
    k = next(i for i, a in enumerate(sliced.arcs) if isinstance(a.label, SliceLit))
    assert slice_rule_result(RuleId.GRAPH_ARC, sliced, k) == Graph([got])


def test_apply_structural_picks_first_applicable_rule():
    result, step = apply_structural(Compl(r))
    assert step.rule is RuleId.COMPL_NAME and result == neg(single_arc_slice(r))
    assert apply_structural(r) is None


def test_empty_graph_arc_erases_slice():
    graph = Graph([mk([(X, "r", Z), (Z, GraphLit(Graph([])), Y)], X, Y)])
    got, steps = normalize(graph)
    assert got == Graph([])
    assert [st.rule for st in steps] == [RuleId.GRAPH_ARC]


def test_graph_arc_of_alternatives():
    alternatives = Graph([mk([(0, "s", 1)], 0, 1), mk([(0, "t", 1)], 0, 1)])
    graph = Graph([mk([(X, "r", Z), (Z, GraphLit(alternatives), Y)], X, Y)])
    got, _ = normalize(graph)
    assert got == Graph(
        [mk([(X, "r", Z), (Z, "s", Y)], X, Y), mk([(X, "r", Z), (Z, "t", Y)], X, Y)]
    )


def test_complemented_meet_graph():
    parallel = mk([(0, "s", 1), (0, "t", 1)], 0, 1)
    graph = Graph([mk([(X, "r", Z), (Z, Compl(GraphLit(Graph([parallel]))), Y)], X, Y)])
    got, steps = normalize(graph)
    assert got == Graph(
        [
            mk([(X, "r", Z), (Z, neg(single_arc_slice(s)), Y)], X, Y),
            mk([(X, "r", Z), (Z, neg(single_arc_slice(t)), Y)], X, Y),
        ]
    )
    assert steps[0].rule is RuleId.COMPL_SMALL_SLICE
    assert {st.rule for st in steps} == {
        RuleId.COMPL_SMALL_SLICE,
        RuleId.GRAPH_ARC,
        RuleId.COMPL_NAME,
    }


def test_simple_conversions():
    assert to_basic(BOTTOM)[0] == Graph([])
    g, steps = to_basic(parse_term("r;0"))
    assert g == Graph([]) and len(steps) >= 2
    assert to_basic(TOP)[0] == Graph([Slice(frozenset({0, 1}), (), 0, 1)])


def test_converse_axiom_converts_to_zero_slice():
    g = to_basic_inclusion(parse_inclusion(CONVERSE_AXIOM))
    inner = mk([(2, "p", 0), (0, "q", 1)], 2, 1)
    assert g == Graph([mk([(Z, "p", X), (X, "q", Y), (Z, neg(inner), Y)], X, Y)])
    assert is_zero_slice(g.slices[0]) is not None


def test_inclusion_conversion_single_names():
    g = to_basic_inclusion(parse_inclusion("p <= q"))
    assert g == Graph([mk([(0, "p", 1), (0, neg(single_arc_slice(q)), 1)], 0, 1)])


def test_modular_law_converts_to_basic_slice():
    g = to_basic_inclusion(parse_inclusion(MODULAR_LAW))
    assert len(g) == 1
    (s_prime,) = g.slices
    assert is_basic(s_prime)
    names = sorted(a.label.ident for a in s_prime.arcs if isinstance(a.label, Name))
    assert names == ["r", "s", "t"] and len(s_prime.arcs) == 4
    (neg_arc,) = [a for a in s_prime.arcs if isinstance(a.label, Compl)]
    t_prime = neg_arc.label.arg.slice
    expected = mk([(10, "s", 12), (12, "t", 11), (13, "r", 11), (13, "s", 12)], 10, 11)
    assert t_prime == expected
    theta = find_morphism(
        t_prime,
        s_prime,
        {t_prime.input: neg_arc.source, t_prime.output: neg_arc.target},
    )
    assert theta is not None


def test_sum_shift_converts_to_three_complemented_slices():
    g = to_basic_inclusion(parse_inclusion(SUM_SHIFT))
    (s_prime,) = g.slices
    t1 = mk([(0, "r", 1)], 0, 1)
    t2 = mk([(0, "p", 2), (2, "q", 1)], 0, 1)
    t3 = mk([(0, neg(single_arc_slice(q)), 2), (2, neg(t1), 1)], 0, 1)
    labels = {a.label for a in s_prime.arcs}
    assert labels == {p, neg(t1), neg(t2), neg(t3)}
    assert len(embedded_slices(s_prime)) == 4


def test_conversion_is_deterministic():
    rng = random.Random(43)
    for _ in range(40):
        term = random_term(rng, 4)
        a, steps_a = to_basic(term)
        b, steps_b = to_basic(term)
        assert [x.same_as(y) for x, y in zip(a.slices, b.slices)] == [True] * len(a)
        assert [st.rule for st in steps_a] == [st.rule for st in steps_b]


def test_conversion_preserves_semantics():
    rng = random.Random(47)
    for _ in range(60):
        term = random_term(rng, 3)
        g, _ = to_basic(term)
        assert is_basic(g)
        for om in models(["p", "q", "r"], 1):
            assert graph_ext(om, g) == evaluate(om, term)
        for _ in range(3):
            om = random_model(rng, ["p", "q", "r"], 2)
            assert graph_ext(om, g) == evaluate(om, term)


def test_each_step_preserves_semantics():
    rng = random.Random(53)
    for _ in range(15):
        term = random_term(rng, 3)
        g = initial_graph(term)
        om = random_model(rng, ["p", "q", "r"], 2)
        want = evaluate(om, term)
        while (found := next_redex(g)) is not None:
            g, _ = apply_at(g, *found)
            assert graph_ext(om, g) == want


def test_step_limit():
    with pytest.raises(ConversionLimit):
        normalize(initial_graph(parse_term("(p;q)!(q;r)")), max_steps=2)


def test_convert_inclusion_returns_steps():
    g, steps = convert_inclusion(parse_inclusion("p <= q"))
    assert [st.rule for st in steps] == [RuleId.COMPL_NAME]
    assert steps[0].path == (("slice", 0), ("arc", 0))
