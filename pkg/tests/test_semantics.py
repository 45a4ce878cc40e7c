import random

import numpy as np
import pytest
from conftest import CONVERSE_AXIOM, HYP, HYP_GOAL, mk, neg
from oracle import (
    evaluate,
    from_library,
    models,
    random_basic_slice,
    random_inclusion,
    random_model,
    random_term,
    to_library,
)
from oracle import holds as oracle_holds
from oracle import slice_ext as oracle_slice_ext

from relgraph.conversion import to_basic
from relgraph.graphs import Arc, Graph, Slice, difference_slice, single_arc_slice
from relgraph.semantics import (
    BudgetExceeded,
    Model,
    ModelBatch,
    all_models,
    eval_label,
    falsifying_pair,
    find_countermodel,
    graph_extension,
    holds,
    holds_via_difference_slice,
    natural_model,
    satisfying_assignments,
    slice_extension,
)
from relgraph.syntax import parse_inclusion, parse_term
from relgraph.terms import GraphLit, Inclusion, Name, SliceLit

M2 = Model((0, 1), {"p": frozenset({(0, 0)}), "q": frozenset()})


def test_model_rejects_pairs_outside_carrier():
    with pytest.raises(ValueError):
        Model((0,), {"p": frozenset({(0, 1)})})


def test_missing_names_are_empty():
    assert eval_label(M2, Name("zzz")) == frozenset()


def test_relative_sum_example():
    assert eval_label(M2, parse_term("p!q")) == frozenset()


@pytest.mark.parametrize(
    "text",
    ["p", "~p", "p^", "p;q", "p!q", "p & q", "p | q", "0", "1", "I", "D", "~(p;q^)!q"],
)
def test_eval_agrees_with_oracle_exhaustively(text):
    term = parse_term(text)
    for size in (1, 2):
        for om in models(["p", "q"], size):
            assert eval_label(to_library(om), term) == evaluate(om, term)


def test_eval_agrees_with_oracle_on_random_terms():
    rng = random.Random(11)
    for _ in range(150):
        term = random_term(rng, 4)
        om = random_model(rng, ["p", "q", "r"], rng.randint(1, 3))
        assert eval_label(to_library(om), term) == evaluate(om, term)


def test_slice_extension_basics():
    m = Model((0, 1, 2), {})
    full = {(a, b) for a in range(3) for b in range(3)}
    assert slice_extension(m, Slice(frozenset({0, 1}), (), 0, 1)) == full
    assert slice_extension(m, Slice(frozenset({0}), (), 0, 0)) == {
        (a, a) for a in range(3)
    }


def test_converse_axiom_reduct_is_empty():
    # z p x, x q y and z ~[z' p x' q y'] y: an image of the inner slice sits beside its complement.
    inner = mk([(2, "p", 0), (0, "q", 1)], 2, 1)
    s4 = mk([(2, "p", 0), (0, "q", 1), (2, neg(inner), 1)], 0, 1)
    for size in (1, 2):
        for om in models(["p", "q"], size):
            assert oracle_slice_ext(om, s4) == set()
            assert slice_extension(to_library(om), s4) == frozenset()
    batch = all_models(["p", "q"], 3)
    assert not (batch.nonempty(batch.slice_extension(s4)) & batch.valid).any()


def test_slice_and_graph_extension_agree_with_oracle():
    rng = random.Random(5)
    for _ in range(100):
        s = random_basic_slice(rng, 4, 5)
        om = random_model(rng, ["p", "q"], rng.randint(1, 3))
        m = to_library(om)
        assert slice_extension(m, s) == oracle_slice_ext(om, s)
        assert eval_label(m, SliceLit(s)) == slice_extension(m, s)
        g = Graph([s, single_arc_slice(Name("q"))])
        assert eval_label(m, GraphLit(g)) == graph_extension(m, g)


def test_graph_extension_of_join():
    g, _ = to_basic(parse_term("p | q"))
    assert len(g) == 2
    for om in models(["p", "q"], 2):
        m = to_library(om)
        assert graph_extension(m, g) == eval_label(m, parse_term("p | q"))
    assert graph_extension(M2, Graph([])) == frozenset()


def test_satisfying_assignments_are_complete():
    s = mk([(0, "p", 2), (2, "q", 1)], 0, 1)
    m = Model((0, 1), {"p": frozenset({(0, 0), (0, 1)}), "q": frozenset({(1, 1)})})
    got = sorted(tuple(sorted(g.items())) for g in satisfying_assignments(m, s))
    assert got == [((0, 0), (1, 1), (2, 1))]


def test_holds():
    assert holds(M2, parse_inclusion("p <= 1"))
    assert not holds(Model((0,), {"p": frozenset({(0, 0)})}), parse_inclusion("p <= q"))
    assert falsifying_pair(
        Model((0,), {"p": frozenset({(0, 0)})}), parse_inclusion("p <= q")
    ) == (0, 0)


def test_inclusion_iff_difference_slice_empty():
    rng = random.Random(13)
    for _ in range(120):
        inc = random_inclusion(rng, 3)
        om = random_model(rng, ["p", "q", "r"], rng.randint(1, 3))
        m = to_library(om)
        assert (
            holds(m, inc) == holds_via_difference_slice(m, inc) == oracle_holds(om, inc)
        )


def test_natural_model_of_modular_reduct():
    x, y, z = 0, 1, 2
    s = mk([(x, "r", y), (x, "s", z), (z, "t", y)], x, y)
    m = natural_model(s)
    assert m.carrier == (0, 1, 2)
    assert m.relations == {"r": {(x, y)}, "s": {(x, z)}, "t": {(z, y)}}
    assert holds(m, parse_inclusion("r & (s;t) <= s;((s^;r)&t)"))


def test_natural_model_of_difference_slice():
    m = natural_model(difference_slice(Name("p"), Name("q")))
    assert m.relations == {"p": {(0, 1)}}
    assert m.relation("q") == frozenset()
    assert not holds(m, parse_inclusion("p <= q"))
    assert natural_model(Slice(frozenset({0, 1}), (), 0, 1)).relations == {}


def test_batch_enumeration_matches_scalar_evaluation():
    batch = all_models(["p", "q"], 2)
    assert batch.valid.dtype == np.uint64
    term = parse_term("(p;~q) ! (q^ & p)")
    bits = batch.lane_bits(batch.eval(term))
    for lane in range(256):
        m = batch.model(lane)
        want = eval_label(m, term)
        got = {(i, j) for i in range(2) for j in range(2) if bits[lane, i, j]}
        assert got == want


def test_batch_order_first_name_most_significant():
    batch = all_models(["p", "q"], 1)
    lanes = [
        (batch.model(i).relation("p"), batch.model(i).relation("q")) for i in range(4)
    ]
    assert lanes == [
        (frozenset(), frozenset()),
        (frozenset(), frozenset({(0, 0)})),
        (frozenset({(0, 0)}), frozenset()),
        (frozenset({(0, 0)}), frozenset({(0, 0)})),
    ]


def test_batch_from_models_and_slice_extension():
    rng = random.Random(17)
    oms = [random_model(rng, ["p", "q"], 3) for _ in range(70)]
    batch = ModelBatch.from_models([to_library(o) for o in oms])
    for _ in range(20):
        s = random_basic_slice(rng, 4, 4)
        bits = batch.lane_bits(batch.slice_extension(s))
        for lane, om in enumerate(oms):
            got = {(i, j) for i in range(3) for j in range(3) if bits[lane, i, j]}
            assert got == oracle_slice_ext(om, s)


def test_find_countermodel_small_falsifier():
    m = find_countermodel(parse_inclusion("p <= q"), [], 1)
    assert m is not None and m.size == 1
    assert m.relation("p") == {(0, 0)} and m.relation("q") == frozenset()


def test_find_countermodel_none_for_valid_inclusions():
    assert find_countermodel(parse_inclusion(CONVERSE_AXIOM), [], 3) is None
    assert (
        find_countermodel(parse_inclusion(HYP_GOAL), [parse_inclusion(HYP)], 2) is None
    )
    assert find_countermodel(parse_inclusion(HYP_GOAL), [], 2) is not None


def test_find_countermodel_is_lexicographically_first():
    inc = parse_inclusion("p;q <= q;p")
    m = find_countermodel(inc, [], 2)
    assert m is not None and m.size == 2
    first = None
    for om in models(["p", "q"], 2):
        if not oracle_holds(om, inc):
            first = om
            break
    assert from_library(m).rels == first.rels
    assert find_countermodel(inc, [], 1) is None


def test_find_countermodel_budget():
    inc = parse_inclusion("p;q;r;s <= (p;q;r;s) | q")
    with pytest.raises(BudgetExceeded):
        find_countermodel(inc, [], 3, budget=30)


def test_countermodel_search_agrees_with_oracle():
    rng = random.Random(19)
    for _ in range(60):
        inc = random_inclusion(rng, 2, names=("p", "q"))
        m = find_countermodel(inc, [], 2)
        if m is None:
            assert all(
                oracle_holds(om, inc) for s in (1, 2) for om in models(["p", "q"], s)
            )
        else:
            assert not oracle_holds(from_library(m), inc)


def test_inclusion_type_holds_for_labels():
    s = difference_slice(Name("p"), Name("p"))
    assert holds(M2, Inclusion(SliceLit(s), parse_term("0")))


def test_arc_in_model_missing_from_carrier_raises():
    with pytest.raises(ValueError):
        Model((0, 1), {"p": frozenset({(2, 0)})})
    assert Arc(0, Name("p"), 1).renamed({0: 3}) == Arc(3, Name("p"), 1)
