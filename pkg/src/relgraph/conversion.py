"""Conversion of labels to equivalent basic graphs.

Rules rewrite one redex at a time inside a graph.  A redex is addressed by a
path from the top graph: ``("slice", i)`` selects a slice of a graph,
``("arc", j)`` an arc of a slice (in the slice's sorted arc order), and
``("arg",)``, ``("left",)``, ``("right",)`` and ``("lit",)`` step into a
label.  ``("lit",)`` enters the slice of a slice literal or the graph of a
graph literal.

The strategy is fixed and deterministic: the first redex in a left-to-right
walk is rewritten, with operational rules applied at the outermost operator
of an arc label and structural rules applied once everything below them is
basic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable

from .graphs import (
    Arc,
    Graph,
    GraphError,
    Slice,
    difference_slice,
    glue_graph,
    glue_slice,
    graph_of_slice,
    is_basic,
    is_small,
    single_arc_slice,
    slice_of_graph,
)
from .terms import (
    Bottom,
    Compl,
    Conv,
    Di,
    GraphLit,
    Id,
    Inclusion,
    Join,
    Label,
    Meet,
    Name,
    RelProd,
    RelSum,
    SliceLit,
    Top,
)


class RuleId(enum.Enum):
    BOT = "Bot"
    TOP = "Top"
    ID = "Id"
    DI = "Di"
    DOUBLE_COMPL = "DoubleCompl"
    CONV = "Conv"
    MEET = "Meet"
    JOIN = "Join"
    REL_PROD = "RelProd"
    REL_SUM = "RelSum"
    GRAPH_ARC = "GraphArc"
    COMPL_GRAPH = "ComplGraph"
    COMPL_SMALL_SLICE = "ComplSmallSlice"
    COMPL_NAME = "ComplName"
    DERIVED_COMPL_GRAPH_ARC = "DerivedComplGraphArc"


OPERATIONAL = frozenset(
    {
        RuleId.BOT,
        RuleId.TOP,
        RuleId.ID,
        RuleId.DI,
        RuleId.DOUBLE_COMPL,
        RuleId.CONV,
        RuleId.MEET,
        RuleId.JOIN,
        RuleId.REL_PROD,
        RuleId.REL_SUM,
    }
)
# Rules whose redex is a whole slice (addressed by the path of one of its arcs).
SLICE_RULES = frozenset({RuleId.GRAPH_ARC, RuleId.DERIVED_COMPL_GRAPH_ARC})

_HEAD_RULE = {
    Bottom: RuleId.BOT,
    Top: RuleId.TOP,
    Id: RuleId.ID,
    Di: RuleId.DI,
    Conv: RuleId.CONV,
    Meet: RuleId.MEET,
    Join: RuleId.JOIN,
    RelProd: RuleId.REL_PROD,
    RelSum: RuleId.REL_SUM,
}

Path = tuple


class NoRedex(ValueError):
    pass


class ConversionLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class ConversionStep:
    rule: RuleId
    path: Path
    before: Any
    after: Any


# Right-hand sides of the operational rules.  Node 0 is x, 1 is y, 2 is z.

_X, _Y, _Z = 0, 1, 2


def consecutive_slice(l: Label, k: Label) -> Slice:
    return Slice(frozenset({_X, _Y, _Z}), (Arc(_X, l, _Z), Arc(_Z, k, _Y)), _X, _Y)


def _one(*arcs: Arc, nodes=(_X, _Y), inp=_X, out=_Y) -> Graph:
    return Graph([Slice(frozenset(nodes), arcs, inp, out)])


def operational_result(l: Label) -> Label | Graph:
    """Right-hand side of the operational rule for ``l``; raises NoRedex."""
    if isinstance(l, Bottom):
        return Graph()
    if isinstance(l, Top):
        return _one()
    if isinstance(l, Id):
        return _one(nodes=(_X,), inp=_X, out=_X)
    if isinstance(l, Di):
        point = Slice(frozenset({_X}), (), _X, _X)
        return _one(Arc(_X, Compl(SliceLit(point)), _Y))
    if isinstance(l, Compl) and isinstance(l.arg, Compl):
        return l.arg.arg
    if isinstance(l, Conv):
        return _one(Arc(_Y, l.arg, _X))
    if isinstance(l, Meet):
        return _one(Arc(_X, l.left, _Y), Arc(_X, l.right, _Y))
    if isinstance(l, Join):
        return Graph([single_arc_slice(l.left), single_arc_slice(l.right)])
    if isinstance(l, RelProd):
        return Graph([consecutive_slice(l.left, l.right)])
    if isinstance(l, RelSum):
        inner = consecutive_slice(Compl(l.left), Compl(l.right))
        return _one(Arc(_X, Compl(SliceLit(inner)), _Y))
    raise NoRedex(f"no operational rule for {l!r}")


def operational_rule(l: Label) -> RuleId | None:
    if isinstance(l, Compl):
        return RuleId.DOUBLE_COMPL if isinstance(l.arg, Compl) else None
    return _HEAD_RULE.get(type(l))


def apply_operational(l: Label) -> tuple[Label | Graph, ConversionStep] | None:
    rule = operational_rule(l)
    if rule is None:
        return None
    result = operational_result(l)
    after = result if isinstance(result, Label) else GraphLit(result)
    return result, ConversionStep(rule, (), l, after)


# Structural rules.


def label_rule_result(rule: RuleId, l: Label) -> Label:
    """Contractum of a label-level rule at ``l``; raises NoRedex."""
    if rule in OPERATIONAL:
        if operational_rule(l) is not rule:
            raise NoRedex(f"{rule.value} does not apply to {l!r}")
        result = operational_result(l)
        return result if isinstance(result, Label) else GraphLit(result)
    if not isinstance(l, Compl):
        raise NoRedex(f"{rule.value} needs a complemented label")
    arg = l.arg
    if rule is RuleId.COMPL_NAME:
        if not isinstance(arg, Name):
            raise NoRedex("ComplName needs a complemented relation name")
        return Compl(SliceLit(single_arc_slice(arg)))
    if rule is RuleId.COMPL_GRAPH:
        if not isinstance(arg, GraphLit):
            raise NoRedex("ComplGraph needs a complemented graph")
        return SliceLit(slice_of_graph(arg.graph))
    if rule is RuleId.COMPL_SMALL_SLICE:
        if isinstance(arg, GraphLit) and len(arg.graph) == 1:
            s = arg.graph.slices[0]
        elif isinstance(arg, SliceLit):
            s = arg.slice
        else:
            raise NoRedex("ComplSmallSlice needs a complemented single slice")
        try:
            return GraphLit(graph_of_slice(s))
        except GraphError as exc:
            raise NoRedex(str(exc)) from None
    raise NoRedex(f"{rule.value} is not a label rule")


def slice_rule_result(rule: RuleId, s: Slice, j: int) -> Slice | Graph:
    """Contractum of a slice-level rule at arc ``j`` of ``s``; raises NoRedex."""
    if not 0 <= j < len(s.arcs):
        raise NoRedex("arc index out of range")
    arc = s.arcs[j]
    rest = Slice(s.nodes, s.arcs[:j] + s.arcs[j + 1 :], s.input, s.output)
    if rule is RuleId.GRAPH_ARC:
        if isinstance(arc.label, GraphLit):
            return glue_graph(rest, arc.source, arc.target, arc.label.graph)
        if isinstance(arc.label, SliceLit):
            return Graph([glue_slice(rest, arc.source, arc.target, arc.label.slice)])
        raise NoRedex("GraphArc needs an arc labelled by a graph or slice")
    if rule is RuleId.DERIVED_COMPL_GRAPH_ARC:
        if not (isinstance(arc.label, Compl) and isinstance(arc.label.arg, GraphLit)):
            raise NoRedex(
                "the derived rule needs an arc labelled by a complemented graph"
            )
        extra = tuple(
            Arc(arc.source, Compl(SliceLit(t)), arc.target) for t in arc.label.arg.graph
        )
        return Slice(s.nodes, rest.arcs + extra, s.input, s.output)
    raise NoRedex(f"{rule.value} is not a slice rule")


_STRUCTURAL_ORDER = (
    RuleId.GRAPH_ARC,
    RuleId.DERIVED_COMPL_GRAPH_ARC,
    RuleId.COMPL_SMALL_SLICE,
    RuleId.COMPL_GRAPH,
    RuleId.COMPL_NAME,
)


def apply_structural(target: Slice | Label, rule: RuleId | None = None):
    """Apply a structural rule to a slice (at its first fitting arc) or a label.

    Returns ``(result, step)`` or None when no requested rule applies.
    """
    rules = (rule,) if rule is not None else _STRUCTURAL_ORDER
    for r in rules:
        if isinstance(target, Slice):
            if r not in SLICE_RULES:
                continue
            for j in range(len(target.arcs)):
                try:
                    result = slice_rule_result(r, target, j)
                except NoRedex:
                    continue
                return result, ConversionStep(r, (("arc", j),), target, result)
        else:
            if r in SLICE_RULES:
                continue
            try:
                result = label_rule_result(r, target)
            except NoRedex:
                continue
            return result, ConversionStep(r, (), target, result)
    return None


# Navigation and rebuilding along paths.


def _child(obj, seg):
    kind = seg[0]
    if kind == "slice":
        return obj.slices[seg[1]]
    if kind == "arc":
        return obj.arcs[seg[1]].label
    if kind == "arg":
        return obj.arg
    if kind == "left":
        return obj.left
    if kind == "right":
        return obj.right
    if kind == "lit":
        return obj.slice if isinstance(obj, SliceLit) else obj.graph
    raise KeyError(seg)


def navigate(root, path: Path):
    obj = root
    for seg in path:
        try:
            obj = _child(obj, seg)
        except (AttributeError, IndexError, TypeError, KeyError):
            raise NoRedex(f"path {path!r} does not exist") from None
    return obj


def rebuild(obj, path: Path, fn: Callable):
    """Copy of ``obj`` with the object at ``path`` replaced by ``fn(old)``.

    When ``fn`` replaces a slice inside a graph it may return a graph, whose
    slices are spliced in place of the old one.
    """
    if not path:
        return fn(obj)
    seg, rest = path[0], path[1:]
    kind = seg[0]
    try:
        if kind == "slice":
            i = seg[1]
            new = rebuild(obj.slices[i], rest, fn)
            return obj.replace(i, new.slices if isinstance(new, Graph) else (new,))
        if kind == "arc":
            j = seg[1]
            a = obj.arcs[j]
            arcs = list(obj.arcs)
            arcs[j] = Arc(a.source, rebuild(a.label, rest, fn), a.target)
            return Slice(obj.nodes, tuple(arcs), obj.input, obj.output)
        if kind == "arg":
            return type(obj)(rebuild(obj.arg, rest, fn))
        if kind == "left":
            return type(obj)(rebuild(obj.left, rest, fn), obj.right)
        if kind == "right":
            return type(obj)(obj.left, rebuild(obj.right, rest, fn))
        if kind == "lit":
            if isinstance(obj, SliceLit):
                new = rebuild(obj.slice, rest, fn)
                return GraphLit(new) if isinstance(new, Graph) else SliceLit(new)
            return GraphLit(rebuild(obj.graph, rest, fn))
    except (AttributeError, IndexError, TypeError):
        pass
    raise NoRedex(f"path {path!r} does not exist")


def apply_at(root: Graph, rule: RuleId, path: Path) -> tuple[Graph, ConversionStep]:
    """Apply ``rule`` at ``path`` inside ``root``; raises NoRedex."""
    if rule in SLICE_RULES:
        if not path or path[-1][0] != "arc":
            raise NoRedex("slice rules are addressed by an arc path")
        j = path[-1][1]
        slice_path = path[:-1]
        s = navigate(root, slice_path)
        if not isinstance(s, Slice):
            raise NoRedex("path does not lead to a slice")
        result = slice_rule_result(rule, s, j)
        new_root = rebuild(root, slice_path, lambda _old: result)
        return new_root, ConversionStep(rule, path, s, result)
    label = navigate(root, path)
    if not isinstance(label, Label) or not path or path[-1][0] in ("slice",):
        raise NoRedex("path does not lead to a label")
    result = label_rule_result(rule, label)
    return rebuild(root, path, lambda _old: result), ConversionStep(
        rule, path, label, result
    )


# Strategy.


def _label_redex(l: Label, path: Path, top: bool):
    """First redex inside the label at ``path`` (``top``: it labels an arc)."""
    if isinstance(l, Name):
        return None
    rule = operational_rule(l)
    if rule is not None:
        return rule, path
    if isinstance(l, SliceLit):
        found = _slice_redex(l.slice, path + (("lit",),))
        if found or not top:
            return found
        return RuleId.GRAPH_ARC, path
    if isinstance(l, GraphLit):
        found = _graph_redex(l.graph, path + (("lit",),))
        if found or not top:
            return found
        return RuleId.GRAPH_ARC, path
    assert isinstance(l, Compl)
    arg = l.arg
    if isinstance(arg, Name):
        return RuleId.COMPL_NAME, path
    if isinstance(arg, SliceLit):
        return _slice_redex(arg.slice, path + (("arg",), ("lit",)))
    if isinstance(arg, GraphLit):
        found = _graph_redex(arg.graph, path + (("arg",), ("lit",)))
        if found:
            return found
        g = arg.graph
        if (
            len(g) == 1
            and is_small(g.slices[0])
            and g.slices[0].input != g.slices[0].output
        ):
            return RuleId.COMPL_SMALL_SLICE, path
        return (
            (RuleId.DERIVED_COMPL_GRAPH_ARC, path)
            if top
            else (RuleId.COMPL_GRAPH, path)
        )
    # Complement of an operation or constant: rewrite the operand first.
    return operational_rule(arg), path + (("arg",),)


def _slice_redex(s: Slice, path: Path):
    for j, a in enumerate(s.arcs):
        found = _label_redex(a.label, path + (("arc", j),), True)
        if found:
            return found
    return None


def _graph_redex(g: Graph, path: Path):
    for i, s in enumerate(g.slices):
        found = _slice_redex(s, path + (("slice", i),))
        if found:
            return found
    return None


def next_redex(g: Graph) -> tuple[RuleId, Path] | None:
    return _graph_redex(g, ())


DEFAULT_MAX_STEPS = 200_000


def normalize(
    g: Graph, max_steps: int = DEFAULT_MAX_STEPS
) -> tuple[Graph, list[ConversionStep]]:
    """Rewrite ``g`` with the fixed strategy until it is basic."""
    steps: list[ConversionStep] = []
    while True:
        found = next_redex(g)
        if found is None:
            assert is_basic(g)
            return g, steps
        if len(steps) >= max_steps:
            raise ConversionLimit(f"conversion did not finish within {max_steps} steps")
        rule, path = found
        g, step = apply_at(g, rule, path)
        steps.append(step)


def initial_graph(obj: Label | Inclusion) -> Graph:
    """The graph a label (or the difference of an inclusion) starts from."""
    if isinstance(obj, Inclusion):
        return Graph([difference_slice(obj.lhs, obj.rhs)])
    if isinstance(obj, SliceLit):
        return Graph([obj.slice])
    if isinstance(obj, GraphLit):
        return obj.graph
    return Graph([single_arc_slice(obj)])


def to_basic(
    l: Label, max_steps: int = DEFAULT_MAX_STEPS
) -> tuple[Graph, list[ConversionStep]]:
    return normalize(initial_graph(l), max_steps)


def to_basic_inclusion(inc: Inclusion, max_steps: int = DEFAULT_MAX_STEPS) -> Graph:
    return normalize(initial_graph(inc), max_steps)[0]


def convert_inclusion(
    inc: Inclusion, max_steps: int = DEFAULT_MAX_STEPS
) -> tuple[Graph, list[ConversionStep]]:
    return normalize(initial_graph(inc), max_steps)


__all__ = [
    "ConversionLimit",
    "ConversionStep",
    "NoRedex",
    "RuleId",
    "apply_at",
    "apply_operational",
    "apply_structural",
    "consecutive_slice",
    "convert_inclusion",
    "initial_graph",
    "navigate",
    "next_redex",
    "normalize",
    "operational_result",
    "to_basic",
    "to_basic_inclusion",
]
