"""JSON trees for labels, slices, graphs and traces; the model text format.

Labels are tagged objects: ``{"tag": "name", "id": "p"}``, ``{"tag": "bot"}``,
``{"tag": "compl", "arg": ...}``, ``{"tag": "prod", "left": ..., "right": ...}``,
``{"tag": "slice", "slice": ...}`` and ``{"tag": "graph", "graph": ...}``.
A slice is ``{"nodes": [...], "arcs": [[u, label, v], ...], "input": x,
"output": y}`` and a graph is ``{"slices": [...]}``.
"""

from __future__ import annotations

import json
import re
from typing import Any

from .conversion import ConversionStep, RuleId
from .engine import (
    Countermodel,
    Derivation,
    ErasureStep,
    ExpansionStep,
    HypothesisMode,
    Proved,
    Unknown,
)
from .graphs import Arc, Graph, Slice
from .semantics import Model
from .syntax import format_label
from .terms import (
    BOTTOM,
    DI,
    ID,
    TOP,
    Compl,
    Conv,
    GraphLit,
    Inclusion,
    Join,
    Label,
    Meet,
    Name,
    RelProd,
    RelSum,
    SliceLit,
)

TRACE_FORMAT = "relgraph-trace"
CONVERSION_FORMAT = "relgraph-conversion"
VERSION = 1


class FormatError(ValueError):
    pass


_CONSTANTS = {"bot": BOTTOM, "top": TOP, "id": ID, "di": DI}
_BINARY = {"meet": Meet, "join": Join, "prod": RelProd, "sum": RelSum}
_UNARY = {"compl": Compl, "conv": Conv}


def label_to_json(label: Label) -> dict:
    if isinstance(label, Name):
        return {"tag": "name", "id": label.ident}
    if isinstance(label, SliceLit):
        return {"tag": "slice", "slice": slice_to_json(label.slice)}
    if isinstance(label, GraphLit):
        return {"tag": "graph", "graph": graph_to_json(label.graph)}
    tag = label.key[0]
    if tag in _CONSTANTS:
        return {"tag": tag}
    if tag in _UNARY:
        return {"tag": tag, "arg": label_to_json(label.arg)}
    return {
        "tag": tag,
        "left": label_to_json(label.left),
        "right": label_to_json(label.right),
    }


def label_from_json(obj: Any) -> Label:
    try:
        tag = obj["tag"]
        if tag == "name":
            return Name(str(obj["id"]))
        if tag in _CONSTANTS:
            return _CONSTANTS[tag]
        if tag in _UNARY:
            return _UNARY[tag](label_from_json(obj["arg"]))
        if tag in _BINARY:
            return _BINARY[tag](
                label_from_json(obj["left"]), label_from_json(obj["right"])
            )
        if tag == "slice":
            return SliceLit(slice_from_json(obj["slice"]))
        if tag == "graph":
            return GraphLit(graph_from_json(obj["graph"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed label: {exc}") from None
    raise FormatError(f"unknown label tag {tag!r}")


def slice_to_json(s: Slice) -> dict:
    return {
        "nodes": sorted(s.nodes),
        "arcs": [[a.source, label_to_json(a.label), a.target] for a in s.arcs],
        "input": s.input,
        "output": s.output,
    }


def slice_from_json(obj: Any) -> Slice:
    try:
        arcs = tuple(Arc(int(u), label_from_json(l), int(v)) for u, l, v in obj["arcs"])
        return Slice(
            frozenset(int(n) for n in obj["nodes"]),
            arcs,
            int(obj["input"]),
            int(obj["output"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed slice: {exc}") from None


def graph_to_json(g: Graph) -> dict:
    return {"slices": [slice_to_json(s) for s in g]}


def graph_from_json(obj: Any) -> Graph:
    try:
        return Graph(slice_from_json(s) for s in obj["slices"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed graph: {exc}") from None


def inclusion_to_json(inc: Inclusion) -> dict:
    return {
        "text": str(inc),
        "lhs": label_to_json(inc.lhs),
        "rhs": label_to_json(inc.rhs),
    }


def inclusion_from_json(obj: Any) -> Inclusion:
    try:
        return Inclusion(label_from_json(obj["lhs"]), label_from_json(obj["rhs"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed inclusion: {exc}") from None


def _operand_to_json(x) -> dict:
    if isinstance(x, Label):
        return {"type": "label", "value": label_to_json(x)}
    if isinstance(x, Slice):
        return {"type": "slice", "value": slice_to_json(x)}
    if isinstance(x, Graph):
        return {"type": "graph", "value": graph_to_json(x)}
    raise TypeError(f"cannot serialise {x!r}")


def _operand_from_json(obj) -> Any:
    kind = obj.get("type")
    if kind == "label":
        return label_from_json(obj["value"])
    if kind == "slice":
        return slice_from_json(obj["value"])
    if kind == "graph":
        return graph_from_json(obj["value"])
    raise FormatError(f"unknown operand type {kind!r}")


def step_to_json(step) -> dict:
    if isinstance(step, ConversionStep):
        return {
            "kind": "conversion",
            "rule": step.rule.value,
            "path": [list(seg) for seg in step.path],
            "before": _operand_to_json(step.before),
            "after": _operand_to_json(step.after),
        }
    if isinstance(step, ExpansionStep):
        return {
            "kind": "expansion",
            "slice": step.slice_index,
            "u": step.u,
            "v": step.v,
            "pattern": slice_to_json(step.pattern),
            "plus": slice_to_json(step.plus),
            "minus": slice_to_json(step.minus),
        }
    if isinstance(step, ErasureStep):
        return {
            "kind": "erasure",
            "slice": step.slice_index,
            "hypothesis": step.hypothesis,
            "morphism": [[k, v] for k, v in sorted(step.morphism.items())],
        }
    raise TypeError(f"unknown step {step!r}")


def step_from_json(obj: Any):
    try:
        kind = obj["kind"]
        if kind == "conversion":
            path = tuple(tuple(seg) for seg in obj["path"])
            return ConversionStep(
                RuleId(obj["rule"]),
                path,
                _operand_from_json(obj["before"]),
                _operand_from_json(obj["after"]),
            )
        if kind == "expansion":
            return ExpansionStep(
                int(obj["slice"]),
                int(obj["u"]),
                int(obj["v"]),
                slice_from_json(obj["pattern"]),
                slice_from_json(obj["plus"]),
                slice_from_json(obj["minus"]),
            )
        if kind == "erasure":
            return ErasureStep(
                int(obj["slice"]),
                int(obj["hypothesis"]),
                {int(k): int(v) for k, v in obj["morphism"]},
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed step: {exc}") from None
    raise FormatError(f"unknown step kind {kind!r}")


def derivation_to_json(
    d: Derivation, verdict: str = "proved", stats: dict | None = None
) -> dict:
    doc = {
        "format": TRACE_FORMAT,
        "version": VERSION,
        "goal": inclusion_to_json(d.goal),
        "hypotheses": [inclusion_to_json(h) for h in d.hypotheses],
        "hypothesis_slices": [slice_to_json(s) for s in d.hypothesis_slices],
        "mode": d.mode.value,
        "initial_graph": graph_to_json(d.initial),
        "steps": [step_to_json(s) for s in d.steps],
        "final_graph": graph_to_json(d.final),
        "verdict": verdict,
    }
    if stats:
        doc["stats"] = stats
    return doc


def _check_header(doc: Any, expected: str) -> None:
    if not isinstance(doc, dict) or doc.get("format") != expected:
        raise FormatError(f"not a {expected} document")
    if doc.get("version") != VERSION:
        raise FormatError(f"unsupported version {doc.get('version')!r}")


def derivation_from_json(doc: Any) -> Derivation:
    _check_header(doc, TRACE_FORMAT)
    try:
        return Derivation(
            goal=inclusion_from_json(doc["goal"]),
            hypotheses=tuple(inclusion_from_json(h) for h in doc["hypotheses"]),
            hypothesis_slices=tuple(
                slice_from_json(s) for s in doc["hypothesis_slices"]
            ),
            mode=HypothesisMode(doc["mode"]),
            initial=graph_from_json(doc["initial_graph"]),
            steps=[step_from_json(s) for s in doc["steps"]],
            final=graph_from_json(doc["final_graph"]),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"malformed trace: {exc}") from None


def conversion_to_json(
    source: Label | Inclusion, initial: Graph, steps, final: Graph
) -> dict:
    src = (
        {"inclusion": inclusion_to_json(source)}
        if isinstance(source, Inclusion)
        else {"label": label_to_json(source)}
    )
    return {
        "format": CONVERSION_FORMAT,
        "version": VERSION,
        "source": src,
        "initial_graph": graph_to_json(initial),
        "steps": [step_to_json(s) for s in steps],
        "final_graph": graph_to_json(final),
    }


def conversion_from_json(doc: Any):
    """Return ``(source, initial, steps, final)`` from a conversion document."""
    _check_header(doc, CONVERSION_FORMAT)
    try:
        src = doc["source"]
        source = (
            inclusion_from_json(src["inclusion"])
            if "inclusion" in src
            else label_from_json(src["label"])
        )
        return (
            source,
            graph_from_json(doc["initial_graph"]),
            [step_from_json(s) for s in doc["steps"]],
            graph_from_json(doc["final_graph"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed conversion document: {exc}") from None


def verdict_to_json(v) -> dict:
    if isinstance(v, Proved):
        return {
            "verdict": "proved",
            "stats": v.stats,
            "trace": derivation_to_json(v.derivation, stats=v.stats),
        }
    if isinstance(v, Countermodel):
        _, index = renumber_model(v.model)
        return {
            "verdict": "countermodel",
            "model": model_to_json(v.model),
            "pair": [index[v.pair[0]], index[v.pair[1]]],
            "source": v.source,
        }
    if isinstance(v, Unknown):
        return {
            "verdict": "unknown",
            "depth": v.depth,
            "frontier": v.frontier,
            "reason": v.reason,
        }
    raise TypeError(f"unknown verdict {v!r}")


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# Models.


def renumber_model(m: Model) -> tuple[Model, dict]:
    """Copy of ``m`` over 0..n-1 (in sorted carrier order) and the renaming used."""
    index = {e: i for i, e in enumerate(sorted(m.carrier))}
    rels = {
        k: frozenset((index[a], index[b]) for a, b in v) for k, v in m.relations.items()
    }
    return Model(tuple(range(len(index))), rels), index


def model_to_json(m: Model) -> dict:
    norm, _ = renumber_model(m)
    return {
        "size": norm.size,
        "relations": {
            k: sorted(list(p) for p in v) for k, v in sorted(norm.relations.items())
        },
    }


def format_model(m: Model) -> str:
    """Text form: a ``size N`` line, then ``name = {(i,j), ...}`` per relation."""
    norm, _ = renumber_model(m)
    lines = [f"size {norm.size}"]
    for name, pairs in sorted(norm.relations.items()):
        body = ", ".join(f"({a},{b})" for a, b in sorted(pairs))
        lines.append(f"{name} = {{{body}}}")
    return "\n".join(lines) + "\n"


class ModelFormatError(FormatError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


_SIZE_RE = re.compile(r"^size\s+(\d+)$")
_REL_RE = re.compile(r"^([a-z][a-zA-Z0-9_']*)\s*=\s*\{(.*)\}$")
_PAIR_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_model(text: str) -> Model:
    size = None
    rels: dict[str, frozenset] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SIZE_RE.match(line)
        if m:
            if size is not None:
                raise ModelFormatError(no, "size given twice")
            size = int(m.group(1))
            if size < 1:
                raise ModelFormatError(no, "size must be positive")
            continue
        m = _REL_RE.match(line)
        if not m:
            raise ModelFormatError(
                no, f"expected 'size N' or 'name = {{...}}', got {line!r}"
            )
        if size is None:
            raise ModelFormatError(no, "relation given before the size line")
        name, body = m.group(1), m.group(2)
        if name in rels:
            raise ModelFormatError(no, f"relation {name} given twice")
        pairs = _PAIR_RE.findall(body)
        leftover = _PAIR_RE.sub("", body).replace(",", "").strip()
        if leftover:
            raise ModelFormatError(no, f"cannot read pairs in {body!r}")
        out = set()
        for a, b in pairs:
            a, b = int(a), int(b)
            if a >= size or b >= size:
                raise ModelFormatError(
                    no, f"pair ({a},{b}) outside carrier of size {size}"
                )
            out.add((a, b))
        rels[name] = frozenset(out)
    if size is None:
        raise ModelFormatError(max(1, len(text.splitlines())), "missing 'size N' line")
    return Model(tuple(range(size)), rels)


def describe_label(label: Label) -> str:
    return format_label(label)
