"""Graphviz DOT output for slices and graphs.

Each slice of a graph becomes a cluster.  An arc whose label is a slice
literal (possibly complemented) is drawn as a nested cluster holding that
slice, dashed when complemented, and linked to the arc's endpoints by dashed
edges into the inner input and out of the inner output.
"""

from __future__ import annotations

from itertools import count

from .graphs import Graph, Slice
from .syntax import format_label
from .terms import Compl, GraphLit, Label, SliceLit


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.ids = count()

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def slice(self, s: Slice, depth: int, title: str, style: str = "solid") -> dict:
        """Emit ``s`` as a cluster and return its node-name map."""
        cid = next(self.ids)
        prefix = f"c{cid}"
        names = {n: f"{prefix}_n{n}" for n in sorted(s.nodes)}
        self.emit(depth, f"subgraph cluster_{cid} {{")
        self.emit(depth + 1, f"label={_quote(title)}; style={style};")
        for n, nm in names.items():
            attrs = [f"label={_quote(str(n))}"]
            if n == s.input and n == s.output:
                attrs.append("shape=doublecircle")
                attrs.append('xlabel="in/out"')
            elif n == s.input:
                attrs.append("shape=doublecircle")
                attrs.append('xlabel="in"')
            elif n == s.output:
                attrs.append("shape=doublecircle")
                attrs.append('xlabel="out"')
            else:
                attrs.append("shape=circle")
            self.emit(depth + 1, f"{nm} [{', '.join(attrs)}];")
        for a in s.arcs:
            self.arc(names[a.source], a.label, names[a.target], depth + 1)
        self.emit(depth, "}")
        return names

    def arc(self, src: str, label: Label, dst: str, depth: int) -> None:
        negated = isinstance(label, Compl) and isinstance(
            label.arg, (SliceLit, GraphLit)
        )
        inner = label.arg if negated else label
        if isinstance(inner, SliceLit):
            style = "dashed" if negated else "solid"
            title = "~" if negated else ""
            names = self.slice(inner.slice, depth, title, style)
            self._link(
                src, names[inner.slice.input], names[inner.slice.output], dst, depth
            )
        elif isinstance(inner, GraphLit):
            style = "dashed" if negated else "solid"
            cid = next(self.ids)
            self.emit(depth, f"subgraph cluster_{cid} {{")
            self.emit(
                depth + 1, f"label={_quote('~{}' if negated else '{}')}; style={style};"
            )
            for i, s in enumerate(inner.graph):
                names = self.slice(s, depth + 1, f"S{i + 1}", "dotted")
                self._link(src, names[s.input], names[s.output], dst, depth + 1)
            self.emit(depth, "}")
        else:
            self.emit(depth, f"{src} -> {dst} [label={_quote(format_label(label))}];")

    def _link(
        self, src: str, inner_in: str, inner_out: str, dst: str, depth: int
    ) -> None:
        self.emit(depth, f"{src} -> {inner_in} [style=dashed, arrowhead=none];")
        self.emit(depth, f"{inner_out} -> {dst} [style=dashed];")


def graph_to_dot(g: Graph, name: str = "G") -> str:
    """DOT text with one top-level cluster per slice; an empty graph has none."""
    em = _Emitter()
    em.emit(0, f"digraph {name} {{")
    em.emit(1, "compound=true; rankdir=LR;")
    if len(g) == 0:
        em.emit(1, 'empty [shape=plaintext, label="empty graph"];')
    for i, s in enumerate(g):
        em.slice(s, 1, f"S{i + 1}")
    em.emit(0, "}")
    return "\n".join(em.lines) + "\n"


def slice_to_dot(s: Slice, name: str = "G") -> str:
    return graph_to_dot(Graph([s]), name)
