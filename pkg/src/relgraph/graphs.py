"""Drafts, slices and graphs, with the constructions the calculus needs.

Nodes are plain integers.  Slices are immutable and compare by a canonical
key, so two slices are equal exactly when they are isomorphic (as labelled
drafts with distinguished input and output).  Graphs are ordered tuples of
slices, deduplicated on construction and compared as sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .terms import Compl, GraphLit, Id, Label, Name, SliceLit

NodeId = int


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Arc:
    source: NodeId
    label: Label
    target: NodeId

    def renamed(self, mapping: Mapping[NodeId, NodeId]) -> Arc:
        return Arc(
            mapping.get(self.source, self.source),
            self.label,
            mapping.get(self.target, self.target),
        )


@dataclass(frozen=True)
class Draft:
    nodes: frozenset
    arcs: tuple

    def __post_init__(self):
        for a in self.arcs:
            if a.source not in self.nodes or a.target not in self.nodes:
                raise GraphError(f"arc endpoint outside node set: {a}")


def _arc_order(a: Arc):
    return (a.source, a.target, a.label.key)


@dataclass(frozen=True, eq=False)
class Slice:
    """A draft together with an input and an output node."""

    nodes: frozenset
    arcs: tuple
    input: NodeId
    output: NodeId

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        arcs = tuple(sorted(set(self.arcs), key=_arc_order))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arcs", arcs)
        if self.input not in nodes or self.output not in nodes:
            raise GraphError("input and output must be nodes of the slice")
        for a in arcs:
            if a.source not in nodes or a.target not in nodes:
                raise GraphError(
                    f"arc endpoint outside node set: {a.source} -> {a.target}"
                )

    @property
    def draft(self) -> Draft:
        return Draft(self.nodes, self.arcs)

    @cached_property
    def _canon(self) -> tuple[tuple, dict[NodeId, int]]:
        return _canonical(self)

    @property
    def key(self) -> tuple:
        return self._canon[0]

    @property
    def ranking(self) -> dict[NodeId, int]:
        """Canonical position of every node; isomorphic slices agree on it."""
        return self._canon[1]

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Slice):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __repr__(self) -> str:
        from .syntax import format_slice

        return f"Slice{format_slice(self)}"

    def renamed(self, mapping: Mapping[NodeId, NodeId]) -> Slice:
        def m(n):
            return mapping.get(n, n)

        return Slice(
            frozenset(m(n) for n in self.nodes),
            tuple(a.renamed(mapping) for a in self.arcs),
            m(self.input),
            m(self.output),
        )

    def same_as(self, other: Slice) -> bool:
        """Literal equality: same node names, arcs and distinguished nodes."""
        return (
            self.nodes == other.nodes
            and self.input == other.input
            and self.output == other.output
            and len(self.arcs) == len(other.arcs)
            and all(a == b for a, b in zip(self.arcs, other.arcs))
        )


class Graph:
    """A finite set of alternative slices, kept in first-seen order."""

    __slots__ = ("slices", "_key")

    def __init__(self, slices: Iterable[Slice] = ()):
        seen = set()
        kept = []
        for s in slices:
            if s.key not in seen:
                seen.add(s.key)
                kept.append(s)
        self.slices: tuple[Slice, ...] = tuple(kept)
        self._key = None

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(sorted(s.key for s in self.slices))
        return self._key

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.key == other.key

    def __len__(self) -> int:
        return len(self.slices)

    def __iter__(self) -> Iterator[Slice]:
        return iter(self.slices)

    def __contains__(self, s: object) -> bool:
        return any(s == t for t in self.slices)

    def __repr__(self) -> str:
        from .syntax import format_slice

        return "Graph{" + " ; ".join(format_slice(s) for s in self.slices) + "}"

    def index(self, s: Slice) -> int:
        for i, t in enumerate(self.slices):
            if t == s:
                return i
        raise GraphError("slice not in graph")

    def replace(self, i: int, replacement: Iterable[Slice]) -> Graph:
        """Graph with slice ``i`` swapped for ``replacement`` at the same place."""
        return Graph(self.slices[:i] + tuple(replacement) + self.slices[i + 1 :])

    def without(self, i: int) -> Graph:
        return Graph(self.slices[:i] + self.slices[i + 1 :])


# Canonical forms.  Colour refinement gives an isomorphism-invariant ordered
# partition of the nodes; ties are broken by trying every member of the first
# smallest non-singleton cell and keeping the least resulting encoding.


def _canonical(s: Slice) -> tuple[tuple, dict[NodeId, int]]:
    table = tuple(sorted({a.label.key for a in s.arcs}))
    lid = {k: i for i, k in enumerate(table)}
    edges = [(a.source, lid[a.label.key], a.target) for a in s.arcs]
    out_adj: dict[NodeId, list] = {v: [] for v in s.nodes}
    in_adj: dict[NodeId, list] = {v: [] for v in s.nodes}
    for u, l, v in edges:
        out_adj[u].append((l, v))
        in_adj[v].append((l, u))

    def ranked(sig: dict) -> dict:
        order = {x: i for i, x in enumerate(sorted(set(sig.values())))}
        return {v: order[sig[v]] for v in sig}

    def refine(color: dict) -> dict:
        cells = len(set(color.values()))
        while True:
            sig = {
                v: (
                    color[v],
                    tuple(sorted((l, color[t]) for l, t in out_adj[v])),
                    tuple(sorted((l, color[w]) for l, w in in_adj[v])),
                )
                for v in color
            }
            new = ranked(sig)
            n_new = len(set(new.values()))
            if n_new == cells:
                return new
            color, cells = new, n_new

    def encode(color: dict) -> tuple:
        return (
            len(color),
            color[s.input],
            color[s.output],
            tuple(sorted((color[u], l, color[v]) for u, l, v in edges)),
        )

    arcset = set(edges)

    def swap_is_automorphism(a: NodeId, b: NodeId) -> bool:
        if {a, b} & {s.input, s.output}:
            return False

        def sw(n):
            return b if n == a else a if n == b else n

        return all((sw(u), l, sw(v)) in arcset for u, l, v in edges)

    def search(color: dict) -> tuple[tuple, dict]:
        cells: dict[int, list] = {}
        for v, c in color.items():
            cells.setdefault(c, []).append(v)
        if len(cells) == len(color):
            return encode(color), color
        target = min((len(m), c) for c, m in cells.items() if len(m) > 1)[1]
        best = None
        tried: list[NodeId] = []
        for v in sorted(cells[target]):
            if any(swap_is_automorphism(w, v) for w in tried):
                continue
            tried.append(v)
            split = refine(ranked({w: (color[w], 0 if w == v else 1) for w in color}))
            cand = search(split)
            if best is None or cand[0] < best[0]:
                best = cand
        assert best is not None
        return best

    initial = {
        v: (
            v != s.input,
            v != s.output,
            tuple(sorted(l for l, _ in out_adj[v])),
            tuple(sorted(l for l, _ in in_adj[v])),
        )
        for v in s.nodes
    }
    encoding, ranking = search(refine(ranked(initial)))
    return (table,) + encoding, ranking


def canonical_iso(a: Slice, b: Slice) -> dict[NodeId, NodeId] | None:
    """An isomorphism from ``a`` onto ``b`` if the two are isomorphic."""
    if a.key != b.key:
        return None
    inverse = {r: n for n, r in b.ranking.items()}
    return {n: inverse[r] for n, r in a.ranking.items()}


def canonical_label(label: Label) -> Label:
    """Rebuild ``label`` with every embedded slice in canonical node naming."""
    if isinstance(label, SliceLit):
        return SliceLit(canonicalize(label.slice))
    if isinstance(label, GraphLit):
        return GraphLit(Graph(canonicalize(t) for t in label.graph))
    kids = label.children()
    if not kids:
        return label
    return type(label)(*(canonical_label(k) for k in kids))


def canonicalize(s: Slice) -> Slice:
    """Isomorphic copy of ``s`` on nodes ``0..n-1`` in canonical order."""
    r = s.ranking
    return Slice(
        frozenset(r.values()),
        tuple(Arc(r[a.source], canonical_label(a.label), r[a.target]) for a in s.arcs),
        r[s.input],
        r[s.output],
    )


def label_equal(l: Label, k: Label) -> bool:
    return l.key == k.key


# Constructions.


def single_arc_slice(label: Label, reverse: bool = False) -> Slice:
    arc = Arc(1, label, 0) if reverse else Arc(0, label, 1)
    return Slice(frozenset({0, 1}), (arc,), 0, 1)


def difference_slice(l: Label, k: Label) -> Slice:
    return Slice(frozenset({0, 1}), (Arc(0, l, 1), Arc(0, Compl(k), 1)), 0, 1)


def add_arc(s: Slice, arc: Arc) -> Slice:
    return Slice(s.nodes | {arc.source, arc.target}, s.arcs + (arc,), s.input, s.output)


def glue_slice(s: Slice, u: NodeId, v: NodeId, t: Slice) -> Slice:
    """Pushout of ``s`` and ``t`` identifying t's input with u and output with v.

    The nodes of ``t`` are renamed above every host node, so host names stay
    stable.  If t's input and output coincide, u and v are merged into u.
    """
    host = set(s.nodes) | {u, v}
    base = max(host) + 1
    ren = {n: base + i for i, n in enumerate(sorted(t.nodes))}

    parent: dict[NodeId, NodeId] = {}

    def find(n):
        while parent.get(n, n) != n:
            n = parent[n]
        return n

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    union(u, ren[t.input])
    union(v, ren[t.output])
    everything = host | set(ren.values())
    classes: dict[NodeId, list] = {}
    for n in everything:
        classes.setdefault(find(n), []).append(n)
    rep: dict[NodeId, NodeId] = {}
    for members in classes.values():
        if u in members:
            chosen = u
        elif v in members:
            chosen = v
        else:
            chosen = min(members)
        for n in members:
            rep[n] = chosen

    arcs = [Arc(rep[a.source], a.label, rep[a.target]) for a in s.arcs]
    arcs += [Arc(rep[ren[a.source]], a.label, rep[ren[a.target]]) for a in t.arcs]
    return Slice(frozenset(rep.values()), tuple(arcs), rep[s.input], rep[s.output])


def glue_graph(s: Slice, u: NodeId, v: NodeId, h: Graph) -> Graph:
    return Graph(glue_slice(s, u, v, t) for t in h)


def eliminate_id_arc(s: Slice, arc: Arc) -> Slice:
    """Drop an identity arc by renaming its source to its target."""
    if not isinstance(arc.label, Id):
        raise GraphError("only identity arcs can be eliminated")
    if arc not in s.arcs:
        raise GraphError("arc is not in the slice")
    rest = [a for a in s.arcs if a != arc]
    mapping = {arc.source: arc.target}
    nodes = s.nodes - {arc.source} | {arc.target}
    return Slice(
        nodes,
        tuple(a.renamed(mapping) for a in rest),
        mapping.get(s.input, s.input),
        mapping.get(s.output, s.output),
    )


def slice_of_graph(g: Graph) -> Slice:
    return Slice(
        frozenset({0, 1}), tuple(Arc(0, Compl(SliceLit(t)), 1) for t in g), 0, 1
    )


def is_small(s: Slice) -> bool:
    return s.nodes == {s.input, s.output}


def graph_of_slice(s: Slice) -> Graph:
    """Move a complement inside a small two-node slice.

    Only defined when input and output differ: for a single-node slice the
    complement of its extension is not expressible by the per-arc slices.
    """
    if not is_small(s):
        raise GraphError("graph of slice needs a small slice")
    if s.input == s.output:
        raise GraphError("graph of slice needs distinct input and output")
    where = {s.input: 0, s.output: 1}
    return Graph(
        Slice(
            frozenset({0, 1}),
            (Arc(where[a.source], Compl(a.label), where[a.target]),),
            0,
            1,
        )
        for a in s.arcs
    )


# Basic objects and measures.


def is_basic(obj) -> bool:
    if isinstance(obj, Graph):
        return all(is_basic(s) for s in obj)
    if isinstance(obj, (Slice, Draft)):
        return all(is_basic(a.label) for a in obj.arcs)
    if isinstance(obj, Name):
        return True
    if isinstance(obj, Compl) and isinstance(obj.arg, SliceLit):
        return is_basic(obj.arg.slice)
    return False


def _require_basic(obj) -> None:
    if not is_basic(obj):
        raise GraphError("measure is only defined for basic objects")


def rank(obj) -> int:
    _require_basic(obj)
    return _rank(obj)


def _rank(obj) -> int:
    if isinstance(obj, Name):
        return 0
    if isinstance(obj, Compl):
        return _rank(obj.arg.slice) + 1
    return sum(_rank(a.label) for a in obj.arcs)


def embedded_slices(obj) -> frozenset[Slice]:
    """Slices occurring under a complement, at any depth, up to isomorphism."""
    _require_basic(obj)
    found: set[Slice] = set()
    _collect(obj, found)
    return frozenset(canonicalize(t) for t in found)


def _collect(obj, found: set) -> None:
    if isinstance(obj, Name):
        return
    if isinstance(obj, Compl):
        found.add(obj.arg.slice)
        _collect(obj.arg.slice, found)
        return
    for a in obj.arcs:
        _collect(a.label, found)
