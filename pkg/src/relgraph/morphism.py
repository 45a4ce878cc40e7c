"""Arc-preserving node maps between drafts, and the tests built on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .graphs import Arc, Graph, Slice
from .terms import Compl, SliceLit

Morphism = dict


def check_morphism(src, dst, mapping: Mapping) -> bool:
    """Does ``mapping`` send every node of ``src`` into ``dst`` and preserve arcs?"""
    if set(mapping) != set(src.nodes) or not set(mapping.values()) <= set(dst.nodes):
        return False
    arcs = set(dst.arcs)
    return all(
        Arc(mapping[a.source], a.label, mapping[a.target]) in arcs for a in src.arcs
    )


class _Index:
    def __init__(self, dst):
        self.nodes = sorted(dst.nodes)
        self.arcs = set(dst.arcs)
        self.out: dict = {}
        self.inc: dict = {}
        self.signature: dict = {v: set() for v in dst.nodes}
        for a in dst.arcs:
            self.out.setdefault((a.source, a.label), set()).add(a.target)
            self.inc.setdefault((a.target, a.label), set()).add(a.source)
            self.signature[a.source].add(("out", a.label))
            self.signature[a.target].add(("in", a.label))


def find_morphism(src, dst, pinned: Mapping | None = None) -> Morphism | None:
    """First morphism from ``src`` to ``dst`` extending ``pinned``, or None.

    Backtracking maps the most constrained node next: most arcs to already
    mapped nodes, then highest degree, then smallest id.
    """
    pinned = dict(pinned or {})
    index = _Index(dst)
    for k, v in pinned.items():
        if k not in src.nodes or v not in dst.nodes:
            return None

    adj: dict = {v: [] for v in src.nodes}
    for a in src.arcs:
        adj[a.source].append(a)
        if a.target != a.source:
            adj[a.target].append(a)
    need = {v: set() for v in src.nodes}
    for a in src.arcs:
        need[a.source].add(("out", a.label))
        need[a.target].add(("in", a.label))

    def consistent(v, image, mapping) -> bool:
        for a in adj[v]:
            s = image if a.source == v else mapping.get(a.source)
            t = image if a.target == v else mapping.get(a.target)
            if s is not None and t is not None and Arc(s, a.label, t) not in index.arcs:
                return False
        return True

    mapping: dict = {}
    for v in sorted(pinned):
        if not consistent(v, pinned[v], mapping):
            return None
        mapping[v] = pinned[v]

    def candidates(v) -> list:
        pool = None
        for a in adj[v]:
            if a.source == v and a.target in mapping and a.target != v:
                found = index.inc.get((mapping[a.target], a.label), set())
            elif a.target == v and a.source in mapping and a.source != v:
                found = index.out.get((mapping[a.source], a.label), set())
            else:
                continue
            pool = set(found) if pool is None else pool & found
            if not pool:
                return []
        if pool is None:
            pool = index.nodes
        return sorted(w for w in pool if need[v] <= index.signature[w])

    def pick():
        best, best_score = None, None
        for v in src.nodes:
            if v in mapping:
                continue
            linked = sum(
                1
                for a in adj[v]
                if (a.source in mapping and a.source != v)
                or (a.target in mapping and a.target != v)
            )
            score = (-linked, -len(adj[v]), v)
            if best_score is None or score < best_score:
                best, best_score = v, score
        return best

    def extend() -> bool:
        v = pick()
        if v is None:
            return True
        for w in candidates(v):
            if consistent(v, w, mapping):
                mapping[v] = w
                if extend():
                    return True
                del mapping[v]
        return False

    return dict(sorted(mapping.items())) if extend() else None


@dataclass(frozen=True)
class ZeroWitness:
    arc: Arc
    morphism: dict


@dataclass(frozen=True)
class ErasureWitness:
    hypothesis: int
    morphism: dict


def is_zero_slice(s: Slice) -> ZeroWitness | None:
    """A complemented-slice arc ``u ~T v`` with an image of T pinned at (u, v)."""
    for a in s.arcs:
        if not (isinstance(a.label, Compl) and isinstance(a.label.arg, SliceLit)):
            continue
        t = a.label.arg.slice
        if t.input == t.output and a.source != a.target:
            continue
        theta = find_morphism(t, s, {t.input: a.source, t.output: a.target})
        if theta is not None:
            return ZeroWitness(a, theta)
    return None


def is_zero_graph(g: Graph) -> bool:
    return all(is_zero_slice(s) is not None for s in g)


def is_erasable(s: Slice, hyps: Sequence[Slice]) -> ErasureWitness | None:
    """Unpinned morphism from some hypothesis slice into ``s``."""
    for i, h in enumerate(hyps):
        theta = find_morphism(h, s)
        if theta is not None:
            return ErasureWitness(i, theta)
    return None


def is_h_zero_graph(g: Graph, hyps: Sequence[Slice]) -> bool:
    return all(
        is_zero_slice(s) is not None or is_erasable(s, hyps) is not None for s in g
    )
