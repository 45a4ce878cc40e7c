"""Relational terms and their generalisation to labels.

A *term* is built from relation names, the four constants and the relational
operations.  A *label* additionally admits slice and graph literals as atoms,
so every term is a label.  Both share the classes below; ``is_term`` tells
them apart.

Equality and hashing are structural, with embedded slices and graphs compared
up to isomorphism (through their canonical keys).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Iterator

if TYPE_CHECKING:
    from .graphs import Graph, Slice


class Label:
    """Base class of every label.  Subclasses are frozen dataclasses."""

    @cached_property
    def key(self) -> tuple:
        raise NotImplementedError

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Label):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def children(self) -> tuple[Label, ...]:
        return ()

    def __repr__(self) -> str:
        from .syntax import format_label

        return f"<{type(self).__name__} {format_label(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class Name(Label):
    ident: str

    @cached_property
    def key(self) -> tuple:
        return ("name", self.ident)


@dataclass(frozen=True, eq=False, repr=False)
class Bottom(Label):
    @cached_property
    def key(self) -> tuple:
        return ("bot",)


@dataclass(frozen=True, eq=False, repr=False)
class Top(Label):
    @cached_property
    def key(self) -> tuple:
        return ("top",)


@dataclass(frozen=True, eq=False, repr=False)
class Id(Label):
    @cached_property
    def key(self) -> tuple:
        return ("id",)


@dataclass(frozen=True, eq=False, repr=False)
class Di(Label):
    @cached_property
    def key(self) -> tuple:
        return ("di",)


@dataclass(frozen=True, eq=False, repr=False)
class Compl(Label):
    arg: Label

    @cached_property
    def key(self) -> tuple:
        return ("compl", self.arg.key)

    def children(self) -> tuple[Label, ...]:
        return (self.arg,)


@dataclass(frozen=True, eq=False, repr=False)
class Conv(Label):
    arg: Label

    @cached_property
    def key(self) -> tuple:
        return ("conv", self.arg.key)

    def children(self) -> tuple[Label, ...]:
        return (self.arg,)


@dataclass(frozen=True, eq=False, repr=False)
class _Binary(Label):
    left: Label
    right: Label
    tag = ""

    @cached_property
    def key(self) -> tuple:
        return (self.tag, self.left.key, self.right.key)

    def children(self) -> tuple[Label, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=False, repr=False)
class Meet(_Binary):
    tag = "meet"


@dataclass(frozen=True, eq=False, repr=False)
class Join(_Binary):
    tag = "join"


@dataclass(frozen=True, eq=False, repr=False)
class RelProd(_Binary):
    tag = "prod"


@dataclass(frozen=True, eq=False, repr=False)
class RelSum(_Binary):
    tag = "sum"


@dataclass(frozen=True, eq=False, repr=False)
class SliceLit(Label):
    slice: Slice

    @cached_property
    def key(self) -> tuple:
        return ("slice", self.slice.key)


@dataclass(frozen=True, eq=False, repr=False)
class GraphLit(Label):
    graph: Graph

    @cached_property
    def key(self) -> tuple:
        return ("graph", self.graph.key)


BOTTOM = Bottom()
TOP = Top()
ID = Id()
DI = Di()

CONSTANTS = (Bottom, Top, Id, Di)
BINARY = (Meet, Join, RelProd, RelSum)

# Alias kept for readability at the front end: a term is a literal-free label.
Term = Label


@dataclass(frozen=True)
class Inclusion:
    lhs: Label
    rhs: Label

    def __str__(self) -> str:
        from .syntax import format_label

        return f"{format_label(self.lhs)} <= {format_label(self.rhs)}"


def is_term(label: Label) -> bool:
    if isinstance(label, (SliceLit, GraphLit)):
        return False
    return all(is_term(c) for c in label.children())


def names(label: Label) -> set[str]:
    """Relation names occurring in ``label``, including inside literals."""
    found: set[str] = set()
    for node in _walk(label):
        if isinstance(node, Name):
            found.add(node.ident)
    return found


def _walk(label: Label) -> Iterator[Label]:
    stack = [label]
    while stack:
        lab = stack.pop()
        yield lab
        if isinstance(lab, SliceLit):
            stack.extend(a.label for a in lab.slice.arcs)
        elif isinstance(lab, GraphLit):
            stack.extend(a.label for s in lab.graph.slices for a in s.arcs)
        else:
            stack.extend(lab.children())


def depth(label: Label) -> int:
    """Operator nesting depth; atoms have depth 0."""
    kids = label.children()
    return 1 + max(depth(k) for k in kids) if kids else 0
