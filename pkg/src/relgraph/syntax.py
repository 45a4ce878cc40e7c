"""ASCII surface syntax for relational terms.

    term      := join
    join      := meet ("|" meet)*
    meet      := sum ("&" sum)*
    sum       := prod ("!" prod)*
    prod      := unary (";" unary)*
    unary     := "~" unary | atom "^"*
    atom      := name | "0" | "1" | "I" | "D" | "(" term ")"
    inclusion := term "<=" term

Names match ``[a-z][a-zA-Z0-9_']*``.  All binary operators are
left-associative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import (
    BOTTOM,
    DI,
    ID,
    TOP,
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


class ParseError(ValueError):
    def __init__(
        self, message: str, position: int, expected: frozenset[str] = frozenset()
    ):
        self.position = position
        self.expected = expected
        detail = (
            f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        )
        super().__init__(f"{message} at position {position}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<incl><=)|(?P<name>[a-z][a-zA-Z0-9_']*)|(?P<const>[01ID])|(?P<op>[~^;!&|()])"
)

_BINARY_LEVELS = [("|", Join), ("&", Meet), ("!", RelSum), (";", RelProd)]
_CONST_TOKENS = {"0": BOTTOM, "1": TOP, "I": ID, "D": DI}
_ATOM_START = frozenset({"name", "0", "1", "I", "D", "(", "~"})


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            tokens.append(
                Token(value if kind in ("op", "const", "incl") else kind, value, pos)
            )
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail({kind})
        return self.advance()

    def fail(self, expected) -> None:
        t = self.tok
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.pos, frozenset(expected))

    def binary(self, level: int) -> Label:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        op, ctor = _BINARY_LEVELS[level]
        left = self.binary(level + 1)
        while self.tok.kind == op:
            self.advance()
            left = ctor(left, self.binary(level + 1))
        return left

    def unary(self) -> Label:
        if self.tok.kind == "~":
            self.advance()
            return Compl(self.unary())
        node = self.atom()
        while self.tok.kind == "^":
            self.advance()
            node = Conv(node)
        return node

    def atom(self) -> Label:
        t = self.tok
        if t.kind == "name":
            self.advance()
            return Name(t.text)
        if t.kind in _CONST_TOKENS:
            self.advance()
            return _CONST_TOKENS[t.kind]
        if t.kind == "(":
            self.advance()
            inner = self.binary(0)
            self.expect(")")
            return inner
        self.fail(_ATOM_START)
        raise AssertionError  # unreachable

    def finish(self, allowed: set[str]) -> None:
        if self.tok.kind != "eof":
            self.fail(allowed | {"eof"})


_FOLLOW_TERM = {"|", "&", "!", ";", "^"}


def parse_term(text: str) -> Label:
    p = _Parser(text)
    term = p.binary(0)
    p.finish(_FOLLOW_TERM)
    return term


def parse_inclusion(text: str) -> Inclusion:
    p = _Parser(text)
    lhs = p.binary(0)
    if p.tok.kind != "<=":
        p.fail(_FOLLOW_TERM | {"<="})
    p.advance()
    rhs = p.binary(0)
    p.finish(_FOLLOW_TERM)
    return Inclusion(lhs, rhs)


# Printing.  Levels follow the grammar; higher binds tighter.
_LEVEL = {Join: 1, Meet: 2, RelSum: 3, RelProd: 4}
_SYMBOL = {Join: " | ", Meet: " & ", RelSum: "!", RelProd: ";"}
_UNARY_LEVEL = 5
_POSTFIX_LEVEL = 6


def _level(t: Label) -> int:
    if type(t) in _LEVEL:
        return _LEVEL[type(t)]
    if isinstance(t, Compl):
        return _UNARY_LEVEL
    if isinstance(t, Conv):
        return _POSTFIX_LEVEL
    return 7


def _wrap(t: Label, minimum: int) -> str:
    s = format_label(t)
    return f"({s})" if _level(t) < minimum else s


def format_label(t: Label) -> str:
    """Print a label.  For terms the output reparses to the same tree."""
    if isinstance(t, Name):
        return t.ident
    if isinstance(t, Bottom):
        return "0"
    if isinstance(t, Top):
        return "1"
    if isinstance(t, Id):
        return "I"
    if isinstance(t, Di):
        return "D"
    if isinstance(t, Compl):
        return "~" + _wrap(t.arg, _UNARY_LEVEL)
    if isinstance(t, Conv):
        return _wrap(t.arg, _POSTFIX_LEVEL) + "^"
    if type(t) in _LEVEL:
        # A binary child under a different binary operator is always
        # parenthesised; only same-operator chains lean on associativity.
        left = _wrap(
            t.left, _LEVEL[type(t)] if type(t.left) is type(t) else _UNARY_LEVEL
        )
        right = _wrap(t.right, _UNARY_LEVEL)
        return left + _SYMBOL[type(t)] + right
    if isinstance(t, SliceLit):
        return format_slice(t.slice)
    if isinstance(t, GraphLit):
        return "{" + " ; ".join(format_slice(s) for s in t.graph.slices) + "}"
    raise TypeError(f"not a label: {t!r}")


def render_term(t: Label) -> str:
    return format_label(t)


def format_slice(s) -> str:
    arcs = ", ".join(f"{a.source} {format_label(a.label)} {a.target}" for a in s.arcs)
    loose = sorted(
        s.nodes
        - {s.input, s.output}
        - {n for a in s.arcs for n in (a.source, a.target)}
    )
    extra = f" +{loose}" if loose else ""
    return f"[{s.input}>{s.output}: {arcs}{extra}]"
