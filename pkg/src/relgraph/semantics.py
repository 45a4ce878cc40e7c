"""Finite-model semantics and the brute-force countermodel oracle.

Two evaluators live here.  The scalar one works on a single ``Model`` with
relations as sets of pairs and is written for clarity.  ``ModelBatch``
evaluates the same definitions over many models at once: each relation is a
``(n, n, W)`` array of ``uint64`` words and bit ``b`` of word ``w`` belongs to
model ``64*w + b`` of the batch.  The oracle enumerates all interpretations
of the occurring names through batches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import Draft, Graph, Slice, difference_slice
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
    names,
)

Pair = tuple


@dataclass(frozen=True)
class Model:
    carrier: tuple
    relations: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        elems = set(self.carrier)
        for name, pairs in self.relations.items():
            for a, b in pairs:
                if a not in elems or b not in elems:
                    raise ValueError(
                        f"pair ({a}, {b}) of {name} is outside the carrier"
                    )

    @property
    def size(self) -> int:
        return len(self.carrier)

    def relation(self, name: str) -> frozenset:
        # Names the model does not mention are read as the empty relation.
        return frozenset(self.relations.get(name, ()))


class BudgetExceeded(RuntimeError):
    def __init__(self, bits: int, budget: int):
        self.bits = bits
        self.budget = budget
        super().__init__(
            f"search space of 2^{bits} models exceeds the budget of 2^{budget}"
        )


# Scalar evaluation.


def eval_label(m: Model, label: Label) -> frozenset:
    M = m.carrier
    if isinstance(label, Name):
        return m.relation(label.ident)
    if isinstance(label, Bottom):
        return frozenset()
    if isinstance(label, Top):
        return frozenset(product(M, M))
    if isinstance(label, Id):
        return frozenset((a, a) for a in M)
    if isinstance(label, Di):
        return frozenset((a, b) for a in M for b in M if a != b)
    if isinstance(label, Compl):
        return frozenset(product(M, M)) - eval_label(m, label.arg)
    if isinstance(label, Conv):
        return frozenset((b, a) for a, b in eval_label(m, label.arg))
    if isinstance(label, Meet):
        return eval_label(m, label.left) & eval_label(m, label.right)
    if isinstance(label, Join):
        return eval_label(m, label.left) | eval_label(m, label.right)
    if isinstance(label, RelProd):
        left, right = eval_label(m, label.left), eval_label(m, label.right)
        return frozenset((a, b) for a, c in left for c2, b in right if c == c2)
    if isinstance(label, RelSum):
        left, right = eval_label(m, label.left), eval_label(m, label.right)
        return frozenset(
            (a, b)
            for a in M
            for b in M
            if all((a, c) in left or (c, b) in right for c in M)
        )
    if isinstance(label, SliceLit):
        return slice_extension(m, label.slice)
    if isinstance(label, GraphLit):
        return graph_extension(m, label.graph)
    raise TypeError(f"cannot evaluate {label!r}")


def _search_order(s: Slice) -> list:
    """Input and output first, then greedily the most connected node."""
    order = [s.input] if s.input == s.output else [s.input, s.output]
    rest = set(s.nodes) - set(order)
    adj = {v: set() for v in s.nodes}
    for a in s.arcs:
        adj[a.source].add(a.target)
        adj[a.target].add(a.source)
    while rest:
        placed = set(order)
        nxt = max(sorted(rest), key=lambda v: len(adj[v] & placed))
        order.append(nxt)
        rest.discard(nxt)
    return order


def _arcs_by_step(s: Slice, order: list) -> list[list]:
    """For each position in ``order``, the arcs that become checkable there."""
    pos = {v: i for i, v in enumerate(order)}
    steps: list[list] = [[] for _ in order]
    for a in s.arcs:
        steps[max(pos[a.source], pos[a.target])].append(a)
    return steps


def satisfying_assignments(m: Model, s: Slice | Draft) -> Iterable[dict]:
    """All assignments of the nodes that satisfy every arc."""
    if isinstance(s, Draft):
        nodes = sorted(s.nodes)
        s = Slice(s.nodes, s.arcs, nodes[0], nodes[0]) if nodes else None
        if s is None:
            yield {}
            return
    order = _search_order(s)
    checks = _arcs_by_step(s, order)
    rels = {a.label.key: eval_label(m, a.label) for a in s.arcs}

    def rec(i: int, gamma: dict):
        if i == len(order):
            yield dict(gamma)
            return
        v = order[i]
        for e in m.carrier:
            gamma[v] = e
            if all(
                (gamma[a.source], gamma[a.target]) in rels[a.label.key]
                for a in checks[i]
            ):
                yield from rec(i + 1, gamma)
        del gamma[v]

    yield from rec(0, {})


def slice_extension(m: Model, s: Slice) -> frozenset:
    order = _search_order(s)
    checks = _arcs_by_step(s, order)
    rels = {a.label.key: eval_label(m, a.label) for a in s.arcs}
    head = 1 if s.input == s.output else 2

    def ok(i: int, gamma: dict) -> bool:
        return all(
            (gamma[a.source], gamma[a.target]) in rels[a.label.key] for a in checks[i]
        )

    def completes(i: int, gamma: dict) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for e in m.carrier:
            gamma[v] = e
            if ok(i, gamma) and completes(i + 1, gamma):
                del gamma[v]
                return True
        del gamma[v]
        return False

    found = set()
    for a in m.carrier:
        for b in m.carrier if head == 2 else (a,):
            gamma = {s.input: a, s.output: b}
            if all(ok(i, gamma) for i in range(head)) and completes(head, gamma):
                found.add((a, b))
    return frozenset(found)


def graph_extension(m: Model, g: Graph) -> frozenset:
    out: set = set()
    for s in g:
        out |= slice_extension(m, s)
    return frozenset(out)


def holds(m: Model, inc: Inclusion) -> bool:
    return eval_label(m, inc.lhs) <= eval_label(m, inc.rhs)


def holds_via_difference_slice(m: Model, inc: Inclusion) -> bool:
    return not slice_extension(m, difference_slice(inc.lhs, inc.rhs))


def falsifying_pair(m: Model, inc: Inclusion) -> Pair | None:
    bad = eval_label(m, inc.lhs) - eval_label(m, inc.rhs)
    return min(bad) if bad else None


def natural_model(d: Draft | Slice) -> Model:
    rels: dict[str, set] = {}
    for a in d.arcs:
        if isinstance(a.label, Name):
            rels.setdefault(a.label.ident, set()).add((a.source, a.target))
    return Model(
        tuple(sorted(d.nodes)), {k: frozenset(v) for k, v in sorted(rels.items())}
    )


# Bit-parallel evaluation.

_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)
_LOW_PATTERNS = [
    np.uint64(sum(1 << b for b in range(64) if (b >> pos) & 1)) for pos in range(6)
]


class ModelBatch:
    """A batch of models over the carrier ``range(size)``, one per bit lane."""

    def __init__(self, size: int, relations: dict[str, np.ndarray], valid: np.ndarray):
        self.size = size
        self.relations = relations
        self.valid = valid
        self.words = valid.shape[0]
        n, W = size, self.words
        self._top = np.broadcast_to(valid, (n, n, W))
        eye = np.eye(n, dtype=bool)[:, :, None]
        self._id = np.where(eye, valid, np.uint64(0))
        self._di = np.where(eye, np.uint64(0), valid)
        self._zero = np.zeros((n, n, W), dtype=np.uint64)

    @classmethod
    def enumerate(
        cls, name_list: Sequence[str], size: int, start: int, n_words: int
    ) -> ModelBatch:
        """Models ``start .. start + 64*n_words - 1`` in lexicographic bitmask order.

        The model index is the concatenation of the names' pair masks, the
        first name most significant; pair ``(i, j)`` is bit ``i*size + j``.
        """
        assert start % 64 == 0
        n, k = size, len(name_list)
        bits = k * n * n
        total = 1 << bits
        word_idx = (start >> 6) + np.arange(n_words, dtype=np.int64)
        valid = np.full(n_words, _ALL, dtype=np.uint64)
        if total < 64:
            valid[0] = np.uint64((1 << total) - 1)
        relations = {}
        for j, name in enumerate(name_list):
            arr = np.empty((n, n, n_words), dtype=np.uint64)
            for i in range(n):
                for t in range(n):
                    pos = n * n * (k - 1 - j) + i * n + t
                    if pos < 6:
                        arr[i, t, :] = _LOW_PATTERNS[pos]
                    else:
                        on = ((word_idx >> (pos - 6)) & 1).astype(bool)
                        arr[i, t, :] = np.where(on, _ALL, np.uint64(0))
            relations[name] = arr & valid
        return cls(size, relations, valid)

    @classmethod
    def from_models(cls, models: Sequence[Model]) -> ModelBatch:
        """Pack explicit models (all over ``range(size)``) into lanes."""
        size = models[0].size
        for m in models:
            if tuple(m.carrier) != tuple(range(size)):
                raise ValueError("batched models need the carrier range(size)")
        W = (len(models) + 63) // 64
        lanes = W * 64

        def pack(flags: np.ndarray) -> np.ndarray:
            padded = np.zeros(lanes, dtype=bool)
            padded[: len(flags)] = flags
            return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)

        valid = pack(np.ones(len(models), dtype=bool))
        all_names = sorted({k for m in models for k in m.relations})
        relations = {}
        for name in all_names:
            arr = np.zeros((size, size, W), dtype=np.uint64)
            for i in range(size):
                for t in range(size):
                    arr[i, t] = pack(
                        np.array([(i, t) in m.relation(name) for m in models])
                    )
            relations[name] = arr
        return cls(size, relations, valid)

    def model(self, lane: int) -> Model:
        w, b = divmod(lane, 64)
        bit = np.uint64(1 << b)
        rels = {}
        for name, arr in self.relations.items():
            rels[name] = frozenset(
                (i, t)
                for i in range(self.size)
                for t in range(self.size)
                if arr[i, t, w] & bit
            )
        return Model(tuple(range(self.size)), rels)

    def eval(self, label: Label) -> np.ndarray:
        if isinstance(label, Name):
            return self.relations.get(label.ident, self._zero)
        if isinstance(label, Bottom):
            return self._zero
        if isinstance(label, Top):
            return self._top
        if isinstance(label, Id):
            return self._id
        if isinstance(label, Di):
            return self._di
        if isinstance(label, Compl):
            return ~self.eval(label.arg) & self.valid
        if isinstance(label, Conv):
            return self.eval(label.arg).transpose(1, 0, 2)
        if isinstance(label, Meet):
            return self.eval(label.left) & self.eval(label.right)
        if isinstance(label, Join):
            return self.eval(label.left) | self.eval(label.right)
        if isinstance(label, RelProd):
            left, right = self.eval(label.left), self.eval(label.right)
            return np.bitwise_or.reduce(
                left[:, :, None, :] & right[None, :, :, :], axis=1
            )
        if isinstance(label, RelSum):
            left, right = self.eval(label.left), self.eval(label.right)
            return np.bitwise_and.reduce(
                left[:, :, None, :] | right[None, :, :, :], axis=1
            )
        if isinstance(label, SliceLit):
            return self.slice_extension(label.slice)
        if isinstance(label, GraphLit):
            return self.graph_extension(label.graph)
        raise TypeError(f"cannot evaluate {label!r}")

    def slice_extension(self, s: Slice) -> np.ndarray:
        n = self.size
        order = _search_order(s)
        checks = _arcs_by_step(s, order)
        rels = {a.label.key: self.eval(a.label) for a in s.arcs}
        head = 1 if s.input == s.output else 2

        def step_mask(i: int, gamma: dict, acc: np.ndarray) -> np.ndarray:
            for a in checks[i]:
                acc = acc & rels[a.label.key][gamma[a.source], gamma[a.target]]
            return acc

        def rec(i: int, gamma: dict, acc: np.ndarray) -> np.ndarray:
            if i == len(order) or not acc.any():
                return acc
            v = order[i]
            out = np.zeros_like(acc)
            for e in range(n):
                gamma[v] = e
                out |= rec(i + 1, gamma, step_mask(i, gamma, acc))
            del gamma[v]
            return out

        result = np.zeros((n, n, self.words), dtype=np.uint64)
        for a in range(n):
            for b in range(n) if head == 2 else (a,):
                gamma = {s.input: a, s.output: b}
                acc = self.valid
                for i in range(head):
                    acc = step_mask(i, gamma, acc)
                result[a, b] = rec(head, gamma, acc)
        return result

    def graph_extension(self, g: Graph) -> np.ndarray:
        out = self._zero.copy()
        for s in g:
            out |= self.slice_extension(s)
        return out

    def holds(self, inc: Inclusion) -> np.ndarray:
        """Per-lane mask of the models where ``inc`` holds."""
        return ~self.nonempty(self.eval(inc.lhs) & ~self.eval(inc.rhs)) & self.valid

    @staticmethod
    def nonempty(rel: np.ndarray) -> np.ndarray:
        return np.bitwise_or.reduce(rel.reshape(-1, rel.shape[-1]), axis=0)

    def lane_bits(self, rel: np.ndarray) -> np.ndarray:
        """Unpack ``(n, n, W)`` words into a ``(lanes, n, n)`` boolean array."""
        raw = np.ascontiguousarray(rel.astype("<u8")).view(np.uint8)
        bits = np.unpackbits(raw, axis=-1, bitorder="little")
        return bits.transpose(2, 0, 1).astype(bool)


def first_lane(mask: np.ndarray) -> int | None:
    nz = np.flatnonzero(mask)
    if nz.size == 0:
        return None
    w = int(nz[0])
    word = int(mask[w])
    return w * 64 + ((word & -word).bit_length() - 1)


DEFAULT_MODEL_BUDGET = 30
_CHUNK_WORDS = 4096


def find_countermodel(
    inc: Inclusion,
    hyps: Sequence[Inclusion] = (),
    max_size: int = 3,
    budget: int = DEFAULT_MODEL_BUDGET,
) -> Model | None:
    """First model (size ascending, then bitmask order) refuting ``inc`` under ``hyps``.

    ``budget`` bounds ``names * size**2``, the number of bits that index the
    models of one size; exceeding it raises ``BudgetExceeded``.
    """
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    occurring = set(names(inc.lhs)) | set(names(inc.rhs))
    for h in hyps:
        occurring |= names(h.lhs) | names(h.rhs)
    name_list = sorted(occurring)
    for size in range(1, max_size + 1):
        bits = len(name_list) * size * size
        if bits > budget:
            raise BudgetExceeded(bits, budget)
        total = 1 << bits
        total_words = max(1, total // 64)
        for w0 in range(0, total_words, _CHUNK_WORDS):
            n_words = min(_CHUNK_WORDS, total_words - w0)
            batch = ModelBatch.enumerate(name_list, size, w0 * 64, n_words)
            mask = ~batch.holds(inc) & batch.valid
            for h in hyps:
                if not mask.any():
                    break
                mask &= batch.holds(h)
            lane = first_lane(mask)
            if lane is not None:
                model = batch.model(lane)
                return Model(model.carrier, {k: model.relation(k) for k in name_list})
    return None


def all_models(name_list: Sequence[str], size: int) -> ModelBatch:
    """Every interpretation of ``name_list`` over ``range(size)`` in one batch."""
    bits = len(name_list) * size * size
    return ModelBatch.enumerate(name_list, size, 0, max(1, (1 << bits) // 64))
