"""Proof search: expansion, hypothesis erasure, derivations and verdicts.

``prove`` converts the difference slice of the goal to a basic graph and then
tries to close every slice.  A slice is closed when it is zero, when a
hypothesis slice maps into it, or when both slices of some expansion close.
The search is an AND-OR iterative deepening over expansion depth.  Every
open slice is also probed with its natural model, which often refutes a
non-theorem long before the depth bound is reached.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Sequence, Union

from .conversion import (
    SLICE_RULES,
    ConversionStep,
    NoRedex,
    apply_at,
    convert_inclusion,
    initial_graph,
    navigate,
)
from .graphs import (
    Arc,
    Graph,
    GraphError,
    Slice,
    add_arc,
    canonical_iso,
    embedded_slices,
    glue_slice,
    is_basic,
    rank,
)
from .morphism import (
    ErasureWitness,
    ZeroWitness,
    check_morphism,
    find_morphism,
    is_erasable,
    is_zero_slice,
)
from .semantics import (
    DEFAULT_MODEL_BUDGET,
    BudgetExceeded,
    Model,
    falsifying_pair,
    find_countermodel,
    holds,
    natural_model,
)
from .terms import Compl, Inclusion, SliceLit


class HypothesisMode(enum.Enum):
    ERASE = "erase"
    HZERO = "hzero"


@dataclass(frozen=True)
class ProveConfig:
    max_expansion_depth: int = 4
    countermodel_max_size: int = 3
    hypothesis_mode: HypothesisMode = HypothesisMode.ERASE
    step_budget: int = 20_000
    model_budget: int = DEFAULT_MODEL_BUDGET

    def __post_init__(self):
        if self.max_expansion_depth < 0:
            raise ValueError("max_expansion_depth must be non-negative")
        for name in ("countermodel_max_size", "step_budget", "model_budget"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ExpansionStep:
    slice_index: int
    u: int
    v: int
    pattern: Slice
    plus: Slice
    minus: Slice


@dataclass(frozen=True)
class ErasureStep:
    slice_index: int
    hypothesis: int
    morphism: dict


Step = Union[ConversionStep, ExpansionStep, ErasureStep]


@dataclass
class Derivation:
    goal: Inclusion
    hypotheses: tuple
    hypothesis_slices: tuple
    mode: HypothesisMode
    initial: Graph
    steps: list
    final: Graph

    @property
    def conversion_steps(self) -> list[ConversionStep]:
        return [s for s in self.steps if isinstance(s, ConversionStep)]

    @property
    def expansions(self) -> list[ExpansionStep]:
        return [s for s in self.steps if isinstance(s, ExpansionStep)]

    @property
    def erasures(self) -> list[ErasureStep]:
        return [s for s in self.steps if isinstance(s, ErasureStep)]


@dataclass
class Proved:
    derivation: Derivation
    stats: dict = field(default_factory=dict)


@dataclass
class Countermodel:
    model: Model
    pair: tuple
    source: str = "natural"


@dataclass
class Unknown:
    depth: int
    frontier: int
    reason: str


Verdict = Union[Proved, Countermodel, Unknown]


# Rules.


def expand(g: Graph, s: Slice | int, u: int, v: int, t: Slice) -> Graph:
    """Replace ``s`` by its glue with ``t`` at (u, v) and by ``s`` plus ``u ~t v``."""
    i = s if isinstance(s, int) else g.index(s)
    if not 0 <= i < len(g):
        raise GraphError("slice index out of range")
    target = g.slices[i]
    if u not in target.nodes or v not in target.nodes:
        raise GraphError("expansion nodes must belong to the slice")
    if not is_basic(t):
        raise GraphError("expansion pattern must be a basic slice")
    plus, minus = expansion_pair(target, u, v, t)
    return g.replace(i, [plus, minus])


def expansion_pair(s: Slice, u: int, v: int, t: Slice) -> tuple[Slice, Slice]:
    return glue_slice(s, u, v, t), add_arc(s, Arc(u, Compl(SliceLit(t)), v))


def erase(g: Graph, hyps: Sequence[Slice]) -> Graph:
    return Graph(s for s in g if is_erasable(s, hyps) is None)


def candidate_expansions(
    s: Slice, extra: Sequence[Slice] = ()
) -> list[tuple[int, int, Slice]]:
    """Expansions worth trying on ``s``, cheapest patterns first.

    Patterns are the embedded slices of ``s`` and of ``extra`` (the
    hypothesis slices).  A pair is skipped when ``u ~T v`` is already an arc
    or an image of T already sits at (u, v): either way one branch of the
    expansion is a copy of ``s`` and the other is immediately closed.
    """
    pool = set(embedded_slices(s))
    for h in extra:
        pool |= embedded_slices(h)
    patterns = sorted(pool, key=lambda t: (rank(t), t.key))
    nodes = sorted(s.nodes)
    arcs = set(s.arcs)
    out = []
    for t in patterns:
        neg = Compl(SliceLit(t))
        for u in nodes:
            for v in nodes:
                if Arc(u, neg, v) in arcs:
                    continue
                if t.input == t.output and u != v:
                    pinned = None
                else:
                    pinned = find_morphism(t, s, {t.input: u, t.output: v})
                if pinned is not None:
                    continue
                out.append((u, v, t))
    return out


def compile_hypotheses(hyps: Sequence[Inclusion]) -> tuple[Slice, ...]:
    """Basic slices ``S`` with ``S <= 0`` equivalent to the hypotheses together."""
    slices: list[Slice] = []
    for h in hyps:
        for s in convert_inclusion(h)[0]:
            if s not in slices:
                slices.append(s)
    return tuple(slices)


# Search.


@dataclass
class _Node:
    slice: Slice
    kind: str
    witness: object = None
    u: int = 0
    v: int = 0
    pattern: Slice | None = None
    plus: "_Node | None" = None
    minus: "_Node | None" = None

    def expansions(self) -> int:
        if self.kind != "expand":
            return 0
        return 1 + self.plus.expansions() + self.minus.expansions()


class _Refuted(Exception):
    def __init__(self, model: Model):
        self.model = model


class _OutOfBudget(Exception):
    pass


class _Search:
    def __init__(self, goal: Inclusion, hyp_incs, hyp_slices, cfg: ProveConfig):
        self.goal = goal
        self.hyp_incs = list(hyp_incs)
        self.hyp_slices = list(hyp_slices)
        self.cfg = cfg
        self.visits = 0
        self.failed: dict[tuple, int] = {}
        self.closed: dict[tuple, _Node] = {}
        self.probed: set = set()

    def probe(self, s: Slice) -> None:
        if s.key in self.probed:
            return
        self.probed.add(s.key)
        m = natural_model(s)
        if all(holds(m, h) for h in self.hyp_incs) and not holds(m, self.goal):
            raise _Refuted(m)

    def close(self, s: Slice, depth: int) -> _Node | None:
        self.visits += 1
        if self.visits > self.cfg.step_budget:
            raise _OutOfBudget()
        key = s.key
        if key in self.closed:
            return self.closed[key]
        if self.failed.get(key, -1) >= depth:
            return None
        zw = is_zero_slice(s)
        if zw is not None:
            return self._remember(_Node(s, "zero", zw))
        if self.hyp_slices:
            ew = is_erasable(s, self.hyp_slices)
            if ew is not None:
                kind = (
                    "erase"
                    if self.cfg.hypothesis_mode is HypothesisMode.ERASE
                    else "hzero"
                )
                return self._remember(_Node(s, kind, ew))
        self.probe(s)
        if depth > 0:
            for u, v, t in candidate_expansions(s, self.hyp_slices):
                plus, minus = expansion_pair(s, u, v, t)
                plus_tree = self.close(plus, depth - 1)
                if plus_tree is None:
                    continue
                minus_tree = self.close(minus, depth - 1)
                if minus_tree is None:
                    continue
                return self._remember(
                    _Node(s, "expand", None, u, v, t, plus_tree, minus_tree)
                )
        self.failed[key] = max(depth, self.failed.get(key, -1))
        return None

    def _remember(self, node: _Node) -> _Node:
        self.closed[node.slice.key] = node
        return node


def _linearize(g0: Graph, trees: list[_Node], hyp_slices, mode: HypothesisMode):
    """Replay the proof trees as a sequence of expansion and erasure steps."""
    g = g0
    steps: list = []
    stack = list(reversed(trees))
    while stack:
        node = stack.pop()
        if node.kind in ("zero", "hzero"):
            continue
        try:
            i = g.index(node.slice)
        except GraphError:
            continue
        current = g.slices[i]
        if node.kind == "erase":
            w = is_erasable(current, hyp_slices)
            assert w is not None
            steps.append(ErasureStep(i, w.hypothesis, w.morphism))
            g = g.without(i)
            continue
        iso = canonical_iso(node.slice, current)
        u, v = iso[node.u], iso[node.v]
        plus, minus = expansion_pair(current, u, v, node.pattern)
        steps.append(ExpansionStep(i, u, v, node.pattern, plus, minus))
        g = g.replace(i, [plus, minus])
        stack.append(node.minus)
        stack.append(node.plus)
    return g, steps


def _countermodel(
    goal: Inclusion, hyps: Sequence[Inclusion], m: Model, source: str
) -> Countermodel:
    pair = falsifying_pair(m, goal)
    if pair is None or not all(holds(m, h) for h in hyps):
        raise AssertionError("countermodel failed re-validation")
    return Countermodel(m, pair, source)


def _smaller_model(goal, hyps, m: Model, cfg: ProveConfig) -> Model:
    limit = min(m.size - 1, cfg.countermodel_max_size)
    if limit < 1:
        return m
    try:
        found = find_countermodel(goal, hyps, limit, cfg.model_budget)
    except BudgetExceeded:
        return m
    return found if found is not None else m


def prove(
    goal: Inclusion, hyps: Sequence[Inclusion] = (), cfg: ProveConfig | None = None
) -> Verdict:
    cfg = cfg or ProveConfig()
    started = time.perf_counter()
    hyps = tuple(hyps)
    hyp_slices = compile_hypotheses(hyps)
    initial = initial_graph(goal)
    g0, conversion = convert_inclusion(goal)
    search = _Search(goal, hyps, hyp_slices, cfg)
    depth = 0
    open_count = len(g0)
    reason = "expansion depth exhausted"
    try:
        for depth in range(cfg.max_expansion_depth + 1):
            trees = [search.close(s, depth) for s in g0]
            open_count = sum(t is None for t in trees)
            if open_count == 0:
                final, steps = _linearize(g0, trees, hyp_slices, cfg.hypothesis_mode)
                derivation = Derivation(
                    goal,
                    hyps,
                    hyp_slices,
                    cfg.hypothesis_mode,
                    initial,
                    conversion + steps,
                    final,
                )
                stats = {
                    "expansions": sum(t.expansions() for t in trees),
                    "depth": depth,
                    "visits": search.visits,
                    "seconds": time.perf_counter() - started,
                }
                return Proved(derivation, stats)
    except _Refuted as r:
        m = _smaller_model(goal, hyps, r.model, cfg)
        return _countermodel(goal, hyps, m, "natural" if m is r.model else "search")
    except _OutOfBudget:
        reason = f"step budget of {cfg.step_budget} exhausted"
    try:
        m = find_countermodel(goal, hyps, cfg.countermodel_max_size, cfg.model_budget)
    except BudgetExceeded as exc:
        return Unknown(depth, open_count, f"{reason}; {exc}")
    if m is not None:
        return _countermodel(goal, hyps, m, "search")
    return Unknown(
        depth,
        open_count,
        f"{reason}; no countermodel up to size {cfg.countermodel_max_size}",
    )


# Independent replay.


@dataclass(frozen=True)
class Verification:
    ok: bool
    step: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _same(a, b) -> bool:
    return type(a) is type(b) and a == b


def _replay_conversion(g: Graph, step: ConversionStep) -> tuple[Graph, str]:
    """Apply a recorded conversion step; the string is empty when it checks out."""
    redex_path = step.path[:-1] if step.rule in SLICE_RULES else step.path
    try:
        here = navigate(g, redex_path)
    except NoRedex as exc:
        return g, str(exc)
    if not _same(here, step.before):
        return g, "redex does not match the recorded one"
    try:
        new, replayed = apply_at(g, step.rule, step.path)
    except NoRedex as exc:
        return g, f"{step.rule.value} does not apply: {exc}"
    if not _same(replayed.after, step.after):
        return g, "contractum differs from the recorded one"
    return new, ""


def verify_conversion(
    initial: Graph, steps: Sequence[ConversionStep], final: Graph
) -> Verification:
    """Replay a conversion sequence and check that it ends in ``final``, basic."""
    g = initial
    for idx, step in enumerate(steps):
        g, problem = _replay_conversion(g, step)
        if problem:
            return Verification(False, idx, problem)
    if g != final:
        return Verification(
            False, len(steps), "replayed graph differs from the recorded final graph"
        )
    if not is_basic(g):
        return Verification(False, len(steps), "final graph is not basic")
    return Verification(True)


def verify_derivation(d: Derivation) -> Verification:
    """Replay ``d`` with the rule implementations; report the first bad step."""
    if not _same(initial_graph(d.goal), d.initial):
        return Verification(
            False, -1, "initial graph is not the difference slice of the goal"
        )
    expected = compile_hypotheses(d.hypotheses)
    if len(expected) != len(d.hypothesis_slices) or any(
        not _same(a, b) for a, b in zip(expected, d.hypothesis_slices)
    ):
        return Verification(False, -1, "hypothesis slices do not match the hypotheses")
    hyp_slices = list(d.hypothesis_slices)
    g = d.initial
    searching = False
    for idx, step in enumerate(d.steps):
        if isinstance(step, ConversionStep):
            if searching:
                return Verification(False, idx, "conversion after expansion or erasure")
            g, problem = _replay_conversion(g, step)
            if problem:
                return Verification(False, idx, problem)
        elif isinstance(step, ExpansionStep):
            searching = True
            if not 0 <= step.slice_index < len(g):
                return Verification(False, idx, "slice index out of range")
            s = g.slices[step.slice_index]
            if step.u not in s.nodes or step.v not in s.nodes:
                return Verification(False, idx, "expansion nodes are not in the slice")
            if not is_basic(step.pattern):
                return Verification(False, idx, "expansion pattern is not basic")
            plus, minus = expansion_pair(s, step.u, step.v, step.pattern)
            if plus != step.plus or minus != step.minus:
                return Verification(
                    False, idx, "expansion result differs from the recorded one"
                )
            g = g.replace(step.slice_index, [plus, minus])
        elif isinstance(step, ErasureStep):
            searching = True
            if d.mode is not HypothesisMode.ERASE:
                return Verification(False, idx, "erasure is not allowed in h-zero mode")
            if not 0 <= step.slice_index < len(g):
                return Verification(False, idx, "slice index out of range")
            if not 0 <= step.hypothesis < len(hyp_slices):
                return Verification(False, idx, "hypothesis index out of range")
            s = g.slices[step.slice_index]
            if not check_morphism(hyp_slices[step.hypothesis], s, step.morphism):
                return Verification(
                    False, idx, "erasure morphism does not preserve arcs"
                )
            g = g.without(step.slice_index)
        else:
            return Verification(False, idx, f"unknown step {type(step).__name__}")
    n = len(d.steps)
    if g != d.final:
        return Verification(
            False, n, "replayed graph differs from the recorded final graph"
        )
    if not is_basic(g):
        return Verification(False, n, "final graph is not basic")
    for s in g:
        if is_zero_slice(s) is not None:
            continue
        if d.mode is HypothesisMode.HZERO and is_erasable(s, hyp_slices) is not None:
            continue
        return Verification(
            False, n, "final graph has a slice that is neither zero nor erasable"
        )
    return Verification(True)


def zero_witnesses(g: Graph) -> list[ZeroWitness | None]:
    return [is_zero_slice(s) for s in g]


def erasure_witnesses(g: Graph, hyps: Sequence[Slice]) -> list[ErasureWitness | None]:
    return [is_erasable(s, hyps) for s in g]
