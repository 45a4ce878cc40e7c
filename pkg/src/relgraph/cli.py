"""Command-line front end.

Exit status: 0 proved (or holds / valid), 1 countermodel (or fails /
invalid), 2 unknown, 3 usage, parse or format errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import serialize
from .conversion import (
    ConversionLimit,
    ConversionStep,
    convert_inclusion,
    initial_graph,
    to_basic,
)
from .dot import graph_to_dot
from .engine import (
    Countermodel,
    ExpansionStep,
    HypothesisMode,
    ProveConfig,
    Proved,
    prove,
    verify_conversion,
    verify_derivation,
    zero_witnesses,
)
from .graphs import Graph, GraphError
from .morphism import is_erasable
from .semantics import falsifying_pair
from .syntax import ParseError, format_label, format_slice, parse_inclusion, parse_term
from .terms import Inclusion

EXIT_PROVED = 0
EXIT_COUNTERMODEL = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="relgraph",
        description="Prove or refute inclusions between relation-algebra terms using slice graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prove", help="prove or refute an inclusion")
    p.add_argument("goal", help="inclusion, e.g. 'p;q <= q;p'")
    p.add_argument(
        "--hyp", metavar="PATH", help="file of hypothesis inclusions, one per line"
    )
    p.add_argument(
        "--depth",
        type=_non_negative,
        default=4,
        help="maximum expansion depth (default 4)",
    )
    p.add_argument(
        "--model-max",
        type=_positive,
        default=3,
        help="largest countermodel size tried (default 3)",
    )
    p.add_argument("--mode", choices=[m.value for m in HypothesisMode], default="erase")
    p.add_argument(
        "--trace", metavar="PATH", help="write the derivation of a proof as JSON"
    )
    p.add_argument("--format", choices=["text", "structured", "dot"], default="text")
    p.add_argument(
        "--budget",
        type=_positive,
        default=20_000,
        help="search step budget (default 20000)",
    )
    p.add_argument(
        "--explain", action="store_true", help="list derivation steps and witnesses"
    )

    c = sub.add_parser("convert", help="convert a term or inclusion to a basic graph")
    c.add_argument("text")
    c.add_argument(
        "--inclusion", action="store_true", help="treat the input as an inclusion"
    )
    c.add_argument("--format", choices=["text", "structured", "dot"], default="text")

    m = sub.add_parser("check-model", help="evaluate an inclusion in a model file")
    m.add_argument("model", metavar="MODEL")
    m.add_argument("goal", metavar="GOAL")

    r = sub.add_parser(
        "render", help="emit DOT for a term, inclusion or structured graph"
    )
    r.add_argument("text", nargs="?")
    r.add_argument(
        "--inclusion",
        action="store_true",
        help="render the difference slice of an inclusion",
    )
    r.add_argument(
        "--raw", action="store_true", help="skip conversion to a basic graph"
    )
    r.add_argument(
        "--json", metavar="PATH", help="render a structured slice or graph file"
    )

    v = sub.add_parser("verify", help="replay a trace or conversion document")
    v.add_argument("trace", metavar="TRACE", help="JSON file, or - for standard input")
    return parser


# Input helpers.


def read_hypotheses(path: str) -> list[Inclusion]:
    hyps = []
    text = Path(path).read_text()
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            hyps.append(parse_inclusion(line))
        except ParseError as exc:
            raise UsageError(f"{path}:{no}: {exc}") from None
    return hyps


def _read_json(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"
        ) from None


def _graph_text(g: Graph) -> str:
    if len(g) == 0:
        return "(empty graph)"
    return "\n".join(f"S{i + 1} = {format_slice(s)}" for i, s in enumerate(g))


# Commands.


def cmd_prove(args, out) -> int:
    goal = parse_inclusion(args.goal)
    hyps = read_hypotheses(args.hyp) if args.hyp else []
    cfg = ProveConfig(
        max_expansion_depth=args.depth,
        countermodel_max_size=args.model_max,
        hypothesis_mode=HypothesisMode(args.mode),
        step_budget=args.budget,
    )
    verdict = prove(goal, hyps, cfg)

    if isinstance(verdict, Proved) and args.trace:
        doc = serialize.derivation_to_json(verdict.derivation, stats=verdict.stats)
        Path(args.trace).write_text(serialize.dumps(doc) + "\n")

    if args.format == "structured":
        print(serialize.dumps(serialize.verdict_to_json(verdict)), file=out)
    elif args.format == "dot" and isinstance(verdict, Proved):
        out.write(graph_to_dot(verdict.derivation.final))
    elif isinstance(verdict, Proved):
        st = verdict.stats
        print(f"proved: {goal}", file=out)
        print(
            f"expansions: {st['expansions']}, depth: {st['depth']}, steps: {len(verdict.derivation.steps)}",
            file=out,
        )
        if args.explain:
            _explain(verdict, out)
    elif isinstance(verdict, Countermodel):
        norm, index = serialize.renumber_model(verdict.model)
        a, b = verdict.pair
        print(f"countermodel: {goal} fails at ({index[a]},{index[b]})", file=out)
        out.write(serialize.format_model(norm))
    else:
        print(
            f"unknown: {verdict.reason} (depth {verdict.depth}, {verdict.frontier} open slices)",
            file=out,
        )

    if isinstance(verdict, Proved):
        return EXIT_PROVED
    if isinstance(verdict, Countermodel):
        return EXIT_COUNTERMODEL
    return EXIT_UNKNOWN


def _explain(verdict: Proved, out) -> None:
    d = verdict.derivation
    for i, step in enumerate(d.steps):
        if isinstance(step, ConversionStep):
            print(f"  {i}: {step.rule.value} at {list(step.path)}", file=out)
        elif isinstance(step, ExpansionStep):
            print(
                f"  {i}: expand slice {step.slice_index} at ({step.u},{step.v}) with {format_slice(step.pattern)}",
                file=out,
            )
        else:
            print(
                f"  {i}: erase slice {step.slice_index} by hypothesis {step.hypothesis} via {step.morphism}",
                file=out,
            )
    print("final graph:", file=out)
    for i, (s, w) in enumerate(zip(d.final, zero_witnesses(d.final))):
        print(f"  S{i + 1} = {format_slice(s)}", file=out)
        if w is not None:
            print(
                f"    zero by {w.arc.source} {format_label(w.arc.label)} {w.arc.target} via {w.morphism}",
                file=out,
            )
        else:
            e = is_erasable(s, d.hypothesis_slices)
            if e is not None:
                print(
                    f"    erasable by hypothesis {e.hypothesis} via {e.morphism}",
                    file=out,
                )


def cmd_convert(args, out) -> int:
    if args.inclusion:
        source = parse_inclusion(args.text)
        g, steps = convert_inclusion(source)
    else:
        source = parse_term(args.text)
        g, steps = to_basic(source)
    if args.format == "structured":
        doc = serialize.conversion_to_json(source, initial_graph(source), steps, g)
        print(serialize.dumps(doc), file=out)
    elif args.format == "dot":
        out.write(graph_to_dot(g))
    else:
        print(_graph_text(g), file=out)
        print(f"steps: {len(steps)}", file=out)
    return 0


def cmd_check_model(args, out) -> int:
    model = serialize.parse_model(Path(args.model).read_text())
    goal = parse_inclusion(args.goal)
    pair = falsifying_pair(model, goal)
    if pair is None:
        print(f"holds: {goal}", file=out)
        return 0
    print(f"fails: {goal} at ({pair[0]},{pair[1]})", file=out)
    return 1


def cmd_render(args, out) -> int:
    if args.json:
        if args.text:
            raise UsageError("give either a term or --json, not both")
        doc = _read_json(args.json)
        g = (
            serialize.graph_from_json(doc)
            if "slices" in doc
            else Graph([serialize.slice_from_json(doc)])
        )
    else:
        if not args.text:
            raise UsageError("render needs a term, an inclusion or --json PATH")
        source = parse_inclusion(args.text) if args.inclusion else parse_term(args.text)
        g = (
            initial_graph(source)
            if args.raw
            else convert_inclusion(source)[0]
            if args.inclusion
            else to_basic(source)[0]
        )
    out.write(graph_to_dot(g))
    return 0


def cmd_verify(args, out) -> int:
    doc = _read_json(args.trace)
    if isinstance(doc, dict) and "trace" in doc and "format" not in doc:
        doc = doc["trace"]
    kind = doc.get("format") if isinstance(doc, dict) else None
    if kind == serialize.TRACE_FORMAT:
        result = verify_derivation(serialize.derivation_from_json(doc))
    elif kind == serialize.CONVERSION_FORMAT:
        source, initial, steps, final = serialize.conversion_from_json(doc)
        if initial != initial_graph(source):
            print(
                "invalid at step -1: initial graph does not match the source", file=out
            )
            return 1
        result = verify_conversion(initial, steps, final)
    else:
        raise UsageError(f"{args.trace}: not a trace or conversion document")
    if result:
        print("valid", file=out)
        return 0
    print(f"invalid at step {result.step}: {result.reason}", file=out)
    return 1


_COMMANDS = {
    "prove": cmd_prove,
    "convert": cmd_convert,
    "check-model": cmd_check_model,
    "render": cmd_render,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except (
        ParseError,
        UsageError,
        serialize.FormatError,
        GraphError,
        ConversionLimit,
        OSError,
    ) as exc:
        print(f"relgraph: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
