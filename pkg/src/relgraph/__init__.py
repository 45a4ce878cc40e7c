"""Graph refutation calculus for inclusions between binary-relation terms."""

from .conversion import RuleId, to_basic, to_basic_inclusion
from .engine import (
    Countermodel,
    HypothesisMode,
    ProveConfig,
    Proved,
    Unknown,
    prove,
    verify_derivation,
)
from .graphs import Arc, Graph, Slice
from .semantics import Model, find_countermodel, holds
from .syntax import ParseError, parse_inclusion, parse_term, render_term
from .terms import Inclusion

__all__ = [
    "Arc",
    "Countermodel",
    "Graph",
    "HypothesisMode",
    "Inclusion",
    "Model",
    "ParseError",
    "ProveConfig",
    "Proved",
    "RuleId",
    "Slice",
    "Unknown",
    "find_countermodel",
    "holds",
    "parse_inclusion",
    "parse_term",
    "prove",
    "render_term",
    "to_basic",
    "to_basic_inclusion",
    "verify_derivation",
]
