"""gforge: a grammar-engineering workbench.

Extracts context-free grammars from documents written in configurable
EBNF dialects, repairs and refactors them through a precondition-checked
transformation operator suite, computes grammar metrics and reachability,
and replays full recovery pipelines with a metrics progression report.
"""

from pathlib import Path

from .analysis import MetricsReport, metrics, subgrammar
from .extract import ExtractionReport, extract, merge, split_fragments
from .grammar import (
    ANY,
    EPSILON,
    Choice,
    Grammar,
    Marked,
    Nonterminal,
    Opt,
    Plus,
    Production,
    Sequence,
    Star,
    Terminal,
    enumerate_language,
    equal,
    grammar_to_text,
    normalize,
    parse_expr,
    parse_grammar,
)
from .notation import NotationSpec, parse_notation, print_notation, validate_roundtrip
from .render import render_grammar
from .xbgf import TransformScript, parse_script, run_script

DATA_DIR = Path(__file__).resolve().parent / "data"

__version__ = "0.1.0"

__all__ = [
    "ANY", "EPSILON", "Choice", "DATA_DIR", "ExtractionReport", "Grammar",
    "Marked", "MetricsReport", "Nonterminal", "NotationSpec", "Opt", "Plus",
    "Production", "Sequence", "Star", "Terminal", "TransformScript",
    "enumerate_language", "equal", "extract", "grammar_to_text", "merge",
    "metrics", "normalize", "parse_expr", "parse_grammar", "parse_notation",
    "parse_script", "print_notation", "render_grammar", "run_script",
    "split_fragments", "subgrammar", "validate_roundtrip",
]
