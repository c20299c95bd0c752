"""Command-line front end.

Subcommands: extract, transform, analyze, pretty, pipeline,
expand-charclass. Data goes to standard output or, with ``--out``, to
files; diagnostics go to the error stream. Exit codes are fixed for
scriptability: 0 success, 2 syntax/unprintable input, 3 configuration
error (missing or malformed dialect/config/source files), 4 failing
transformation step.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import format_names, format_rows, metrics
from .extract import ExtractError, FatalSyntax, extract_document, format_defects
from .grammar import GrammarError, grammar_to_text, parse_grammar
from .notation import NotationError, parse_notation
from .pipeline import (
    ConfigError,
    ReversedRange,
    expand_charclass,
    format_steplog,
    load_pipeline_config,
    load_rewrites,
    run_pipeline,
)
from .render import Unprintable, render_grammar
from .xbgf import ScriptParse, StepError, parse_script, run_script

EXIT_OK = 0
EXIT_SYNTAX = 2
EXIT_CONFIG = 3
EXIT_STEP = 4


def _fail(code: int, message: str) -> int:
    print(f"gforge: {message}", file=sys.stderr)
    return code


def _read(path: Path, code: int) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _CliError(code, str(exc)) from exc


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_dialect(path: Path):
    try:
        return parse_notation(_read(path, EXIT_CONFIG))
    except NotationError as exc:
        raise _CliError(EXIT_CONFIG, f"{path}: {exc}") from exc


def _load_grammar(path: Path):
    try:
        return parse_grammar(_read(path, EXIT_SYNTAX))
    except GrammarError as exc:
        raise _CliError(EXIT_SYNTAX, f"{path}: {exc}") from exc


def cmd_extract(args) -> int:
    spec = _load_dialect(args.dialect)
    rewrites = ()
    if args.rewrites:
        try:
            rewrites = load_rewrites(args.rewrites)
        except (OSError, ConfigError) as exc:
            raise _CliError(EXIT_CONFIG, str(exc)) from exc
    text = _read(args.source, EXIT_CONFIG)
    try:
        report = extract_document(
            text, spec, rewrites=rewrites,
            tolerate_defining_variants=args.tolerate_defining_variants)
    except FatalSyntax as exc:
        raise _CliError(EXIT_SYNTAX, f"{args.source}: {exc}") from exc
    except ExtractError as exc:
        raise _CliError(EXIT_SYNTAX, f"{args.source}: {exc}") from exc
    grammar_text = grammar_to_text(report.grammar)
    defects_text = format_defects(report.defects)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        stem = args.source.stem
        (args.out / f"{stem}.pp").write_text(grammar_text, encoding="utf-8")
        (args.out / f"{stem}.defects").write_text(defects_text, encoding="utf-8")
    else:
        sys.stdout.write(grammar_text)
        sys.stderr.write(defects_text)
    return EXIT_OK


def cmd_transform(args) -> int:
    g = _load_grammar(args.grammar)
    try:
        script = parse_script(_read(args.script, EXIT_CONFIG))
    except ScriptParse as exc:
        raise _CliError(EXIT_SYNTAX, f"{args.script}: {exc}") from exc
    try:
        result, log = run_script(script, g)
    except StepError as exc:
        sys.stderr.write(format_steplog(exc.log))
        raise _CliError(EXIT_STEP, f"{args.script}: {exc}") from exc
    grammar_text = grammar_to_text(result)
    log_text = format_steplog(log)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        stem = args.grammar.stem
        (args.out / f"{stem}.pp").write_text(grammar_text, encoding="utf-8")
        (args.out / f"{stem}.steplog").write_text(log_text, encoding="utf-8")
    else:
        sys.stdout.write(grammar_text)
        sys.stderr.write(log_text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    g = _load_grammar(args.grammar)
    report = metrics(g)
    sys.stdout.write(format_rows([(args.grammar.name, report)]))
    if args.verbose:
        sys.stdout.write(format_names(report))
    return EXIT_OK


def cmd_pretty(args) -> int:
    spec = _load_dialect(args.dialect)
    g = _load_grammar(args.grammar)
    try:
        sys.stdout.write(render_grammar(g, spec))
    except Unprintable as exc:
        raise _CliError(EXIT_SYNTAX, f"unprintable in this dialect: {exc}") from exc
    return EXIT_OK


def cmd_pipeline(args) -> int:
    try:
        config = load_pipeline_config(args.config)
    except ConfigError as exc:
        raise _CliError(EXIT_CONFIG, str(exc)) from exc
    try:
        result = run_pipeline(config, out_dir=args.out, plot=not args.no_plot)
    except StepError as exc:
        raise _CliError(EXIT_STEP, str(exc)) from exc
    except FatalSyntax as exc:
        raise _CliError(EXIT_SYNTAX, str(exc)) from exc
    except (ConfigError, NotationError, ExtractError, GrammarError,
            ScriptParse) as exc:
        raise _CliError(EXIT_CONFIG, str(exc)) from exc
    sys.stdout.write(format_rows(result.rows))
    return EXIT_OK


def cmd_expand_charclass(args) -> int:
    try:
        sys.stdout.write(expand_charclass(args.ranges) + "\n")
    except ReversedRange as exc:
        raise _CliError(EXIT_SYNTAX, f"reversed range: {exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gforge",
        description="Grammar workbench: extract grammars from EBNF-dialect "
                    "documents, transform them with precondition-checked "
                    "operator scripts, analyze them, and replay recovery "
                    "pipelines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract a grammar from a document")
    p.add_argument("source", type=Path)
    p.add_argument("--dialect", type=Path, required=True)
    p.add_argument("--rewrites", type=Path)
    p.add_argument("--tolerate-defining-variants", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("transform", help="apply a transformation script")
    p.add_argument("grammar", type=Path)
    p.add_argument("--script", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("analyze", help="print grammar metrics")
    p.add_argument("grammar", type=Path)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pretty", help="print a grammar in a target dialect")
    p.add_argument("grammar", type=Path)
    p.add_argument("--dialect", type=Path, required=True)
    p.set_defaults(func=cmd_pretty)

    p = sub.add_parser("pipeline", help="run a full recovery pipeline")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("expand-charclass",
                       help="expand character ranges to a terminal choice")
    p.add_argument("ranges")
    p.set_defaults(func=cmd_expand_charclass)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        return _fail(exc.code, str(exc))


if __name__ == "__main__":
    sys.exit(main())
