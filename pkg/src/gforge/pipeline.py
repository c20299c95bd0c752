"""Recovery-pipeline orchestration.

A pipeline manifest lists sources (each with its dialect and an optional
literal-rewrite table), transformation scripts in application order, an
optional final subgrammar root, and an output directory. Running it
extracts and merges all sources, applies the scripts in order, optionally
takes the subgrammar, and emits a metrics progression: one row after
extraction and after each stage, as an aligned table, a TSV, and a chart.

Manifest format (UTF-8, ``#`` comments, shell-style quoting for paths):

    source <path> dialect <path> [rewrites <path>]
    script <path>
    root <name>
    out <dir>
    flag tolerate-defining-variants

Paths are resolved relative to the manifest file. Rewrite tables are
tab-separated ``old<TAB>new`` lines applied to source text before
tokenization (the route for turning lookahead notations into EPSILON).
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import MetricsReport, format_rows, metrics, subgrammar
from .extract import extract_document, format_defects, merge
from .grammar import Grammar, GrammarError, grammar_to_text
from .notation import parse_notation
from .xbgf import StepError, StepRecord, parse_script, run_script


class ConfigError(Exception):
    """Bad pipeline manifest or missing referenced file."""


class ReversedRange(Exception):
    """A character range with its bounds out of order."""


@dataclass(frozen=True)
class SourceEntry:
    path: Path
    dialect: Path
    rewrites: Path | None = None


@dataclass
class PipelineConfig:
    sources: list[SourceEntry] = field(default_factory=list)
    scripts: list[Path] = field(default_factory=list)
    root: str | None = None
    out: Path | None = None
    tolerate_defining_variants: bool = False


def parse_pipeline_config(text: str, base: Path) -> PipelineConfig:
    config = PipelineConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words = shlex.split(line)
        kind = words[0]
        if kind == "source":
            rest = words[1:]
            if len(rest) not in (3, 5) or rest[1] != "dialect" or \
                    (len(rest) == 5 and rest[3] != "rewrites"):
                raise ConfigError(
                    f"line {lineno}: expected "
                    "'source <path> dialect <path> [rewrites <path>]'")
            config.sources.append(SourceEntry(
                path=base / rest[0],
                dialect=base / rest[2],
                rewrites=(base / rest[4]) if len(rest) == 5 else None,
            ))
        elif kind == "script":
            if len(words) != 2:
                raise ConfigError(f"line {lineno}: expected 'script <path>'")
            config.scripts.append(base / words[1])
        elif kind == "root":
            if len(words) != 2:
                raise ConfigError(f"line {lineno}: expected 'root <name>'")
            config.root = words[1]
        elif kind == "out":
            if len(words) != 2:
                raise ConfigError(f"line {lineno}: expected 'out <dir>'")
            config.out = base / words[1]
        elif kind == "flag":
            if words[1:] != ["tolerate-defining-variants"]:
                raise ConfigError(f"line {lineno}: unknown flag {words[1:]}")
            config.tolerate_defining_variants = True
        else:
            raise ConfigError(f"line {lineno}: unknown directive {kind!r}")
    if not config.sources:
        raise ConfigError("manifest lists no sources")
    return config


def load_pipeline_config(path: Path) -> PipelineConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    config = parse_pipeline_config(text, path.parent)
    for entry in config.sources:
        for p in (entry.path, entry.dialect, entry.rewrites):
            if p is not None and not p.is_file():
                raise ConfigError(f"missing file: {p}")
    for p in config.scripts:
        if not p.is_file():
            raise ConfigError(f"missing file: {p}")
    return config


def load_rewrites(path: Path) -> tuple[tuple[str, str], ...]:
    pairs = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        if "\t" not in raw:
            raise ConfigError(f"{path}:{lineno}: expected 'old<TAB>new'")
        old, new = raw.split("\t", 1)
        pairs.append((old, new))
    return tuple(pairs)


@dataclass
class PipelineResult:
    rows: list[tuple[str, MetricsReport]]
    grammar: Grammar
    out_dir: Path


def format_steplog(log: list[StepRecord]) -> str:
    lines = []
    for rec in log:
        b, a = rec.before, rec.after
        stmt = " ".join(rec.text.split())
        lines.append(
            f"{rec.index:3d} {rec.op:<12} TERM {b[0]}->{a[0]} VAR {b[1]}->{a[1]} "
            f"PROD {b[2]}->{a[2]} | {stmt}")
    return "\n".join(lines) + ("\n" if lines else "")


def _rows_tsv(rows: list[tuple[str, MetricsReport]]) -> str:
    out = ["stage\tTERM\tVAR\tPROD\tBottom\tTop"]
    for label, report in rows:
        out.append(label + "\t" + "\t".join(str(v) for v in report.row()))
    return "\n".join(out) + "\n"


def plot_progression(rows: list[tuple[str, MetricsReport]], path: Path) -> None:
    """Render the metric progression chart next to the delimited report."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [label for label, _ in rows]
    series = list(zip(*[report.row() for _, report in rows]))
    x = range(len(labels))

    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(10, 7))
    for name, values in zip(("TERM", "VAR", "PROD"), series[:3]):
        top.plot(x, values, marker="o", markersize=3, label=name)
    top.set_ylabel("count")
    top.legend(loc="center left", fontsize=8)
    top.grid(True, alpha=0.3)
    for name, values in zip(("Bottom", "Top"), series[3:]):
        bottom.plot(x, values, marker="o", markersize=3, label=name)
    bottom.set_ylabel("nonterminals")
    bottom.legend(loc="upper right", fontsize=8)
    bottom.grid(True, alpha=0.3)
    bottom.set_xticks(list(x))
    bottom.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "gforge"})
    plt.close(fig)


def run_pipeline(config: PipelineConfig, out_dir: Path | None = None,
                 plot: bool = True) -> PipelineResult:
    """Execute the pipeline, writing stage grammars, logs, the progression
    report (text, TSV, PNG), and a MANIFEST. On failure, partial outputs
    are retained and the MANIFEST names the failing stage."""
    out = out_dir or config.out
    if out is None:
        raise ConfigError("no output directory (config 'out' or --out)")
    out.mkdir(parents=True, exist_ok=True)
    (out / "extracted").mkdir(exist_ok=True)
    (out / "stages").mkdir(exist_ok=True)
    manifest: list[str] = []

    def finish_manifest():
        (out / "MANIFEST").write_text("".join(m + "\n" for m in manifest),
                                      encoding="utf-8")

    def fail(stage: str, exc: Exception):
        manifest.append(f"failed {stage}: {exc}")
        finish_manifest()

    rows: list[tuple[str, MetricsReport]] = []
    grammars = []
    for entry in config.sources:
        stage = f"extract {entry.path.name}"
        try:
            spec = parse_notation(entry.dialect.read_text(encoding="utf-8"))
            rewrites = load_rewrites(entry.rewrites) if entry.rewrites else ()
            report = extract_document(
                entry.path.read_text(encoding="utf-8"), spec,
                tolerate_defining_variants=config.tolerate_defining_variants,
                rewrites=rewrites)
        except Exception as exc:
            fail(stage, exc)
            raise
        stem = entry.path.stem
        (out / "extracted" / f"{stem}.pp").write_text(
            grammar_to_text(report.grammar), encoding="utf-8")
        (out / "extracted" / f"{stem}.defects").write_text(
            format_defects(report.defects), encoding="utf-8")
        grammars.append(report.grammar)
        manifest.append(f"ok {stage} ({len(report.defects)} defects)")

    current = merge(grammars)

    def emit_stage(index: int, label: str, g: Grammar):
        name = f"{index:02d}-{label.replace(' ', '-')}.pp"
        (out / "stages" / name).write_text(grammar_to_text(g), encoding="utf-8")
        rows.append((f"after {label}", metrics(g)))
        manifest.append(f"ok {label} stages/{name}")

    emit_stage(0, "extraction", current)

    for index, script_path in enumerate(config.scripts, start=1):
        stage = script_path.stem
        try:
            script = parse_script(script_path.read_text(encoding="utf-8"))
            current, log = run_script(script, current)
        except StepError as exc:
            (out / "stages" / f"{index:02d}-{stage}.steplog").write_text(
                format_steplog(exc.log), encoding="utf-8")
            fail(f"script {stage} (step {exc.index})", exc)
            raise
        except Exception as exc:
            fail(f"script {stage}", exc)
            raise
        (out / "stages" / f"{index:02d}-{stage}.steplog").write_text(
            format_steplog(log), encoding="utf-8")
        emit_stage(index, stage, current)

    if config.root:
        try:
            current = subgrammar(current, config.root)
        except GrammarError as exc:
            fail("subgrammar", exc)
            raise
        emit_stage(len(config.scripts) + 1, "subgrammar", current)

    (out / "final.pp").write_text(grammar_to_text(current), encoding="utf-8")
    (out / "progression.txt").write_text(format_rows(rows), encoding="utf-8")
    (out / "progression.tsv").write_text(_rows_tsv(rows), encoding="utf-8")
    if plot:
        plot_progression(rows, out / "progression.png")
        manifest.append("ok progression progression.png")
    finish_manifest()
    return PipelineResult(rows, current, out)


# ---------------------------------------------------------------------------
# Character-class expansion
# ---------------------------------------------------------------------------

def expand_charclass(spec: str) -> str:
    """Expand ranges like ``A-Za-z0-9`` (or literal character lists) into a
    pp-notation choice of one-character terminals in ascending code order."""
    from .grammar import escape_terminal

    chars: set[str] = set()
    i = 0
    while i < len(spec):
        if i + 2 < len(spec) and spec[i + 1] == "-":
            lo, hi = spec[i], spec[i + 2]
            if ord(lo) > ord(hi):
                raise ReversedRange(f"{lo}-{hi}")
            chars.update(chr(c) for c in range(ord(lo), ord(hi) + 1))
            i += 3
        else:
            chars.add(spec[i])
            i += 1
    return " | ".join(escape_terminal(c) for c in sorted(chars))
