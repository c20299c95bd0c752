"""Grammar metrics, top/bottom nonterminal detection, subgrammar extraction.

TERM counts distinct terminal texts (exact, case-sensitive). VAR counts
distinct nonterminal names whether defined or merely used, so names minted
by defect recovery and import points all count; occurrences inside marked
regions count as uses. PROD counts top alternatives: a production whose
right-hand side is a choice of k alternatives contributes k. A top is
defined but never used; a bottom is used but never defined.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import (
    Choice,
    Grammar,
    GrammarError,
    Nonterminal,
    Production,
    Terminal,
    walk,
)


class RootUndefined(GrammarError):
    """The requested subgrammar root has no production."""


@dataclass(frozen=True)
class MetricsReport:
    term: int
    var: int
    prod: int
    bottoms: tuple[str, ...]
    tops: tuple[str, ...]

    def row(self) -> tuple[int, int, int, int, int]:
        return (self.term, self.var, self.prod, len(self.bottoms), len(self.tops))


def metrics(g: Grammar) -> MetricsReport:
    defined = set()
    used = set()
    terms = set()
    prod = 0
    for p in g.productions:
        defined.add(p.lhs)
        prod += len(p.rhs.alternatives) if isinstance(p.rhs, Choice) else 1
        for node in walk(p.rhs):
            if isinstance(node, Nonterminal):
                used.add(node.name)
            elif isinstance(node, Terminal):
                terms.add(node.text)
    return MetricsReport(
        term=len(terms),
        var=len(defined | used),
        prod=prod,
        bottoms=tuple(sorted(used - defined)),
        tops=tuple(sorted(defined - used)),
    )


def subgrammar(g: Grammar, root: str) -> Grammar:
    """Productions of all nonterminals reachable from ``root``, original
    order preserved; the result's start set is {root}."""
    by_name: dict[str, list[Production]] = {}
    for p in g.productions:
        by_name.setdefault(p.lhs, []).append(p)
    if root not in by_name:
        raise RootUndefined(root)
    reachable = {root}
    queue = [root]
    while queue:
        name = queue.pop()
        for p in by_name.get(name, ()):
            for node in walk(p.rhs):
                if isinstance(node, Nonterminal) and node.name not in reachable:
                    reachable.add(node.name)
                    queue.append(node.name)
    prods = tuple(p for p in g.productions if p.lhs in reachable)
    return Grammar(prods, frozenset({root}))


METRICS_HEADER = ("TERM", "VAR", "PROD", "Bottom", "Top")


def format_rows(rows: list[tuple[str, MetricsReport]]) -> str:
    """Aligned plain-text table, one row per labeled grammar or stage."""
    label_width = max([len(label) for label, _ in rows] + [5])
    widths = [max(len(h), 6) for h in METRICS_HEADER]
    lines = [
        " ".join(["stage".ljust(label_width)] +
                 [h.rjust(w) for h, w in zip(METRICS_HEADER, widths)])
    ]
    for label, report in rows:
        cells = [str(v).rjust(w) for v, w in zip(report.row(), widths)]
        lines.append(" ".join([label.ljust(label_width)] + cells))
    return "\n".join(lines) + "\n"


def format_names(report: MetricsReport) -> str:
    lines = []
    lines.append("bottom nonterminals (%d): %s" %
                 (len(report.bottoms), ", ".join(report.bottoms) or "-"))
    lines.append("top nonterminals (%d): %s" %
                 (len(report.tops), ", ".join(report.tops) or "-"))
    return "\n".join(lines) + "\n"
