"""Pretty-print grammars in a target dialect.

The renderer emits a grammar in the notation described by a dialect
definition, lowering constructs the dialect lacks: one-or-more repetition
becomes ``x {x}`` (or the postfix form), optionality becomes a grouped
``(x | "")`` when there are no option brackets. Constructs with no lowering
(a marked region, the any-character wildcard without special-symbol
delimiters) raise :class:`Unprintable`.
"""

from __future__ import annotations

from .extract import WORD_CHARS
from .grammar import (
    AnyChar,
    Choice,
    Epsilon,
    Expr,
    Grammar,
    GrammarError,
    Marked,
    Nonterminal,
    Opt,
    Plus,
    Sequence,
    Star,
    Terminal,
    normalize,
)
from .notation import NotationSpec


class Unprintable(GrammarError):
    """The dialect cannot express a construct and no lowering exists."""


_ALT, _SEQ, _ATOM = 0, 1, 2


class _Renderer:
    def __init__(self, spec: NotationSpec):
        self.spec = spec

    def _group(self, text: str) -> str:
        if not self.spec.has("start-group", "end-group"):
            raise Unprintable("dialect has no grouping brackets")
        return self.spec.get("start-group") + text + self.spec.get("end-group")

    def _at_level(self, e: Expr, level: int) -> str:
        natural, text = self.render(e)
        if natural < level:
            return self._group(text)
        return text

    def _terminal(self, text: str) -> str:
        start, end = self.spec.get("start-terminal"), self.spec.get("end-terminal")
        if not start or not end:
            raise Unprintable("dialect has no terminal delimiters")
        if end in text:
            raise Unprintable(
                f"terminal {text!r} contains the closing delimiter and the "
                "dialect has no escapes")
        return start + text + end

    def render(self, e: Expr) -> tuple[int, str]:
        """Return (natural precedence level, text)."""
        spec = self.spec
        if isinstance(e, Epsilon):
            return _ATOM, self._terminal("")
        if isinstance(e, AnyChar):
            if spec.has("start-special", "end-special"):
                return _ATOM, f"{spec.get('start-special')} ANY {spec.get('end-special')}"
            raise Unprintable("dialect has no special-symbol delimiters for ANY")
        if isinstance(e, Marked):
            raise Unprintable("marked regions have no dialect notation")
        if isinstance(e, Terminal):
            return _ATOM, self._terminal(e.text)
        if isinstance(e, Nonterminal):
            if spec.has("start-nonterminal", "end-nonterminal"):
                return _ATOM, (spec.get("start-nonterminal") + e.name
                               + spec.get("end-nonterminal"))
            if not set(e.name) <= WORD_CHARS:
                raise Unprintable(
                    f"nonterminal {e.name!r} needs delimiters the dialect lacks")
            return _ATOM, e.name
        if isinstance(e, Sequence):
            joiner = " "
            if spec.has("concatenate"):
                joiner = spec.get("concatenate") + " "
            return _SEQ, joiner.join(self._at_level(p, _SEQ) for p in e.parts)
        if isinstance(e, Choice):
            sep = spec.get("definition-separator")
            if not sep:
                raise Unprintable("dialect has no definition separator")
            return _ALT, f" {sep} ".join(
                self._at_level(a, _SEQ) for a in e.alternatives)
        if isinstance(e, Opt):
            if spec.has("start-option", "end-option"):
                inner = self.render(e.inner)[1]
                return _ATOM, spec.get("start-option") + inner + spec.get("end-option")
            if spec.has("postfix-option"):
                return _ATOM, self._at_level(e.inner, _ATOM) + spec.get("postfix-option")
            lowered = normalize(Choice((e.inner, Epsilon())))
            return _ATOM, self._group(self.render(lowered)[1])
        if isinstance(e, Star):
            if spec.has("start-star", "end-star"):
                inner = self.render(e.inner)[1]
                return _ATOM, spec.get("start-star") + inner + spec.get("end-star")
            if spec.has("postfix-star"):
                return _ATOM, self._at_level(e.inner, _ATOM) + spec.get("postfix-star")
            raise Unprintable("dialect cannot express zero-or-more repetition")
        if isinstance(e, Plus):
            if spec.has("start-plus", "end-plus"):
                inner = self.render(e.inner)[1]
                return _ATOM, spec.get("start-plus") + inner + spec.get("end-plus")
            if spec.has("postfix-plus"):
                return _ATOM, self._at_level(e.inner, _ATOM) + spec.get("postfix-plus")
            lowered = Sequence((e.inner, Star(e.inner)))
            return self.render(normalize(lowered))
        raise TypeError(f"not an expression: {e!r}")


def can_render_faithfully(g: Grammar, spec: NotationSpec) -> bool:
    """True when rendering needs no lowering and re-extraction recovers the
    same tree: every construct used has a 1:1 notation in the dialect and
    every name survives the dialect's tokenization."""
    from .grammar import walk

    def name_ok(name: str) -> bool:
        if not set(name) <= WORD_CHARS:
            return False
        if not spec.has("start-nonterminal", "end-nonterminal"):
            if name in ("EPSILON", "ANY") or name.isdigit():
                return False
        return True

    end_term = spec.get("end-terminal")
    for p in g.productions:
        if not name_ok(p.lhs):
            return False
        for node in walk(normalize(p.rhs)):
            if isinstance(node, Marked):
                return False
            if isinstance(node, AnyChar) and not spec.has("start-special", "end-special"):
                return False
            if isinstance(node, Nonterminal) and not name_ok(node.name):
                return False
            if isinstance(node, (Terminal, Epsilon)):
                if not spec.has("start-terminal", "end-terminal"):
                    return False
                if isinstance(node, Terminal) and end_term in node.text:
                    return False
            if isinstance(node, Opt) and not (
                    spec.has("start-option", "end-option") or spec.has("postfix-option")):
                return False
            if isinstance(node, Star) and not (
                    spec.has("start-star", "end-star") or spec.has("postfix-star")):
                return False
            if isinstance(node, Plus) and not (
                    spec.has("start-plus", "end-plus") or spec.has("postfix-plus")):
                return False
    return True


def render_grammar(g: Grammar, spec: NotationSpec) -> str:
    """Emit ``g`` in the dialect's notation, one production per line."""
    renderer = _Renderer(spec)
    lines = []
    for p in g.productions:
        lhs = renderer.render(Nonterminal(p.lhs))[1]
        body = renderer.render(normalize(p.rhs))[1]
        terminator = spec.get("terminator") or ""
        lines.append(f"{lhs} {spec.get('defining')} {body}{terminator}")
    return "\n".join(lines) + "\n"
