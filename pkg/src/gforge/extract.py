"""Tolerant grammar extraction from documents written in a configurable
EBNF dialect.

The extractor tokenizes fragment text against a dialect definition
(longest-match over the metasymbol literals, then maximal runs of word
characters), recovers from the catalogue of defects found in real grammar
documents, and emits a normalized grammar plus a defect report. Every
recovery names the 1-based line/column of its trigger and states what was
done; extraction fails outright only when not a single production can be
recovered.

Recovery heuristics, each individually testable:

* unbalanced nonterminal brackets: the name ends at the first
  alphanumeric/non-alphanumeric border after the opening bracket;
* stray punctuation where an atom is expected becomes a terminal (the
  quotes are assumed forgotten); a stray ``?`` becomes the terminal ``??``;
* bare identifier words are nonterminals, bare numbers terminals;
* excessive brackets dissolve during normalization, with a defect logged
  when a group wraps a single atom;
* a leading definition separator after the defining symbol (bulleted-list
  style) is consumed and logged;
* a wrong defining symbol ``=`` is accepted, when tolerated by the run;
* with a newline-terminated dialect a production ends at the next line
  whose first tokens re-parse as ``name defining-symbol``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .grammar import (
    ANY,
    EPSILON,
    Choice,
    Expr,
    Grammar,
    GrammarError,
    Nonterminal,
    Opt,
    Plus,
    Production,
    Sequence,
    Star,
    Terminal,
    normalize,
)
from .notation import NotationSpec

DEFECT_KINDS = (
    "unbalanced-nonterminal",
    "stray-token-as-terminal",
    "ambiguous-repetition",
    "excessive-brackets",
    "wrong-defining-symbol",
    "missing-terminator",
    "leading-bar",
)

WORD_CHARS = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


class ExtractError(GrammarError):
    pass


class FatalSyntax(ExtractError):
    """No production could be recovered from the fragment."""


class UnterminatedFragment(ExtractError):
    """A start-grammar delimiter without a matching end delimiter."""


@dataclass(frozen=True)
class Defect:
    kind: str
    line: int
    col: int
    message: str
    resolution: str

    def format(self) -> str:
        return f"{self.line}:{self.col} {self.kind} {self.message} | {self.resolution}"


@dataclass
class ExtractionReport:
    grammar: Grammar
    defects: list[Defect] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Fragment splitting
# ---------------------------------------------------------------------------

def _tolerant_pattern(literal: str) -> re.Pattern:
    """Regex for a grammar delimiter, tolerant to quoting of attribute
    values: ``lang=bnf`` and ``lang="bnf"`` match either way."""
    out = []
    i = 0
    while i < len(literal):
        m = re.match(r'="?(\w+)"?', literal[i:])
        if m:
            out.append(f'=(?:"{re.escape(m.group(1))}"|{re.escape(m.group(1))})')
            i += m.end()
        else:
            out.append(re.escape(literal[i]))
            i += 1
    return re.compile("".join(out))


def split_fragments(document: str, spec: NotationSpec) -> list[str]:
    """Texts strictly between matched grammar delimiters, in order."""
    return [text for text, _ in split_fragments_located(document, spec)]


def split_fragments_located(document: str, spec: NotationSpec) -> list[tuple[str, int]]:
    """Like :func:`split_fragments` but pairs each fragment with the 0-based
    line offset of its first line in the document."""
    start_lit = spec.get("start-grammar")
    end_lit = spec.get("end-grammar")
    if not start_lit or not end_lit:
        raise ExtractError("dialect has no grammar delimiters")
    start_re = _tolerant_pattern(start_lit)
    end_re = _tolerant_pattern(end_lit)
    fragments = []
    pos = 0
    while True:
        m = start_re.search(document, pos)
        if not m:
            break
        m_end = end_re.search(document, m.end())
        if not m_end:
            line = document.count("\n", 0, m.start()) + 1
            raise UnterminatedFragment(
                f"start delimiter at line {line} has no end delimiter")
        raw = document[m.end():m_end.start()]
        leading = raw[:len(raw) - len(raw.lstrip("\n"))]
        offset = document.count("\n", 0, m.end()) + leading.count("\n")
        fragments.append((raw.strip(), offset))
        pos = m_end.end()
    return fragments


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str          # meta | word | terminal | stray | newline
    value: str
    roles: tuple[str, ...]
    line: int
    col: int


def _tokenize(text: str, spec: NotationSpec, line_offset: int,
              defects: list[Defect]) -> list[_Tok]:
    # Grammar delimiters are consumed by fragment splitting; everything else
    # participates in longest-match.
    by_literal: dict[str, list[str]] = {}
    for role, lit in spec.metasymbols.items():
        if role in ("start-grammar", "end-grammar"):
            continue
        by_literal.setdefault(lit, []).append(role)
    literals = sorted(by_literal, key=len, reverse=True)
    start_term = spec.get("start-terminal")
    end_term = spec.get("end-terminal")
    start_comment = spec.get("start-comment")
    end_comment = spec.get("end-comment")

    toks: list[_Tok] = []
    i = 0
    line = 1 + line_offset
    col = 1

    def advance(n: int):
        nonlocal i, line, col
        for _ in range(n):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < len(text):
        c = text[i]
        if c == "\n":
            toks.append(_Tok("newline", "\n", (), line, col))
            advance(1)
            continue
        if c in " \t\r":
            advance(1)
            continue
        if start_comment and text.startswith(start_comment, i):
            at_line, at_col = line, col
            advance(len(start_comment))
            end_at = text.find(end_comment, i) if end_comment else -1
            if end_at < 0:
                defects.append(Defect(
                    "missing-terminator", at_line, at_col,
                    "comment is never closed", "comment runs to end of fragment"))
                advance(len(text) - i)
            else:
                advance(end_at - i + len(end_comment))
            continue
        if start_term and text.startswith(start_term, i):
            at_line, at_col = line, col
            advance(len(start_term))
            end_at = text.find(end_term, i)
            if end_at < 0:
                defects.append(Defect(
                    "missing-terminator", at_line, at_col,
                    "terminal is never closed", "terminal runs to end of line"))
                end_at = text.find("\n", i)
                end_at = len(text) if end_at < 0 else end_at
                value = text[i:end_at]
                advance(end_at - i)
            else:
                value = text[i:end_at]
                advance(end_at - i + len(end_term))
            toks.append(_Tok("terminal", value, (), at_line, at_col))
            continue
        matched = None
        for lit in literals:
            if text.startswith(lit, i):
                # word-like literals must end at a word boundary
                if lit[-1] in WORD_CHARS and i + len(lit) < len(text) \
                        and text[i + len(lit)] in WORD_CHARS:
                    continue
                matched = lit
                break
        if matched:
            toks.append(_Tok("meta", matched, tuple(by_literal[matched]), line, col))
            advance(len(matched))
            continue
        if c in WORD_CHARS:
            j = i
            while j < len(text) and text[j] in WORD_CHARS:
                j += 1
            toks.append(_Tok("word", text[i:j], (), line, col))
            advance(j - i)
            continue
        toks.append(_Tok("stray", c, (), line, col))
        advance(1)
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, toks: list[_Tok], spec: NotationSpec,
                 defects: list[Defect], tolerate_defining: bool):
        self.toks = toks
        self.spec = spec
        self.defects = defects
        self.tolerate_defining = tolerate_defining
        self.pos = 0
        self.halted = False      # production boundary reached inside brackets

    # -- token helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> _Tok | None:
        k = self.pos + offset
        return self.toks[k] if k < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def defect(self, kind: str, tok: _Tok, message: str, resolution: str):
        self.defects.append(Defect(kind, tok.line, tok.col, message, resolution))

    def _is_meta(self, tok: _Tok | None, role: str) -> bool:
        return tok is not None and tok.kind == "meta" and role in tok.roles

    # -- production head --------------------------------------------------

    def _head_at(self, k: int) -> tuple[str, int, bool] | None:
        """If a production head starts at token index k, return
        (lhs, next-index, used-wrong-defining)."""
        toks = self.toks

        def tok_at(j):
            return toks[j] if j < len(toks) else None

        t0 = tok_at(k)
        if t0 is None:
            return None
        if self._is_meta(t0, "start-nonterminal"):
            t1, t2 = tok_at(k + 1), tok_at(k + 2)
            if t1 is not None and t1.kind == "word" and \
                    self._is_meta(t2, "end-nonterminal"):
                return self._head_defining(t1.value, k + 3)
        if t0.kind == "word":
            return self._head_defining(t0.value, k + 1)
        return None

    def _head_defining(self, name: str, k: int):
        toks = self.toks
        t = toks[k] if k < len(toks) else None
        if t is None:
            return None
        if self._is_meta(t, "defining"):
            return name, k + 1, False
        if self.tolerate_defining and self.spec.metasymbols["defining"] != "=":
            # a bare '=' shows up as a stray or as another role's literal
            if (t.kind == "stray" and t.value == "=") or \
                    (t.kind == "meta" and t.value == "="):
                return name, k + 1, True
        return None

    def _next_line_starts_production(self) -> bool:
        k = self.pos
        while k < len(self.toks) and self.toks[k].kind == "newline":
            k += 1
        if k >= len(self.toks):
            return True
        return self._head_at(k) is not None

    # -- atoms and expressions ---------------------------------------------

    def _pseudo_special(self, open_tok: _Tok) -> Expr:
        words = []
        while True:
            tok = self.peek()
            if tok is None:
                self.defect("missing-terminator", open_tok, "special symbol is never closed",
                            "special symbol runs to end of fragment")
                break
            if self._is_meta(tok, "end-special"):
                self.take()
                break
            if tok.kind == "newline":
                self.take()
                continue
            word = self.take().value
            # keep the minted name lexable: non-word characters become '_'
            words.append("".join(c if c in WORD_CHARS else "_" for c in word))
        if words == ["ANY"]:
            return ANY
        name = "??_" + "_".join(words) + "_??"
        return Nonterminal(name)

    def _bracket(self, open_tok: _Tok, closers: dict[str, str]) -> tuple[Expr, str]:
        """Parse up to a closing role; returns (expr, closing role)."""
        inner = self._alternatives(tuple(closers))
        if self.halted:
            self.defect("missing-terminator", open_tok,
                        "bracket is never closed",
                        "bracket closed at production boundary")
            return inner, next(iter(closers))
        tok = self.peek()
        for role in closers:
            if self._is_meta(tok, role):
                self.take()
                return inner, role
        # end of production without closer
        self.defect("missing-terminator", open_tok, "bracket is never closed",
                    "bracket closed at production boundary")
        return inner, next(iter(closers))

    def _atom(self) -> Expr | None:
        """Parse one atom; None when the sequence should stop here."""
        tok = self.peek()
        if tok is None:
            return None
        if tok.kind == "newline":
            raise AssertionError("newlines are handled by _sequence")
        if tok.kind == "terminal":
            self.take()
            if tok.value == "":
                self.defect("stray-token-as-terminal", tok, "empty terminal",
                            "treated as epsilon")
                return EPSILON
            return Terminal(tok.value)
        if tok.kind == "word":
            self.take()
            if tok.value == "EPSILON":
                return EPSILON
            if tok.value == "ANY":
                return ANY
            if tok.value.isdigit():
                self.defect("stray-token-as-terminal", tok,
                            f"bare number {tok.value!r} where an atom is expected",
                            "assumed that the quotes were forgotten")
                return Terminal(tok.value)
            return Nonterminal(tok.value)
        if tok.kind == "stray":
            self.take()
            value = "??" if tok.value == "?" else tok.value
            self.defect("stray-token-as-terminal", tok,
                        f"stray {tok.value!r} where an atom is expected",
                        f"assumed that the quotes were forgotten, kept as {value!r}")
            return Terminal(value)
        # metasymbols
        if self._is_meta(tok, "start-nonterminal"):
            self.take()
            name_tok = self.peek()
            if name_tok is not None and name_tok.kind == "word":
                self.take()
                end_tok = self.peek()
                if self._is_meta(end_tok, "end-nonterminal"):
                    self.take()
                else:
                    self.defect(
                        "unbalanced-nonterminal", tok,
                        f"nonterminal {name_tok.value!r} is never closed",
                        "name ends at the first alphanumeric/non-alphanumeric border")
                return Nonterminal(name_tok.value)
            self.defect("unbalanced-nonterminal", tok,
                        "start nonterminal symbol without a name",
                        f"kept as terminal {tok.value!r}")
            return Terminal(tok.value)
        if self._is_meta(tok, "start-option"):
            self.take()
            inner, _ = self._bracket(tok, {"end-option": "option"})
            return Opt(inner)
        if self._is_meta(tok, "start-group"):
            self.take()
            inner, _ = self._bracket(tok, {"end-group": "group"})
            if not isinstance(inner, (Sequence, Choice)):
                self.defect("excessive-brackets", tok, "group wraps a single atom",
                            "brackets absorbed by normalization")
            return inner
        if self._is_meta(tok, "start-star") or self._is_meta(tok, "start-plus"):
            self.take()
            closers = {}
            if "start-star" in tok.roles and self.spec.has("end-star"):
                closers["end-star"] = "star"
            if "start-plus" in tok.roles and self.spec.has("end-plus"):
                closers["end-plus"] = "plus"
            if not closers:
                self.defect("stray-token-as-terminal", tok,
                            f"repetition bracket {tok.value!r} has no closing literal",
                            "assumed that the quotes were forgotten")
                return Terminal(tok.value)
            inner, closed = self._bracket(tok, closers)
            if closed == "end-plus":
                if len(tok.roles) > 1:
                    self.defect("ambiguous-repetition", tok,
                                "start metasymbol is shared by star and plus repetition",
                                "resolved as one-or-more by longest match of the closer")
                return Plus(inner)
            return Star(inner)
        if self._is_meta(tok, "start-special"):
            self.take()
            return self._pseudo_special(tok)
        if self._is_meta(tok, "concatenate"):
            self.take()
            return EPSILON
        # a closing bracket or separator with no open construct: stray
        if tok.kind == "meta" and any(r.startswith("end-") for r in tok.roles):
            self.take()
            self.defect("stray-token-as-terminal", tok,
                        f"unmatched {tok.value!r}",
                        "assumed that the quotes were forgotten")
            return Terminal(tok.value)
        return None

    def _apply_postfix(self, e: Expr) -> Expr:
        while True:
            tok = self.peek()
            if self._is_meta(tok, "postfix-star"):
                self.take()
                e = Star(e)
            elif self._is_meta(tok, "postfix-plus"):
                self.take()
                e = Plus(e)
            elif self._is_meta(tok, "postfix-option"):
                self.take()
                e = Opt(e)
            else:
                return e

    def _sequence(self, closers: tuple[str, ...]) -> Expr | None:
        parts: list[Expr] = []
        while not self.halted:
            tok = self.peek()
            if tok is None:
                break
            if tok.kind == "newline":
                if not closers and self.spec.newline_terminates:
                    if self._next_line_starts_production():
                        break
                    if not self.spec.ignore_extra_newlines and \
                            self.peek(1) is not None and self.peek(1).kind == "newline":
                        break
                    self.take()
                    continue
                if closers and self.spec.newline_terminates and \
                        self._next_line_starts_production():
                    self.halted = True
                    break
                self.take()
                continue
            if self._is_meta(tok, "terminator") and not closers:
                break
            if self._is_meta(tok, "terminator") and closers:
                self.halted = True
                break
            if self._is_meta(tok, "definition-separator"):
                break
            if any(self._is_meta(tok, role) for role in closers):
                break
            if self._is_meta(tok, "exception") and parts:
                exc_tok = self.take()
                nxt = self._atom()
                if nxt is not None:
                    nxt = self._apply_postfix(nxt)
                prev = parts[-1]
                if isinstance(prev, Nonterminal) and isinstance(nxt, Nonterminal):
                    parts[-1] = Nonterminal(f"{prev.name}_-_{nxt.name}")
                elif isinstance(prev, Nonterminal) and isinstance(nxt, Terminal):
                    parts[-1] = Nonterminal(f"{prev.name}_-")
                    parts.append(nxt)
                else:
                    self.defect("stray-token-as-terminal", exc_tok,
                                "exception symbol between unsupported operands",
                                "kept as terminal '-'")
                    parts.append(Terminal(exc_tok.value))
                    if nxt is not None:
                        parts.append(nxt)
                continue
            atom = self._atom()
            if atom is None:
                break
            parts.append(self._apply_postfix(atom))
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else Sequence(tuple(parts))

    def _alternatives(self, closers: tuple[str, ...]) -> Expr:
        alts: list[Expr] = []
        while True:
            e = self._sequence(closers)
            tok = self.peek()
            if e is None:
                if self._is_meta(tok, "definition-separator") and not alts \
                        and not closers:
                    bar = self.take()
                    self.defect("leading-bar", bar,
                                "leading definition separator (bulleted-list style)",
                                "separator consumed")
                    continue
                e = EPSILON
                if tok is not None and (self._is_meta(tok, "definition-separator")
                                        or alts):
                    self.defect("leading-bar",
                                tok if tok is not None else self.toks[-1],
                                "empty alternative",
                                "treated as epsilon")
            alts.append(e)
            if self._is_meta(self.peek(), "definition-separator") and not self.halted:
                self.take()
                continue
            break
        if len(alts) == 1:
            return alts[0]
        return Choice(tuple(alts))

    # -- productions -------------------------------------------------------

    def parse(self) -> list[Production]:
        productions: list[Production] = []
        while True:
            while self.peek() is not None and (
                    self.peek().kind == "newline"
                    or self._is_meta(self.peek(), "terminator")):
                self.take()
            if self.peek() is None:
                break
            head = self._head_at(self.pos)
            if head is None:
                junk = self.take()
                self.defect("stray-token-as-terminal", junk,
                            f"unexpected {junk.value!r} between productions",
                            "discarded")
                continue
            lhs, nxt, wrong_defining = head
            if wrong_defining:
                self.defect("wrong-defining-symbol", self.toks[nxt - 1],
                            "wrong defining symbol '='",
                            "accepted as the defining symbol")
            self.pos = nxt
            self.halted = False
            rhs = self._alternatives(())
            self.halted = False
            tok = self.peek()
            if self._is_meta(tok, "terminator"):
                self.take()
            elif self.spec.has("terminator"):
                where = tok if tok is not None else self.toks[-1]
                self.defect("missing-terminator", where,
                            f"production {lhs!r} has no terminator symbol",
                            "production ended at the line boundary")
            productions.append(Production(lhs, normalize(rhs)))
        return productions


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def extract(fragment: str, spec: NotationSpec, *,
            tolerate_defining_variants: bool = False,
            rewrites: tuple[tuple[str, str], ...] = (),
            line_offset: int = 0) -> ExtractionReport:
    """Extract a grammar from one fragment of dialect text."""
    for old, new in rewrites:
        fragment = fragment.replace(old, new)
    defects: list[Defect] = []
    toks = _tokenize(fragment, spec, line_offset, defects)
    parser = _Parser(toks, spec, defects, tolerate_defining_variants)
    productions = parser.parse()
    if not productions:
        raise FatalSyntax("no production could be recovered")
    deduped: list[Production] = []
    seen = set()
    for p in productions:
        key = (p.lhs, p.rhs)
        if key in seen:
            continue
        seen.add(key)
        deduped.append(p)
    return ExtractionReport(Grammar.of(deduped), defects)


def extract_document(document: str, spec: NotationSpec, *,
                     tolerate_defining_variants: bool = False,
                     rewrites: tuple[tuple[str, str], ...] = ()) -> ExtractionReport:
    """Extract a whole document: split into fragments when the dialect has
    grammar delimiters and the document uses them, else treat the document
    as a single fragment."""
    start_lit = spec.get("start-grammar")
    use_split = bool(
        start_lit and spec.get("end-grammar")
        and _tolerant_pattern(start_lit).search(document)
    )
    if not use_split:
        return extract(document, spec,
                       tolerate_defining_variants=tolerate_defining_variants,
                       rewrites=rewrites)
    report = ExtractionReport(Grammar())
    grammars = []
    for text, offset in split_fragments_located(document, spec):
        part = extract(text, spec,
                       tolerate_defining_variants=tolerate_defining_variants,
                       rewrites=rewrites, line_offset=offset)
        grammars.append(part.grammar)
        report.defects.extend(part.defects)
    report.grammar = merge(grammars)
    return report


def merge(parts: list[Grammar]) -> Grammar:
    """Concatenate production lists in order, deduplicating exact (lhs, rhs)
    repeats (first occurrence wins); start sets are unioned."""
    seen = set()
    productions = []
    starts: set[str] = set()
    for g in parts:
        starts |= g.starts
        for p in g.productions:
            key = (p.lhs, p.rhs)
            if key in seen:
                continue
            seen.add(key)
            productions.append(p)
    return Grammar(tuple(productions), frozenset(starts))


def format_defects(defects: list[Defect]) -> str:
    return "".join(d.format() + "\n" for d in defects)
