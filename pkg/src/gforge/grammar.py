"""Core grammar representation.

A grammar is an ordered list of productions over an expression tree with
terminals, nonterminals, sequences, ordered choices, option/star/plus
repetition, an any-character wildcard, epsilon, and a "marked" wrapper used
to tag subexpressions for removal or to record exclusion information.

Expression values are immutable. The normalized form keeps trees canonical:
no singleton or nested sequences/choices, no epsilon inside a sequence of
length two or more, and no marked node directly inside another marked node.
Normalization is purely structural; it never applies language equivalences
such as ``(x*)* = x*`` (those belong to the transformation engine).

The canonical textual serialization ("pp-notation") is one production per
line, ``name: body``, with double-quoted terminals (backslash escapes for
``"``, ``\\``, newline, carriage return, tab), postfix ``? * +``, infix
``|``, juxtaposition for sequences, parentheses for grouping, ``EPSILON``,
``ANY``, and ``<``...``>`` for marked regions.
"""

from __future__ import annotations

from dataclasses import dataclass


class GrammarError(Exception):
    """Base class for grammar-level errors."""


class UndefinedNonterminal(GrammarError):
    """A nonterminal reachable from the requested start has no production."""


class PPSyntaxError(GrammarError):
    """Malformed pp-notation text."""

    def __init__(self, message: str, line: int = 0):
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Base class for right-hand-side expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Epsilon(Expr):
    __slots__ = ()

    def __repr__(self):
        return "EPSILON"


@dataclass(frozen=True)
class AnyChar(Expr):
    """Wildcard for a single character of the object language."""

    __slots__ = ()

    def __repr__(self):
        return "ANY"


EPSILON = Epsilon()
ANY = AnyChar()


@dataclass(frozen=True)
class Terminal(Expr):
    text: str

    def __repr__(self):
        return f"Terminal({self.text!r})"


@dataclass(frozen=True)
class Nonterminal(Expr):
    name: str

    def __repr__(self):
        return f"Nonterminal({self.name!r})"


@dataclass(frozen=True)
class Sequence(Expr):
    parts: tuple[Expr, ...]

    def __repr__(self):
        return f"Sequence{self.parts!r}"


@dataclass(frozen=True)
class Choice(Expr):
    alternatives: tuple[Expr, ...]

    def __repr__(self):
        return f"Choice{self.alternatives!r}"


@dataclass(frozen=True)
class Opt(Expr):
    inner: Expr


@dataclass(frozen=True)
class Star(Expr):
    inner: Expr


@dataclass(frozen=True)
class Plus(Expr):
    inner: Expr


@dataclass(frozen=True)
class Marked(Expr):
    inner: Expr


def seq(*parts: Expr) -> Expr:
    return normalize(Sequence(tuple(parts)))


def alt(*alternatives: Expr) -> Expr:
    return normalize(Choice(tuple(alternatives)))


def normalize(e: Expr) -> Expr:
    """Return the canonical structural form of ``e``.

    Idempotent and language-preserving: flattens directly nested
    sequences/choices, drops epsilons from sequences, collapses singleton
    sequences/choices, and unwraps marked-in-marked.
    """
    if isinstance(e, Sequence):
        parts: list[Expr] = []
        for p in e.parts:
            p = normalize(p)
            if isinstance(p, Sequence):
                parts.extend(p.parts)
            elif isinstance(p, Epsilon):
                continue
            else:
                parts.append(p)
        if not parts:
            return EPSILON
        if len(parts) == 1:
            return parts[0]
        return Sequence(tuple(parts))
    if isinstance(e, Choice):
        alts: list[Expr] = []
        for a in e.alternatives:
            a = normalize(a)
            if isinstance(a, Choice):
                alts.extend(a.alternatives)
            else:
                alts.append(a)
        if len(alts) == 1:
            return alts[0]
        return Choice(tuple(alts))
    if isinstance(e, Opt):
        return Opt(normalize(e.inner))
    if isinstance(e, Star):
        return Star(normalize(e.inner))
    if isinstance(e, Plus):
        return Plus(normalize(e.inner))
    if isinstance(e, Marked):
        inner = normalize(e.inner)
        while isinstance(inner, Marked):
            inner = inner.inner
        return Marked(inner)
    return e


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Sequence):
        return e.parts
    if isinstance(e, Choice):
        return e.alternatives
    if isinstance(e, (Opt, Star, Plus, Marked)):
        return (e.inner,)
    return ()


def walk(e: Expr):
    """Yield ``e`` and every subexpression, pre-order."""
    yield e
    for c in children(e):
        yield from walk(c)


# ---------------------------------------------------------------------------
# Productions and grammars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: Expr

    def __repr__(self):
        return f"Production({self.lhs!r}, {self.rhs!r})"


@dataclass(frozen=True)
class Grammar:
    """Ordered productions plus declared start symbols.

    Production order is significant. Instances built through :meth:`of`
    carry normalized right-hand sides, so structural comparison is plain
    equality.
    """

    productions: tuple[Production, ...] = ()
    starts: frozenset[str] = frozenset()

    @staticmethod
    def of(productions, starts=()) -> "Grammar":
        prods = tuple(Production(p.lhs, normalize(p.rhs)) for p in productions)
        return Grammar(prods, frozenset(starts))

    def defined(self) -> list[str]:
        """Defined nonterminal names, in first-definition order."""
        seen: dict[str, None] = {}
        for p in self.productions:
            seen.setdefault(p.lhs, None)
        return list(seen)

    def productions_of(self, name: str) -> list[Production]:
        return [p for p in self.productions if p.lhs == name]

    def used(self) -> set[str]:
        """Names occurring in any right-hand side (marked regions included)."""
        out: set[str] = set()
        for p in self.productions:
            for node in walk(p.rhs):
                if isinstance(node, Nonterminal):
                    out.add(node.name)
        return out

    def names(self) -> set[str]:
        return set(self.defined()) | self.used()


def equal(a: Grammar, b: Grammar) -> bool:
    """Structural equality modulo normalization; production order and starts count."""
    return Grammar.of(a.productions, a.starts) == Grammar.of(b.productions, b.starts)


# ---------------------------------------------------------------------------
# pp-notation lexer
# ---------------------------------------------------------------------------

NAME_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
NAME_CHARS = NAME_START | {"-"}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "r": "\r", "t": "\t"}
_UNESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}

RESERVED_WORDS = {"EPSILON", "ANY"}


def escape_terminal(text: str) -> str:
    return '"' + "".join(_UNESCAPES.get(c, c) for c in text) + '"'


def _scan_quoted(text: str, i: int, line: int) -> tuple[str, int]:
    """Scan a double-quoted literal starting at ``text[i] == '"'``."""
    out = []
    i += 1
    while i < len(text):
        c = text[i]
        if c == '"':
            return "".join(out), i + 1
        if c == "\\":
            i += 1
            if i >= len(text) or text[i] not in _ESCAPES:
                raise PPSyntaxError("bad escape in terminal", line)
            out.append(_ESCAPES[text[i]])
        else:
            out.append(c)
        i += 1
    raise PPSyntaxError("unterminated terminal", line)


def lex_pp(text: str, line: int = 0) -> list[tuple[str, str]]:
    """Tokenize a pp-notation expression into (kind, value) pairs.

    Kinds: ``name``, ``terminal``, and the single-character punctuation
    ``( ) < > | ? * +``.  Names may contain ``?`` only when the token starts
    with ``?`` (the convention for pseudo-nonterminals minted by the
    extractor); otherwise a ``?`` run is postfix punctuation.
    """
    toks: list[tuple[str, str]] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == '"':
            value, i = _scan_quoted(text, i, line)
            toks.append(("terminal", value))
            continue
        if c == "?":
            j = i
            while j < n and (text[j] in NAME_CHARS or text[j] == "?"):
                j += 1
            run = text[i:j]
            if set(run) == {"?"}:
                toks.extend(("?", "?") for _ in run)
            else:
                toks.append(("name", run))
            i = j
            continue
        if c in NAME_START:
            j = i
            while j < n and text[j] in NAME_CHARS:
                j += 1
            toks.append(("name", text[i:j]))
            i = j
            continue
        if c in "()<>|*+":
            toks.append((c, c))
            i += 1
            continue
        raise PPSyntaxError(f"unexpected character {c!r}", line)
    return toks


class _ExprParser:
    def __init__(self, toks: list[tuple[str, str]], line: int = 0):
        self.toks = toks
        self.pos = 0
        self.line = line

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def take(self) -> tuple[str, str]:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        if self.peek() != kind:
            raise PPSyntaxError(f"expected {kind!r}", self.line)
        return self.take()

    def parse(self) -> Expr:
        e = self.choice()
        if self.pos != len(self.toks):
            raise PPSyntaxError("trailing tokens in expression", self.line)
        return normalize(e)

    def choice(self) -> Expr:
        alts = [self.sequence()]
        while self.peek() == "|":
            self.take()
            alts.append(self.sequence())
        return alts[0] if len(alts) == 1 else Choice(tuple(alts))

    def sequence(self) -> Expr:
        parts = [self.postfix()]
        while self.peek() in ("name", "terminal", "(", "<"):
            parts.append(self.postfix())
        return parts[0] if len(parts) == 1 else Sequence(tuple(parts))

    def postfix(self) -> Expr:
        e = self.atom()
        while self.peek() in ("?", "*", "+"):
            kind, _ = self.take()
            e = {"?": Opt, "*": Star, "+": Plus}[kind](e)
        return e

    def atom(self) -> Expr:
        kind = self.peek()
        if kind == "name":
            _, name = self.take()
            if name == "EPSILON":
                return EPSILON
            if name == "ANY":
                return ANY
            return Nonterminal(name)
        if kind == "terminal":
            _, text = self.take()
            if not text:
                raise PPSyntaxError("empty terminal", self.line)
            return Terminal(text)
        if kind == "(":
            self.take()
            e = self.choice()
            self.expect(")")
            return e
        if kind == "<":
            self.take()
            e = self.choice()
            self.expect(">")
            return Marked(e)
        raise PPSyntaxError("expected an expression atom", self.line)


def parse_expr(text: str, line: int = 0) -> Expr:
    """Parse one pp-notation expression."""
    return _ExprParser(lex_pp(text, line), line).parse()


def parse_grammar(text: str) -> Grammar:
    """Parse pp-notation text, one ``name: body`` production per line."""
    productions = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        # Names never contain ':', so the first colon separates lhs from body.
        head, sep, body = stripped.partition(":")
        if not sep:
            raise PPSyntaxError("missing ':' after production name", lineno)
        lhs = head.strip()
        if not lhs or not all(ch in NAME_CHARS or ch == "?" for ch in lhs):
            raise PPSyntaxError(f"bad production name {lhs!r}", lineno)
        productions.append(Production(lhs, parse_expr(body, lineno)))
    return Grammar.of(productions)


# ---------------------------------------------------------------------------
# pp-notation printer
# ---------------------------------------------------------------------------

def _needs_parens_for_postfix(e: Expr, mark: str) -> bool:
    if isinstance(e, (Sequence, Choice)):
        return True
    # A pseudo-name containing '?' would fuse with a following postfix '?'.
    if mark == "?" and isinstance(e, Nonterminal) and "?" in e.name:
        return True
    return False


def expr_to_text(e: Expr) -> str:
    if isinstance(e, Epsilon):
        return "EPSILON"
    if isinstance(e, AnyChar):
        return "ANY"
    if isinstance(e, Terminal):
        return escape_terminal(e.text)
    if isinstance(e, Nonterminal):
        return e.name
    if isinstance(e, Sequence):
        out = []
        for p in e.parts:
            t = expr_to_text(p)
            if isinstance(p, Choice):
                t = f"({t})"
            out.append(t)
        return " ".join(out)
    if isinstance(e, Choice):
        return " | ".join(expr_to_text(a) for a in e.alternatives)
    if isinstance(e, (Opt, Star, Plus)):
        mark = {Opt: "?", Star: "*", Plus: "+"}[type(e)]
        t = expr_to_text(e.inner)
        if _needs_parens_for_postfix(e.inner, mark):
            t = f"({t})"
        return t + mark
    if isinstance(e, Marked):
        return f"<{expr_to_text(e.inner)}>"
    raise TypeError(f"not an expression: {e!r}")


def grammar_to_text(g: Grammar) -> str:
    """Serialize a grammar to pp-notation, one production per line."""
    return "".join(f"{p.lhs}: {expr_to_text(normalize(p.rhs))}\n" for p in g.productions)


# ---------------------------------------------------------------------------
# Language enumeration oracle
# ---------------------------------------------------------------------------

ENUMERATION_CAP = 12


def _concat(left: frozenset, right: frozenset, max_len: int) -> frozenset:
    return frozenset(
        a + b for a in left for b in right if len(a) + len(b) <= max_len
    )


def _eval(e: Expr, langs: dict[str, frozenset], max_len: int, alphabet) -> frozenset:
    if isinstance(e, Epsilon):
        return frozenset({""})
    if isinstance(e, AnyChar):
        return frozenset(a for a in alphabet if len(a) <= max_len)
    if isinstance(e, Terminal):
        return frozenset({e.text}) if len(e.text) <= max_len else frozenset()
    if isinstance(e, Nonterminal):
        return langs.get(e.name, frozenset())
    if isinstance(e, Sequence):
        acc = frozenset({""})
        for p in e.parts:
            acc = _concat(acc, _eval(p, langs, max_len, alphabet), max_len)
            if not acc:
                return acc
        return acc
    if isinstance(e, Choice):
        out: frozenset = frozenset()
        for a in e.alternatives:
            out = out | _eval(a, langs, max_len, alphabet)
        return out
    if isinstance(e, Opt):
        return _eval(e.inner, langs, max_len, alphabet) | {""}
    if isinstance(e, (Star, Plus)):
        base = _eval(e.inner, langs, max_len, alphabet)
        closure = frozenset({""})
        frontier = frozenset({""})
        while frontier:
            step = _concat(frontier, base, max_len) - closure
            closure = closure | step
            frontier = step
        if isinstance(e, Star):
            return closure
        return _concat(base, closure, max_len)
    if isinstance(e, Marked):
        # Marked is bookkeeping, not structure; enumeration looks through it.
        return _eval(e.inner, langs, max_len, alphabet)
    raise TypeError(f"not an expression: {e!r}")


def enumerate_language(
    g: Grammar,
    start: str,
    max_len: int,
    alphabet: tuple[str, ...] = ("a",),
    cap: int = ENUMERATION_CAP,
) -> frozenset:
    """All terminal strings of length <= ``max_len`` derivable from ``start``.

    Brute-force least-fixpoint computation, usable as an independent oracle
    for language-preservation checks. ``ANY`` matches one character from the
    probe ``alphabet`` (a documented non-semantic approximation).
    """
    if max_len > cap:
        raise ValueError(f"max_len {max_len} exceeds enumeration cap {cap}")
    # Works on the raw trees: the oracle stays independent of normalize().
    by_name: dict[str, list[Expr]] = {}
    for p in g.productions:
        by_name.setdefault(p.lhs, []).append(p.rhs)

    reachable = {start}
    queue = [start]
    while queue:
        name = queue.pop()
        if name not in by_name:
            raise UndefinedNonterminal(name)
        for rhs in by_name[name]:
            for node in walk(rhs):
                if isinstance(node, Nonterminal) and node.name not in reachable:
                    reachable.add(node.name)
                    queue.append(node.name)

    langs: dict[str, frozenset] = {n: frozenset() for n in reachable}
    changed = True
    while changed:
        changed = False
        for name in reachable:
            acc: frozenset = frozenset()
            for rhs in by_name[name]:
                acc = acc | _eval(rhs, langs, max_len, alphabet)
            if acc != langs[name]:
                langs[name] = acc
                changed = True
    return langs[start]
