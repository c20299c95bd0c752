"""Scripted grammar transformation engine.

Twenty operators over grammars, each with checked applicability
preconditions: an operator either returns a new grammar or raises with the
input grammar untouched (values are immutable, so atomicity is structural).

Expression arguments match whole nodes, contiguous sub-slices of a sequence,
and runs of adjacent alternatives of a choice, anywhere in a right-hand side
(marked regions included). ``massage`` legality is decided against a closed
table of regular-expression equivalences; ``widen`` against a closed table
of language-widening wrappers. Scripts are plain text, one ``op(args);``
statement at a time, with ``//`` comments and an optional ``in <name>``
scope before the closing parenthesis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import (
    EPSILON,
    AnyChar,
    Choice,
    Epsilon,
    Expr,
    Grammar,
    Marked,
    NAME_CHARS,
    Nonterminal,
    Opt,
    PPSyntaxError,
    Plus,
    Production,
    Sequence,
    Star,
    Terminal,
    normalize,
    parse_expr,
    walk,
)


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class XbgfError(Exception):
    """Base class for transformation errors (violated preconditions)."""


class SourceMissing(XbgfError): pass
class TargetNotFresh(XbgfError): pass
class SameName(XbgfError): pass
class AlreadyDefined(XbgfError): pass
class NotDefined(XbgfError): pass
class StillUsed(XbgfError): pass
class MultipleProductions(XbgfError): pass
class SelfReference(XbgfError): pass
class NothingToFold(XbgfError): pass
class NothingToUnfold(XbgfError): pass
class NotEquivalent(XbgfError): pass
class NothingMatched(XbgfError): pass
class PatternMismatch(XbgfError): pass
class ShapeMismatch(XbgfError): pass
class Duplicate(XbgfError): pass
class NotFound(XbgfError): pass
class LastAlternative(XbgfError): pass
class NotWidening(XbgfError): pass
class NoSuchProduction(XbgfError): pass
class MarkedNotConcrete(XbgfError): pass


class ScriptParse(XbgfError):
    """Malformed transformation script text."""


class StepError(XbgfError):
    """A script step failed; carries the state before the failing step."""

    def __init__(self, index: int, step: "Step", cause: XbgfError,
                 grammar: Grammar, log: list):
        super().__init__(f"step {index} {step.op}: {cause}")
        self.index = index
        self.step = step
        self.cause = cause
        self.grammar = grammar
        self.log = log


# ---------------------------------------------------------------------------
# Matching and replacement
# ---------------------------------------------------------------------------

def _rewrite(e: Expr, pattern: Expr, replacement: Expr) -> tuple[Expr, int]:
    """Replace non-overlapping occurrences of ``pattern``, leftmost-first."""
    if e == pattern:
        return replacement, 1
    count = 0
    if isinstance(e, Sequence):
        pat_parts = pattern.parts if isinstance(pattern, Sequence) else None
        out: list[Expr] = []
        i = 0
        parts = e.parts
        while i < len(parts):
            if pat_parts and parts[i:i + len(pat_parts)] == pat_parts:
                out.append(replacement)
                count += 1
                i += len(pat_parts)
            else:
                ne, c = _rewrite(parts[i], pattern, replacement)
                out.append(ne)
                count += c
                i += 1
        return Sequence(tuple(out)), count
    if isinstance(e, Choice):
        pat_alts = pattern.alternatives if isinstance(pattern, Choice) else None
        out = []
        i = 0
        alts = e.alternatives
        while i < len(alts):
            if pat_alts and alts[i:i + len(pat_alts)] == pat_alts:
                out.append(replacement)
                count += 1
                i += len(pat_alts)
            else:
                na, c = _rewrite(alts[i], pattern, replacement)
                out.append(na)
                count += c
                i += 1
        return Choice(tuple(out)), count
    if isinstance(e, (Opt, Star, Plus, Marked)):
        ni, c = _rewrite(e.inner, pattern, replacement)
        return type(e)(ni), c
    return e, 0


def _rewrite_grammar(g: Grammar, pattern: Expr, replacement: Expr,
                     scope: str | None = None,
                     skip_lhs: str | None = None) -> tuple[Grammar, int]:
    pattern = normalize(pattern)
    total = 0
    prods = []
    for p in g.productions:
        if (scope is None or p.lhs == scope) and p.lhs != skip_lhs:
            ne, c = _rewrite(p.rhs, pattern, replacement)
            prods.append(Production(p.lhs, normalize(ne)))
            total += c
        else:
            prods.append(p)
    return Grammar(tuple(prods), g.starts), total


def _map_names(e: Expr, table: dict[str, str]) -> Expr:
    if isinstance(e, Nonterminal):
        return Nonterminal(table.get(e.name, e.name))
    if isinstance(e, Sequence):
        return Sequence(tuple(_map_names(p, table) for p in e.parts))
    if isinstance(e, Choice):
        return Choice(tuple(_map_names(a, table) for a in e.alternatives))
    if isinstance(e, (Opt, Star, Plus, Marked)):
        return type(e)(_map_names(e.inner, table))
    return e


def _occurs(g: Grammar, name: str) -> bool:
    return name in g.names()


def _terminal_occurs(g: Grammar, text: str) -> bool:
    return any(
        isinstance(node, Terminal) and node.text == text
        for p in g.productions for node in walk(p.rhs)
    )


# ---------------------------------------------------------------------------
# Equivalence and widening law tables
# ---------------------------------------------------------------------------

def _law_step(e: Expr) -> Expr:
    """One bottom-up pass of the closed equivalence-law rewrites."""
    if isinstance(e, Sequence):
        parts = [_law_step(p) for p in e.parts]
        out: list[Expr] = []
        for p in parts:
            prev = out[-1] if out else None
            if isinstance(p, Star) and prev == p.inner:
                out[-1] = Plus(p.inner)          # x x* = x+
            elif prev is not None and isinstance(prev, Star) and prev.inner == p:
                out[-1] = Plus(p)                # x* x = x+
            else:
                out.append(p)
        return normalize(Sequence(tuple(out)))
    if isinstance(e, Choice):
        alts = tuple(_law_step(a) for a in e.alternatives)
        if len(alts) == 2:
            if isinstance(alts[1], Epsilon):
                return Opt(alts[0])              # (x|eps) = x?
            if isinstance(alts[0], Epsilon):
                return Opt(alts[1])              # (eps|x) = x?
        return normalize(Choice(alts))
    if isinstance(e, (Opt, Star, Plus)):
        inner = _law_step(e.inner)
        if isinstance(e, Star):
            if isinstance(inner, (Star, Plus)):
                return Star(inner.inner)         # (x*)* = (x+)* = x*
            if isinstance(inner, Opt):
                return Star(inner.inner)         # (x?)* = x*
            return Star(inner)
        if isinstance(e, Plus):
            if isinstance(inner, Star):
                return Star(inner.inner)         # (x*)+ = x*
            if isinstance(inner, Plus):
                return Plus(inner.inner)         # (x+)+ = x+
            if isinstance(inner, Opt):
                return Star(inner.inner)         # (x?)+ = x*
            return Plus(inner)
        if isinstance(inner, Opt):
            return Opt(inner.inner)              # (x?)? = x?
        if isinstance(inner, Star):
            return Star(inner.inner)             # (x*)? = x*
        if isinstance(inner, Plus):
            return Star(inner.inner)             # (x+)? = x*
        return Opt(inner)
    if isinstance(e, Marked):
        return Marked(_law_step(e.inner))
    return e


def law_normal(e: Expr) -> Expr:
    """Normal form under the closed law table; two expressions are accepted
    by ``massage`` exactly when their normal forms coincide."""
    e = normalize(e)
    while True:
        ne = _law_step(e)
        if ne == e:
            return e
        e = ne


def _direct_law_instance(a: Expr, b: Expr) -> bool:
    """True when (a, b) instantiates one table law directly, either way."""
    for e1, e2 in ((a, b), (b, a)):
        if isinstance(e1, Opt) and isinstance(e2, Choice) \
                and len(e2.alternatives) == 2:
            x = e1.inner
            if e2.alternatives in ((x, EPSILON), (EPSILON, x)):
                return True
        if isinstance(e2, Plus):
            x = e2.inner
            if e1 in (normalize(Sequence((x, Star(x)))),
                      normalize(Sequence((Star(x), x)))):
                return True
        if isinstance(e1, Star) and isinstance(e1.inner, (Star, Plus, Opt)) \
                and e2 == Star(e1.inner.inner):
            return True
        if isinstance(e1, Plus):
            i = e1.inner
            if isinstance(i, Star) and e2 == Star(i.inner):
                return True
            if isinstance(i, Plus) and e2 == Plus(i.inner):
                return True
            if isinstance(i, Opt) and e2 == Star(i.inner):
                return True
        if isinstance(e1, Opt):
            i = e1.inner
            if isinstance(i, Opt) and e2 == Opt(i.inner):
                return True
            if isinstance(i, (Star, Plus)) and e2 == Star(i.inner):
                return True
    return False


def law_related(e1: Expr, e2: Expr) -> bool:
    """massage legality: a direct law instance, or law-normal forms agree
    (which admits chained instances such as (x+ | epsilon) vs x*)."""
    e1, e2 = normalize(e1), normalize(e2)
    return _direct_law_instance(e1, e2) or law_normal(e1) == law_normal(e2)


def _is_widening(e1: Expr, e2: Expr) -> bool:
    if e2 in (Opt(e1), Star(e1), Plus(e1)):
        return True
    if isinstance(e1, Plus) and e2 == Star(e1.inner):
        return True
    if isinstance(e1, Opt) and e2 == Star(e1.inner):
        return True
    return False


# ---------------------------------------------------------------------------
# Marked-region helpers
# ---------------------------------------------------------------------------

def _unmark(e: Expr) -> Expr:
    if isinstance(e, Marked):
        return _unmark(e.inner)
    if isinstance(e, Sequence):
        return Sequence(tuple(_unmark(p) for p in e.parts))
    if isinstance(e, Choice):
        return Choice(tuple(_unmark(a) for a in e.alternatives))
    if isinstance(e, (Opt, Star, Plus)):
        return type(e)(_unmark(e.inner))
    return e


def _drop_marked(e: Expr) -> Expr | None:
    """Remove marked subtrees entirely; ``None`` means the node vanished."""
    if isinstance(e, Marked):
        return None
    if isinstance(e, Sequence):
        kept = [d for p in e.parts if (d := _drop_marked(p)) is not None]
        return Sequence(tuple(kept)) if kept else EPSILON
    if isinstance(e, Choice):
        kept = [d for a in e.alternatives if (d := _drop_marked(a)) is not None]
        if not kept:
            return None
        return Choice(tuple(kept)) if len(kept) > 1 else kept[0]
    if isinstance(e, (Opt, Star, Plus)):
        inner = _drop_marked(e.inner)
        return None if inner is None else type(e)(inner)
    return e


def _marked_regions(e: Expr):
    for node in walk(e):
        if isinstance(node, Marked):
            yield node


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def rename_n(g: Grammar, old: str, new: str) -> Grammar:
    if not _occurs(g, old):
        raise SourceMissing(f"nonterminal {old!r} does not occur")
    if _occurs(g, new):
        raise TargetNotFresh(f"nonterminal {new!r} already occurs")
    table = {old: new}
    prods = tuple(
        Production(new if p.lhs == old else p.lhs, _map_names(p.rhs, table))
        for p in g.productions
    )
    starts = frozenset(new if s == old else s for s in g.starts)
    return Grammar(prods, starts)


def rename_t(g: Grammar, old: str, new: str) -> Grammar:
    if not _terminal_occurs(g, old):
        raise SourceMissing(f"terminal {old!r} does not occur")
    g2, _ = _rewrite_grammar(g, Terminal(old), Terminal(new))
    return g2


def unite(g: Grammar, donor: str, receiver: str) -> Grammar:
    if donor == receiver:
        raise SameName(donor)
    if not _occurs(g, donor):
        raise SourceMissing(f"nonterminal {donor!r} does not occur")
    if not _occurs(g, receiver):
        raise SourceMissing(f"nonterminal {receiver!r} does not occur")
    donor_prods = [p for p in g.productions if p.lhs == donor]
    receiver_defined = any(p.lhs == receiver for p in g.productions)
    if donor_prods and receiver_defined:
        remaining = [p for p in g.productions if p.lhs != donor]
        last = max(i for i, p in enumerate(remaining) if p.lhs == receiver)
        moved = [Production(receiver, p.rhs) for p in donor_prods]
        prods = remaining[:last + 1] + moved + remaining[last + 1:]
    else:
        prods = [
            Production(receiver, p.rhs) if p.lhs == donor else p
            for p in g.productions
        ]
    table = {donor: receiver}
    prods = [Production(p.lhs, _map_names(p.rhs, table)) for p in prods]
    starts = frozenset(receiver if s == donor else s for s in g.starts)
    return Grammar(tuple(prods), starts)


def _shared_lhs(prods: list[Production]) -> str:
    lhs = prods[0].lhs
    if any(p.lhs != lhs for p in prods):
        raise XbgfError("productions must share one left-hand side")
    return lhs


def define(g: Grammar, prods: list[Production]) -> Grammar:
    lhs = _shared_lhs(prods)
    if any(p.lhs == lhs for p in g.productions):
        raise AlreadyDefined(lhs)
    added = tuple(Production(p.lhs, normalize(p.rhs)) for p in prods)
    return Grammar(g.productions + added, g.starts)


def redefine(g: Grammar, prods: list[Production]) -> Grammar:
    lhs = _shared_lhs(prods)
    indices = [i for i, p in enumerate(g.productions) if p.lhs == lhs]
    if not indices:
        raise NotDefined(lhs)
    new = [Production(p.lhs, normalize(p.rhs)) for p in prods]
    out = [p for p in g.productions if p.lhs != lhs]
    out[indices[0]:indices[0]] = new
    return Grammar(tuple(out), g.starts)


def eliminate(g: Grammar, name: str) -> Grammar:
    if not any(p.lhs == name for p in g.productions):
        raise NotDefined(name)
    for p in g.productions:
        if p.lhs != name and any(
            isinstance(n, Nonterminal) and n.name == name for n in walk(p.rhs)
        ):
            raise StillUsed(f"{name!r} is used by {p.lhs!r}")
    prods = tuple(p for p in g.productions if p.lhs != name)
    return Grammar(prods, g.starts)


def inline(g: Grammar, name: str) -> Grammar:
    defs = g.productions_of(name)
    if not defs:
        raise NotDefined(name)
    if len(defs) > 1:
        raise MultipleProductions(name)
    body = defs[0].rhs
    if any(isinstance(n, Nonterminal) and n.name == name for n in walk(body)):
        raise SelfReference(name)
    g2 = Grammar(tuple(p for p in g.productions if p.lhs != name), g.starts)
    g3, _ = _rewrite_grammar(g2, Nonterminal(name), body)
    return g3


def _single_body(g: Grammar, name: str) -> Expr:
    defs = g.productions_of(name)
    if not defs:
        raise NotDefined(name)
    if len(defs) > 1:
        raise MultipleProductions(name)
    return defs[0].rhs


def fold(g: Grammar, name: str, scope: str | None = None) -> Grammar:
    body = _single_body(g, name)
    g2, count = _rewrite_grammar(g, body, Nonterminal(name),
                                 scope=scope, skip_lhs=name)
    if count == 0:
        raise NothingToFold(name)
    return g2


def unfold(g: Grammar, name: str, scope: str | None = None) -> Grammar:
    body = _single_body(g, name)
    g2, count = _rewrite_grammar(g, Nonterminal(name), body, scope=scope)
    if count == 0:
        raise NothingToUnfold(name)
    return g2


def massage(g: Grammar, e1: Expr, e2: Expr, scope: str | None = None) -> Grammar:
    if not law_related(e1, e2):
        raise NotEquivalent("expressions are not related by the law table")
    g2, count = _rewrite_grammar(g, e1, e2, scope=scope)
    if count == 0:
        raise NothingMatched("massage source expression not found")
    return g2


def replace(g: Grammar, e1: Expr, e2: Expr, scope: str | None = None) -> Grammar:
    g2, count = _rewrite_grammar(g, e1, e2, scope=scope)
    if count == 0:
        raise NothingMatched("replace source expression not found")
    return g2


def widen(g: Grammar, e1: Expr, e2: Expr, scope: str | None = None) -> Grammar:
    e1n, e2n = normalize(e1), normalize(e2)
    if not _is_widening(e1n, e2n):
        raise NotWidening("pair is not in the widening table")
    g2, count = _rewrite_grammar(g, e1n, e2n, scope=scope)
    if count == 0:
        raise NothingMatched("widen source expression not found")
    return g2


def _yacc_split(name: str, rhs: Expr):
    """Return ('left'|'right', rest-expression) if ``rhs`` is a recursion of
    the yacc shape, else None."""
    if not isinstance(rhs, Sequence):
        return None
    self_nt = Nonterminal(name)
    if rhs.parts[0] == self_nt:
        rest = rhs.parts[1:]
    elif rhs.parts[-1] == self_nt:
        rest = rhs.parts[:-1]
    else:
        return None
    rest_expr = rest[0] if len(rest) == 1 else Sequence(rest)
    if any(isinstance(n, Nonterminal) and n.name == name for n in walk(rest_expr)):
        return None
    side = "left" if rhs.parts[0] == self_nt else "right"
    return side, rest_expr


def deyaccify(g: Grammar, name: str) -> Grammar:
    defs = g.productions_of(name)
    if len(defs) != 2:
        raise PatternMismatch(f"{name!r} must have exactly two productions")
    splits = [_yacc_split(name, p.rhs) for p in defs]
    recursive = [i for i, s in enumerate(splits) if s is not None]
    if len(recursive) != 1:
        raise PatternMismatch(f"{name!r} does not match a yacc pattern")
    rec_i = recursive[0]
    base = defs[1 - rec_i].rhs
    if any(isinstance(n, Nonterminal) and n.name == name for n in walk(base)):
        raise PatternMismatch(f"base production of {name!r} is recursive")
    side, y = splits[rec_i]
    if base == y:
        body: Expr = Plus(base)
    elif side == "left":
        body = Sequence((base, Star(y)))        # {n: x, n: n y} -> x y*
    else:
        body = Sequence((Star(y), base))        # {n: x, n: y n} -> y* x
    first = next(i for i, p in enumerate(g.productions) if p.lhs == name)
    out = [p for p in g.productions if p.lhs != name]
    out.insert(first, Production(name, normalize(body)))
    return Grammar(tuple(out), g.starts)


def vertical(g: Grammar, name: str) -> Grammar:
    defs = g.productions_of(name)
    if len(defs) != 1 or not isinstance(defs[0].rhs, Choice):
        raise ShapeMismatch(f"{name!r} must have one choice production")
    alts = defs[0].rhs.alternatives
    first = next(i for i, p in enumerate(g.productions) if p.lhs == name)
    out = [p for p in g.productions if p.lhs != name]
    out[first:first] = [Production(name, a) for a in alts]
    return Grammar(tuple(out), g.starts)


def horizontal(g: Grammar, name: str) -> Grammar:
    defs = g.productions_of(name)
    if len(defs) < 2:
        raise ShapeMismatch(f"{name!r} must have two or more productions")
    merged = normalize(Choice(tuple(p.rhs for p in defs)))
    first = next(i for i, p in enumerate(g.productions) if p.lhs == name)
    out = [p for p in g.productions if p.lhs != name]
    out.insert(first, Production(name, merged))
    return Grammar(tuple(out), g.starts)


def _distribute_expr(e: Expr) -> Expr:
    if isinstance(e, Choice):
        return Choice(tuple(_distribute_expr(a) for a in e.alternatives))
    if isinstance(e, Sequence):
        combos: list[list[Expr]] = [[]]
        for p in e.parts:
            dp = _distribute_expr(p)
            alts = dp.alternatives if isinstance(dp, Choice) else (dp,)
            combos = [c + [a] for c in combos for a in alts]
        if len(combos) == 1:
            return Sequence(tuple(combos[0]))
        return Choice(tuple(Sequence(tuple(c)) for c in combos))
    return e


def distribute(g: Grammar, name: str) -> Grammar:
    if not any(p.lhs == name for p in g.productions):
        raise NotDefined(name)
    prods = tuple(
        Production(p.lhs, normalize(_distribute_expr(p.rhs)))
        if p.lhs == name else p
        for p in g.productions
    )
    return Grammar(prods, g.starts)


def add_v(g: Grammar, prod: Production) -> Grammar:
    prod = Production(prod.lhs, normalize(prod.rhs))
    if not any(p.lhs == prod.lhs for p in g.productions):
        raise NotDefined(prod.lhs)
    if prod in g.productions:
        raise Duplicate(f"{prod.lhs}: alternative already present")
    last = max(i for i, p in enumerate(g.productions) if p.lhs == prod.lhs)
    out = list(g.productions)
    out.insert(last + 1, prod)
    return Grammar(tuple(out), g.starts)


def remove_v(g: Grammar, prod: Production) -> Grammar:
    prod = Production(prod.lhs, normalize(prod.rhs))
    if not any(p.lhs == prod.lhs for p in g.productions):
        raise NotDefined(prod.lhs)
    if prod not in g.productions:
        raise NotFound(f"{prod.lhs}: no such alternative")
    if len(g.productions_of(prod.lhs)) == 1:
        raise LastAlternative(prod.lhs)
    out = list(g.productions)
    out.remove(prod)
    return Grammar(tuple(out), g.starts)


def _project_impl(g: Grammar, prod: Production, concrete: bool) -> Grammar:
    marked = list(_marked_regions(normalize(prod.rhs)))
    if not marked:
        raise NoSuchProduction(f"{prod.lhs}: argument has no marked parts")
    if concrete:
        for region in marked:
            for node in walk(region.inner):
                if isinstance(node, (Nonterminal, AnyChar)):
                    raise MarkedNotConcrete(
                        f"{prod.lhs}: marked region contains {node!r}")
    target = normalize(_unmark(prod.rhs))
    indices = [i for i, p in enumerate(g.productions)
               if p.lhs == prod.lhs and p.rhs == target]
    if not indices:
        raise NoSuchProduction(f"{prod.lhs}: no production matches the argument")
    dropped = _drop_marked(normalize(prod.rhs))
    new_rhs = normalize(dropped if dropped is not None else EPSILON)
    out = list(g.productions)
    out[indices[0]] = Production(prod.lhs, new_rhs)
    return Grammar(tuple(out), g.starts)


def project(g: Grammar, prod: Production) -> Grammar:
    return _project_impl(g, prod, concrete=False)


def abstractize(g: Grammar, prod: Production) -> Grammar:
    return _project_impl(g, prod, concrete=True)


# ---------------------------------------------------------------------------
# Script syntax
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    op: str
    args: tuple
    scope: str | None
    text: str
    line: int


@dataclass(frozen=True)
class TransformScript:
    steps: tuple[Step, ...]


_SCOPED_OPS = {"fold", "unfold", "massage", "replace", "widen"}
_SCOPE_ONLY_OPS = {"vertical", "horizontal", "distribute"}

OPERATORS = (
    "renameN", "renameT", "unite", "define", "redefine", "eliminate",
    "inline", "fold", "unfold", "massage", "deyaccify", "vertical",
    "horizontal", "distribute", "addV", "removeV", "replace", "widen",
    "project", "abstractize",
)


def _strip_comments(text: str) -> str:
    out = []
    i = 0
    in_string = False
    while i < len(text):
        c = text[i]
        if in_string:
            out.append(c)
            if c == "\\" and i + 1 < len(text):
                out.append(text[i + 1])
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
            out.append(c)
        elif c == "/" and text[i:i + 2] == "//":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        else:
            out.append(c)
        i += 1
    return "".join(out)


def _split_statements(text: str) -> list[tuple[str, int]]:
    """Split on ';' at paren depth zero, outside strings; keep line numbers."""
    statements = []
    buf: list[str] = []
    depth = 0
    in_string = False
    line = 1
    start_line = 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
        if in_string:
            buf.append(c)
            if c == "\\" and i + 1 < len(text):
                buf.append(text[i + 1])
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
            buf.append(c)
        elif c == "(":
            depth += 1
            buf.append(c)
        elif c == ")":
            depth -= 1
            buf.append(c)
        elif c == ";" and depth == 0:
            stmt = "".join(buf).strip()
            if stmt:
                statements.append((stmt, start_line))
            buf = []
        elif not buf and c in " \t\r\n":
            pass
        else:
            if not buf:
                start_line = line
            buf.append(c)
        i += 1
    if "".join(buf).strip():
        raise ScriptParse(f"line {start_line}: statement missing terminating ';'")
    return statements


def _split_top_commas(text: str) -> list[str]:
    args = []
    buf: list[str] = []
    depth = 0
    in_string = False
    i = 0
    while i < len(text):
        c = text[i]
        if in_string:
            buf.append(c)
            if c == "\\" and i + 1 < len(text):
                buf.append(text[i + 1])
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
            buf.append(c)
        elif c in "(<":
            depth += 1
            buf.append(c)
        elif c in ")>":
            depth -= 1
            buf.append(c)
        elif c == "," and depth == 0:
            args.append("".join(buf))
            buf = []
        else:
            buf.append(c)
        i += 1
    args.append("".join(buf))
    return args


def _extract_scope(arg: str) -> tuple[str, str | None]:
    """Split a trailing top-level ``in <name>`` out of an argument string."""
    depth = 0
    in_string = False
    i = 0
    while i < len(arg):
        c = arg[i]
        if in_string:
            if c == "\\":
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c in "(<":
            depth += 1
        elif c in ")>":
            depth -= 1
        elif depth == 0 and arg[i:i + 2] == "in" and \
                (i == 0 or arg[i - 1] in " \t\n") and \
                (i + 2 >= len(arg) or arg[i + 2] in " \t\n"):
            scope = arg[i + 2:].strip()
            return arg[:i], scope
        i += 1
    return arg, None


def _has_top_colon(text: str) -> int:
    depth = 0
    in_string = False
    i = 0
    while i < len(text):
        c = text[i]
        if in_string:
            if c == "\\":
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c in "(<":
            depth += 1
        elif c in ")>":
            depth -= 1
        elif c == ":" and depth == 0:
            return i
        i += 1
    return -1


def _parse_name(text: str, line: int) -> str:
    name = text.strip()
    if not name or not all(ch in NAME_CHARS or ch == "?" for ch in name):
        raise ScriptParse(f"line {line}: expected a nonterminal name, got {text!r}")
    return name


def _parse_terminal_arg(text: str, line: int) -> str:
    text = text.strip()
    if len(text) < 2 or not text.startswith('"'):
        raise ScriptParse(f"line {line}: expected a quoted terminal, got {text!r}")
    try:
        e = parse_expr(text, line)
    except PPSyntaxError as exc:
        raise ScriptParse(str(exc)) from exc
    if not isinstance(e, Terminal):
        raise ScriptParse(f"line {line}: expected a single terminal, got {text!r}")
    return e.text


def _parse_production_arg(text: str, line: int) -> list[Production]:
    colon = _has_top_colon(text)
    if colon < 0:
        raise ScriptParse(f"line {line}: expected 'name: body' production argument")
    lhs = _parse_name(text[:colon], line)
    body = text[colon + 1:]
    prods = []
    for piece in body.splitlines():
        if not piece.strip():
            continue
        try:
            prods.append(Production(lhs, parse_expr(piece, line)))
        except PPSyntaxError as exc:
            raise ScriptParse(str(exc)) from exc
    if not prods:
        raise ScriptParse(f"line {line}: production argument for {lhs!r} has no body")
    return prods


def _parse_expr_arg(text: str, line: int) -> Expr:
    try:
        return parse_expr(text, line)
    except PPSyntaxError as exc:
        raise ScriptParse(str(exc)) from exc


def _parse_step(stmt: str, line: int) -> Step:
    head, paren, rest = stmt.partition("(")
    op = head.strip()
    if not paren or not rest.rstrip().endswith(")"):
        raise ScriptParse(f"line {line}: expected 'op( ... )', got {stmt!r}")
    if op not in OPERATORS:
        raise ScriptParse(f"line {line}: unknown operator {op!r}")
    argtext = rest.rstrip()[:-1]

    scope = None
    raw_args = _split_top_commas(argtext)
    if op in _SCOPE_ONLY_OPS:
        if len(raw_args) != 1:
            raise ScriptParse(f"line {line}: {op} takes a single 'in <name>' scope")
        body, scope = _extract_scope(raw_args[0])
        if scope is None or body.strip():
            raise ScriptParse(f"line {line}: {op} takes a single 'in <name>' scope")
        return Step(op, (_parse_name(scope, line),), None, stmt, line)
    if op in _SCOPED_OPS and raw_args:
        body, scope = _extract_scope(raw_args[-1])
        if scope is not None:
            scope = _parse_name(scope, line)
            raw_args[-1] = body

    def arity(n: int):
        if len(raw_args) != n:
            raise ScriptParse(f"line {line}: {op} expects {n} argument(s)")

    if op in ("renameN", "unite"):
        arity(2)
        args = (_parse_name(raw_args[0], line), _parse_name(raw_args[1], line))
    elif op == "renameT":
        arity(2)
        args = (_parse_terminal_arg(raw_args[0], line),
                _parse_terminal_arg(raw_args[1], line))
    elif op in ("eliminate", "inline", "deyaccify", "fold", "unfold"):
        arity(1)
        args = (_parse_name(raw_args[0], line),)
    elif op in ("define", "redefine"):
        arity(1)
        args = (tuple(_parse_production_arg(raw_args[0], line)),)
    elif op in ("addV", "removeV", "project", "abstractize"):
        arity(1)
        prods = _parse_production_arg(raw_args[0], line)
        if len(prods) != 1:
            raise ScriptParse(f"line {line}: {op} takes a single production")
        args = (prods[0],)
    elif op in ("massage", "replace", "widen"):
        arity(2)
        args = (_parse_expr_arg(raw_args[0], line),
                _parse_expr_arg(raw_args[1], line))
        if op == "widen" and scope is None:
            raise ScriptParse(f"line {line}: widen requires an 'in <name>' scope")
    else:  # pragma: no cover - the operator table above is exhaustive
        raise ScriptParse(f"line {line}: unhandled operator {op!r}")

    if scope is not None and op not in _SCOPED_OPS:
        raise ScriptParse(f"line {line}: {op} does not admit a scope")
    return Step(op, args, scope, stmt, line)


def parse_script(text: str) -> TransformScript:
    statements = _split_statements(_strip_comments(text))
    return TransformScript(tuple(
        _parse_step(stmt, line) for stmt, line in statements
    ))


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    index: int
    op: str
    text: str
    before: tuple[int, int, int]
    after: tuple[int, int, int]


def _quick_metrics(g: Grammar) -> tuple[int, int, int]:
    """(TERM, VAR, PROD) for step logs."""
    from .analysis import metrics

    report = metrics(g)
    return report.term, report.var, report.prod


def apply_step(g: Grammar, step: Step) -> Grammar:
    op, a = step.op, step.args
    if op == "renameN":
        return rename_n(g, a[0], a[1])
    if op == "renameT":
        return rename_t(g, a[0], a[1])
    if op == "unite":
        return unite(g, a[0], a[1])
    if op == "define":
        return define(g, list(a[0]))
    if op == "redefine":
        return redefine(g, list(a[0]))
    if op == "eliminate":
        return eliminate(g, a[0])
    if op == "inline":
        return inline(g, a[0])
    if op == "fold":
        return fold(g, a[0], step.scope)
    if op == "unfold":
        return unfold(g, a[0], step.scope)
    if op == "massage":
        return massage(g, a[0], a[1], step.scope)
    if op == "deyaccify":
        return deyaccify(g, a[0])
    if op == "vertical":
        return vertical(g, a[0])
    if op == "horizontal":
        return horizontal(g, a[0])
    if op == "distribute":
        return distribute(g, a[0])
    if op == "addV":
        return add_v(g, a[0])
    if op == "removeV":
        return remove_v(g, a[0])
    if op == "replace":
        return replace(g, a[0], a[1], step.scope)
    if op == "widen":
        return widen(g, a[0], a[1], step.scope)
    if op == "project":
        return project(g, a[0])
    if op == "abstractize":
        return abstractize(g, a[0])
    raise ScriptParse(f"unknown operator {op!r}")  # pragma: no cover


def run_script(script: TransformScript, g: Grammar) -> tuple[Grammar, list[StepRecord]]:
    """Apply steps in order; on failure raise StepError carrying the state
    before the failing step and the log so far."""
    log: list[StepRecord] = []
    current = Grammar.of(g.productions, g.starts)
    for index, step in enumerate(script.steps):
        before = _quick_metrics(current)
        try:
            current = apply_step(current, step)
        except XbgfError as exc:
            raise StepError(index, step, exc, current, log) from exc
        log.append(StepRecord(index, step.op, step.text, before,
                              _quick_metrics(current)))
    return current, log
