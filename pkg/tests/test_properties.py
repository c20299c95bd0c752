"""Operator soundness on generated applicable instances.

For every refactoring operator the generator constructs a grammar together
with an applicable step, applies it, and compares the enumerated language
(length <= 6) before and after: refactorings preserve it, widen may only
grow it, removeV/project may only shrink it.
"""

import random

import pytest

from conftest import atomicity_cases
from gforge import xbgf
from gforge.grammar import (
    EPSILON,
    Choice,
    Epsilon,
    Grammar,
    Nonterminal,
    Opt,
    Plus,
    Production,
    Sequence,
    Star,
    Terminal,
    enumerate_language,
    equal,
    normalize,
    walk,
)

RUNS = 100
MAX_LEN = 6


def gen_expr(rng, depth, names=()):
    leaves = [Terminal("a"), Terminal("b"), Terminal("c")]
    leaves += [Nonterminal(n) for n in names]
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice(leaves)
    kind = rng.randrange(6)
    if kind == 0:
        return Sequence(tuple(gen_expr(rng, depth - 1, names)
                              for _ in range(2)))
    if kind == 1:
        return Choice(tuple(gen_expr(rng, depth - 1, names)
                            for _ in range(2)))
    wrapper = rng.choice([Opt, Star, Plus])
    return wrapper(gen_expr(rng, depth - 1, names))


def embed(rng, e):
    """Place ``e`` in a random context for the start production."""
    other = gen_expr(rng, 1)
    contexts = [
        lambda: e,
        lambda: Sequence((other, e)),
        lambda: Sequence((e, other)),
        lambda: Choice((e, other)),
        lambda: Opt(e),
        lambda: Star(e),
    ]
    return normalize(rng.choice(contexts)())


def helper_productions(rng, names):
    return [Production(n, normalize(gen_expr(rng, 2))) for n in names]


def build(rng, focus, extra=()):
    """A grammar whose start production embeds ``focus``; every helper
    nonterminal is defined with a terminal-only body."""
    prods = [Production("S", embed(rng, focus))] + list(extra)
    used = set()
    for p in prods:
        for node in walk(p.rhs):
            if isinstance(node, Nonterminal):
                used.add(node.name)
    defined = {p.lhs for p in prods}
    prods += helper_productions(rng, sorted(used - defined))
    return Grammar.of(prods)


def lang(g):
    return enumerate_language(g, "S", MAX_LEN, alphabet=("a",))


LAWS = [
    (lambda x: Opt(x), lambda x: Choice((x, EPSILON))),
    (lambda x: Opt(x), lambda x: Choice((EPSILON, x))),
    (lambda x: Sequence((x, Star(x))), lambda x: Plus(x)),
    (lambda x: Sequence((Star(x), x)), lambda x: Plus(x)),
    (lambda x: Star(Star(x)), lambda x: Star(x)),
    (lambda x: Star(Plus(x)), lambda x: Star(x)),
    (lambda x: Plus(Star(x)), lambda x: Star(x)),
    (lambda x: Plus(Plus(x)), lambda x: Plus(x)),
    (lambda x: Opt(Opt(x)), lambda x: Opt(x)),
    (lambda x: Opt(Star(x)), lambda x: Star(x)),
    (lambda x: Star(Opt(x)), lambda x: Star(x)),
    (lambda x: Opt(Plus(x)), lambda x: Star(x)),
    (lambda x: Plus(Opt(x)), lambda x: Star(x)),
]


def test_massage_preserves_language():
    rng = random.Random(101)
    for _ in range(RUNS):
        make1, make2 = rng.choice(LAWS)
        x = gen_expr(rng, 2)
        e1, e2 = normalize(make1(x)), normalize(make2(x))
        if rng.random() < 0.5:
            e1, e2 = e2, e1
        g = build(rng, e1)
        out = xbgf.massage(g, e1, e2)
        assert lang(out) == lang(g)


def test_deyaccify_preserves_language():
    rng = random.Random(102)
    count = 0
    while count < RUNS:
        x = normalize(gen_expr(rng, 2))
        y = x if rng.random() < 0.4 else normalize(gen_expr(rng, 2))
        if isinstance(y, Epsilon) or isinstance(x, Epsilon):
            continue
        rec = Sequence((Nonterminal("n"), y)) if rng.random() < 0.5 \
            else Sequence((y, Nonterminal("n")))
        base = [Production("n", x), Production("n", normalize(rec))]
        rng.shuffle(base)
        g = build(rng, Nonterminal("n"), extra=base)
        out = xbgf.deyaccify(g, "n")
        assert lang(out) == lang(g)
        count += 1


def test_fold_and_unfold_preserve_language():
    rng = random.Random(103)
    for _ in range(RUNS):
        body = normalize(gen_expr(rng, 2))
        defn = Production("n", body)
        folded = build(rng, body, extra=[defn])
        out = xbgf.fold(folded, "n")
        assert lang(out) == lang(folded)
        unfolded = build(rng, Nonterminal("n"), extra=[defn])
        out = xbgf.unfold(unfolded, "n")
        assert lang(out) == lang(unfolded)


def test_inline_preserves_language():
    rng = random.Random(104)
    for _ in range(RUNS):
        body = normalize(gen_expr(rng, 2))
        g = build(rng, Nonterminal("n"), extra=[Production("n", body)])
        out = xbgf.inline(g, "n")
        assert lang(out) == lang(g)


def test_distribute_preserves_language():
    rng = random.Random(105)
    for _ in range(RUNS):
        g = build(rng, gen_expr(rng, 3))
        out = xbgf.distribute(g, "S")
        assert lang(out) == lang(g)


def test_vertical_and_horizontal_preserve_language():
    rng = random.Random(106)
    for _ in range(RUNS):
        alts = tuple(gen_expr(rng, 2) for _ in range(rng.randint(2, 4)))
        choice = normalize(Choice(alts))   # >= 2 alternatives survive
        g = build(rng, Nonterminal("n"), extra=[Production("n", choice)])
        out = xbgf.vertical(g, "n")
        assert lang(out) == lang(g)
        g2 = build(rng, Nonterminal("n"),
                   extra=[Production("n", normalize(a)) for a in alts])
        out2 = xbgf.horizontal(g2, "n")
        assert lang(out2) == lang(g2)


def test_widen_grows_language():
    rng = random.Random(107)
    for _ in range(RUNS):
        e1 = normalize(gen_expr(rng, 2))
        choices = [Opt(e1), Star(e1), Plus(e1)]
        if isinstance(e1, Plus):
            choices.append(Star(e1.inner))
        if isinstance(e1, Opt):
            choices.append(Star(e1.inner))
        e2 = normalize(rng.choice(choices))
        g = build(rng, e1)
        out = xbgf.widen(g, e1, e2, "S")
        assert lang(g) <= lang(out)


def test_remove_v_shrinks_language():
    rng = random.Random(108)
    for _ in range(RUNS):
        alts = [normalize(gen_expr(rng, 2)) for _ in range(rng.randint(2, 4))]
        seen, defn = set(), []
        for a in alts:
            if a not in seen:
                seen.add(a)
                defn.append(Production("n", a))
        if len(defn) < 2:
            defn.append(Production("n", Terminal("zz")))
        g = build(rng, Nonterminal("n"), extra=defn)
        out = xbgf.remove_v(g, rng.choice(defn))
        assert lang(out) <= lang(g)


def test_project_shrinks_language():
    rng = random.Random(109)
    from gforge.grammar import Marked

    for _ in range(RUNS):
        parts = [gen_expr(rng, 1) for _ in range(rng.randint(2, 4))]
        # marked parts are nullable, so dropping them can only shrink
        k = rng.randrange(len(parts))
        nullable = rng.choice([Opt, Star])
        annotated = list(parts)
        annotated[k] = Marked(nullable(parts[k]))
        concrete = list(parts)
        concrete[k] = nullable(parts[k])
        defn = Production("n", normalize(Sequence(tuple(concrete))))
        g = build(rng, Nonterminal("n"), extra=[defn])
        out = xbgf.project(
            g, Production("n", normalize(Sequence(tuple(annotated)))))
        assert lang(out) <= lang(g)


def test_random_grammars_roundtrip_all_dialects(dialect):
    from conftest import DIALECT_NAMES
    from gforge.extract import extract
    from gforge.render import can_render_faithfully, render_grammar

    rng = random.Random(110)
    terminals = ["a", "b", "|", "<", " x ", "\t", "::="]

    def expr(depth):
        if depth <= 0 or rng.random() < 0.4:
            if rng.random() < 0.6:
                return Terminal(rng.choice(terminals))
            return Nonterminal(rng.choice(["aa", "bb"]))
        kind = rng.randrange(6)
        if kind == 0:
            return Sequence((expr(depth - 1), expr(depth - 1)))
        if kind == 1:
            return Choice((expr(depth - 1), expr(depth - 1)))
        return rng.choice([Opt, Star, Plus])(expr(depth - 1))

    checked = 0
    for _ in range(100):
        g = Grammar.of([Production("top", expr(3)),
                        Production("aa", expr(2)),
                        Production("bb", expr(1))])
        for name in DIALECT_NAMES:
            spec = dialect(name)
            if not can_render_faithfully(g, spec):
                continue
            again = extract(render_grammar(g, spec), spec)
            assert equal(again.grammar, g), (name, render_grammar(g, spec))
            checked += 1
    assert checked > 150


def test_extractor_never_crashes_on_garbage(dialect):
    from gforge.extract import ExtractError, extract

    rng = random.Random(111)
    soup = list('<>[]{}()|?*+-=;:,."word name9 \n\t') + \
        ["::=", "}+", "/*", "*/", "(*", "*)", '"quoted"', "<source"]
    for _ in range(300):
        text = "".join(rng.choice(soup) for _ in range(rng.randint(1, 60)))
        spec = dialect(rng.choice(["mediawiki", "metawiki", "tables",
                                   "noparse", "wsn", "iso-ebnf"]))
        try:
            report = extract(text, spec,
                             tolerate_defining_variants=rng.random() < 0.5)
        except ExtractError:
            continue
        assert report.grammar.productions


@pytest.mark.parametrize("name,text,call,error",
                         atomicity_cases(),
                         ids=[c[0] for c in atomicity_cases()])
def test_operator_atomicity(name, text, call, error):
    from gforge.grammar import parse_grammar

    g = parse_grammar(text)
    snapshot = Grammar.of(g.productions, g.starts)
    with pytest.raises(error):
        call(g)
    assert equal(g, snapshot)


def test_atomicity_catalogue_is_complete():
    assert sorted(c[0] for c in atomicity_cases()) == sorted(xbgf.OPERATORS)
