"""Metrics, top/bottom detection, subgrammar extraction."""

import pytest

from gforge.analysis import RootUndefined, format_rows, metrics, subgrammar
from gforge.grammar import Grammar, equal, parse_grammar


def test_empty_grammar_all_zero():
    m = metrics(Grammar())
    assert m.row() == (0, 0, 0, 0, 0)
    assert m.bottoms == () and m.tops == ()


def test_choice_counts_top_alternatives():
    m = metrics(parse_grammar('x: "a" | "b"'))
    assert (m.term, m.var, m.prod) == (2, 1, 2)
    assert m.tops == ("x",) and m.bottoms == ()


def test_var_counts_used_only_names():
    m = metrics(parse_grammar('x: y "a"\nx: z'))
    assert m.var == 3
    assert m.bottoms == ("y", "z")


def test_terminal_identity_is_exact_text():
    m = metrics(parse_grammar('x: "thumb" "Thumb"'))
    assert m.term == 2


def test_marked_regions_count():
    m = metrics(parse_grammar('x: <y "a">'))
    assert m.var == 2 and m.term == 1
    assert m.bottoms == ("y",)
    assert m.tops == ("x",)


def test_tops_and_bottoms_disjoint():
    m = metrics(parse_grammar("a: b\nb: a c"))
    assert set(m.tops) & set(m.bottoms) == set()
    assert m.bottoms == ("c",) and m.tops == ()


def test_subgrammar_identity():
    g = parse_grammar('x: "a"')
    assert equal(subgrammar(g, "x"),
                 Grammar.of(g.productions, {"x"}))


def test_subgrammar_reachability_closure():
    # five productions, closure worked out by hand: root -> a -> b, c stays
    # out, undefined d becomes a bottom of the result
    g = parse_grammar('root: a d\na: b "x"\nb: "y"\nc: "z"\nc2: c')
    sub = subgrammar(g, "root")
    assert [p.lhs for p in sub.productions] == ["root", "a", "b"]
    assert sub.starts == {"root"}
    m = metrics(sub)
    assert m.bottoms == ("d",)
    assert m.tops == ("root",)


def test_subgrammar_idempotent():
    g = parse_grammar('root: a\na: "x"\nz: "q"')
    once = subgrammar(g, "root")
    assert equal(subgrammar(once, "root"), once)


def test_subgrammar_tops_subset_of_root():
    g = parse_grammar('root: a\na: "x"\nz: root')
    assert set(metrics(subgrammar(g, "root")).tops) <= {"root"}


def test_subgrammar_root_undefined():
    with pytest.raises(RootUndefined):
        subgrammar(parse_grammar('x: "a"'), "nope")


def test_bottoms_and_tops_well_formed_on_corpus(dialect, corpus_text):
    from gforge.extract import extract_document

    g = extract_document(corpus_text("links.txt"), dialect("mediawiki")).grammar
    m = metrics(g)
    defined = {p.lhs for p in g.productions}
    used = g.used()
    for name in m.bottoms:
        assert name in used and name not in defined
    for name in m.tops:
        assert name in defined and name not in used
    assert set(m.bottoms) & set(m.tops) == set()


def test_format_rows_is_aligned():
    rows = [("after extraction", metrics(parse_grammar('x: "a"')))]
    text = format_rows(rows)
    lines = text.splitlines()
    assert lines[0].split() == ["stage", "TERM", "VAR", "PROD", "Bottom", "Top"]
    assert lines[1].split() == ["after", "extraction", "1", "1", "1", "0", "1"]
