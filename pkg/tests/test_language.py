"""The brute-force language enumeration oracle."""

import pytest
from hypothesis import given, settings, strategies as st

from gforge.grammar import UndefinedNonterminal, enumerate_language, parse_grammar


def test_optional_definition():
    g = parse_grammar('x: "a"?')
    assert enumerate_language(g, "x", 2) == {"", "a"}


def test_plus_of_star_equals_star():
    # star repetition is useless under a plus
    g1 = parse_grammar('x: ("a"*)+')
    g2 = parse_grammar('x: "a"*')
    assert enumerate_language(g1, "x", 5) == enumerate_language(g2, "x", 5)


def test_yaccified_equals_plus():
    g1 = parse_grammar('x: "a" x?')
    g2 = parse_grammar('x: "a"+')
    want = {"a", "aa", "aaa", "aaaa"}
    assert enumerate_language(g1, "x", 4) == want
    assert enumerate_language(g2, "x", 4) == want


def test_terminals_concatenate_as_text():
    g = parse_grammar('x: "ab" "cd"')
    assert enumerate_language(g, "x", 4) == {"abcd"}
    assert enumerate_language(g, "x", 3) == set()


def test_any_uses_probe_alphabet():
    g = parse_grammar("x: ANY ANY")
    assert enumerate_language(g, "x", 2) == {"aa"}
    assert enumerate_language(g, "x", 2, alphabet=("a", "b")) == {
        "aa", "ab", "ba", "bb"}


def test_marked_is_transparent():
    g = parse_grammar('x: <"a"> "b"')
    assert enumerate_language(g, "x", 2) == {"ab"}


def test_undefined_nonterminal_raises():
    g = parse_grammar('x: "a" y')
    with pytest.raises(UndefinedNonterminal):
        enumerate_language(g, "x", 3)


def test_unreachable_undefined_is_fine():
    g = parse_grammar('x: "a"\nz: y')
    assert enumerate_language(g, "x", 3) == {"a"}


def test_undefined_start_raises():
    g = parse_grammar('x: "a"')
    with pytest.raises(UndefinedNonterminal):
        enumerate_language(g, "nope", 3)


def test_cap_enforced():
    g = parse_grammar('x: "a"')
    with pytest.raises(ValueError):
        enumerate_language(g, "x", 13)


def test_recursive_grammars_terminate():
    g = parse_grammar('x: "(" x ")" | EPSILON')
    assert enumerate_language(g, "x", 4) == {"", "()", "(())"}


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=5))
def test_enumeration_monotone_in_max_len(k):
    g = parse_grammar('x: ("a" | "bc")* "d"?')
    assert enumerate_language(g, "x", k) <= enumerate_language(g, "x", k + 1)
