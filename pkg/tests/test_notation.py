"""Dialect-definition parsing and validation."""

import pytest

from conftest import DIALECT_NAMES
from gforge.notation import (
    DuplicateRole,
    MissingDefiningSymbol,
    NotationError,
    UnknownRoleName,
    parse_notation,
    print_notation,
    validate_roundtrip,
)


def test_main_dialect_has_18_roles(dialect):
    spec = dialect("mediawiki")
    assert len(spec.metasymbols) == 18
    assert spec.metasymbols["defining"] == "::="
    assert spec.metasymbols["start-plus"] == "{"
    assert spec.metasymbols["end-plus"] == "}+"
    assert spec.ignore_extra_spaces and spec.ignore_extra_newlines


def test_minimal_spec():
    spec = parse_notation('defining = "::="\nnewline-terminates = true\n')
    assert spec.metasymbols == {"defining": "::="}
    assert spec.newline_terminates
    assert not spec.ignore_extra_spaces


def test_duplicate_role_names_line():
    with pytest.raises(DuplicateRole) as exc:
        parse_notation('defining = "::="\ndefining = "="\nnewline-terminates = true\n')
    assert "line 2" in str(exc.value)


def test_missing_defining_symbol():
    with pytest.raises(MissingDefiningSymbol):
        parse_notation('terminator = ";"\n')


def test_unknown_role_names_line():
    with pytest.raises(UnknownRoleName) as exc:
        parse_notation('defining = "="\nfancy-bracket = "!"\n')
    assert "line 2" in str(exc.value)


def test_terminator_or_newline_required():
    with pytest.raises(NotationError):
        parse_notation('defining = "="\n')


def test_print_parse_identity_on_bundled(dialect):
    for name in DIALECT_NAMES:
        spec = dialect(name)
        assert parse_notation(print_notation(spec)) == spec


def test_shared_repetition_brackets_warn(dialect):
    warnings = validate_roundtrip(dialect("mediawiki"))
    assert any("start-star" in w and "start-plus" in w and "'{'" in w
               for w in warnings)


def test_iso_dialect_has_no_ambiguity_warnings(dialect):
    spec = dialect("iso-ebnf")
    # derived check: no two distinct constructs share a literal
    literals = {}
    clashes = []
    for role, lit in spec.metasymbols.items():
        base = role.removeprefix("start-").removeprefix("end-")
        for other_role, other_base in literals.get(lit, ()):
            if other_base != base:
                clashes.append((role, other_role))
        literals.setdefault(lit, []).append((role, base))
    assert clashes == []
    assert validate_roundtrip(spec) == []


def test_constructed_clash_warns():
    spec = parse_notation(
        'defining = "::="\nend-nonterminal = "::="\n'
        'start-nonterminal = "<"\nnewline-terminates = true\n')
    warnings = validate_roundtrip(spec)
    assert any("defining" in w and "end-nonterminal" in w for w in warnings)


def test_matched_terminal_delimiters_do_not_warn():
    spec = parse_notation(
        'defining = "="\nstart-terminal = "\\""\nend-terminal = "\\""\n'
        'newline-terminates = true\n')
    assert validate_roundtrip(spec) == []


def test_literal_escapes():
    spec = parse_notation('defining = "\\t\\\\"\nnewline-terminates = true\n')
    assert spec.metasymbols["defining"] == "\t\\"


def test_flag_set_twice_is_duplicate():
    with pytest.raises(DuplicateRole):
        parse_notation('defining = "="\nnewline-terminates = true\n'
                       "newline-terminates = false\n")


def test_bad_literal_forms():
    with pytest.raises(NotationError):
        parse_notation('defining = ::=\nnewline-terminates = true\n')
    with pytest.raises(NotationError):
        parse_notation('defining = "\\q"\nnewline-terminates = true\n')
    with pytest.raises(NotationError):
        parse_notation('defining = ""\nnewline-terminates = true\n')
    with pytest.raises(NotationError):
        parse_notation('defining "="\n')
