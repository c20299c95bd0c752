"""EBNF dialect definitions.

A dialect maps metasymbol roles (defining symbol, brackets, separators,
comments, ...) to concrete literals and carries a few tolerance flags. The
extractor and the dialect pretty-printer are both driven by these specs.

Config format: UTF-8 lines of ``role = "literal"`` or ``flag = true|false``,
``#`` starting a comment line. Literals use the same backslash escapes as
pp-notation terminals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ROLES = (
    "start-grammar", "end-grammar",
    "start-comment", "end-comment",
    "defining", "definition-separator", "terminator", "concatenate",
    "start-nonterminal", "end-nonterminal",
    "start-terminal", "end-terminal",
    "start-option", "end-option",
    "start-group", "end-group",
    "start-star", "end-star",
    "start-plus", "end-plus",
    "start-special", "end-special",
    "exception",
    "postfix-star", "postfix-plus", "postfix-option",
)

FLAGS = ("ignore-extra-spaces", "ignore-extra-newlines", "newline-terminates")

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "r": "\r", "t": "\t"}
_UNESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


class NotationError(Exception):
    """Base class for dialect-definition errors."""


class MissingDefiningSymbol(NotationError): pass
class DuplicateRole(NotationError): pass
class UnknownRoleName(NotationError): pass


@dataclass(frozen=True)
class NotationSpec:
    """A parsed dialect definition."""

    metasymbols: dict[str, str] = field(default_factory=dict)
    ignore_extra_spaces: bool = False
    ignore_extra_newlines: bool = False
    newline_terminates: bool = False

    def __post_init__(self):
        if "defining" not in self.metasymbols:
            raise MissingDefiningSymbol("dialect has no defining symbol")
        if "terminator" not in self.metasymbols and not self.newline_terminates:
            raise NotationError(
                "dialect needs a terminator symbol or newline-terminates")
        for role, literal in self.metasymbols.items():
            if not literal:
                raise NotationError(f"empty literal for role {role!r}")

    def get(self, role: str) -> str | None:
        return self.metasymbols.get(role)

    def has(self, *roles: str) -> bool:
        return all(r in self.metasymbols for r in roles)


def _unquote(value: str, lineno: int) -> str:
    value = value.strip()
    if len(value) < 2 or not value.startswith('"') or not value.endswith('"'):
        raise NotationError(f"line {lineno}: literal must be double-quoted")
    out = []
    i = 1
    while i < len(value) - 1:
        c = value[i]
        if c == "\\":
            i += 1
            if i >= len(value) - 1 or value[i] not in _ESCAPES:
                raise NotationError(f"line {lineno}: bad escape in literal")
            out.append(_ESCAPES[value[i]])
        else:
            out.append(c)
        i += 1
    return "".join(out)


def parse_notation(text: str) -> NotationSpec:
    metasymbols: dict[str, str] = {}
    flags = {f: False for f in FLAGS}
    seen_flags: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise NotationError(f"line {lineno}: expected 'name = value'")
        key = key.strip()
        value = value.strip()
        if key in FLAGS:
            if key in seen_flags:
                raise DuplicateRole(f"line {lineno}: flag {key!r} set twice")
            seen_flags.add(key)
            if value not in ("true", "false"):
                raise NotationError(f"line {lineno}: flag {key!r} must be true or false")
            flags[key] = value == "true"
            continue
        if key not in ROLES:
            raise UnknownRoleName(f"line {lineno}: unknown role {key!r}")
        if key in metasymbols:
            raise DuplicateRole(f"line {lineno}: role {key!r} defined twice")
        metasymbols[key] = _unquote(value, lineno)
    if "defining" not in metasymbols:
        raise MissingDefiningSymbol("dialect has no defining symbol")
    return NotationSpec(
        metasymbols=metasymbols,
        ignore_extra_spaces=flags["ignore-extra-spaces"],
        ignore_extra_newlines=flags["ignore-extra-newlines"],
        newline_terminates=flags["newline-terminates"],
    )


def print_notation(spec: NotationSpec) -> str:
    """Trivial inverse serializer for :func:`parse_notation`."""
    lines = []
    for role in ROLES:
        if role in spec.metasymbols:
            literal = "".join(_UNESCAPES.get(c, c) for c in spec.metasymbols[role])
            lines.append(f'{role} = "{literal}"')
    for flag, value in (
        ("ignore-extra-spaces", spec.ignore_extra_spaces),
        ("ignore-extra-newlines", spec.ignore_extra_newlines),
        ("newline-terminates", spec.newline_terminates),
    ):
        if value:
            lines.append(f"{flag} = true")
    return "\n".join(lines) + "\n"


def _construct(role: str) -> str:
    for prefix in ("start-", "end-"):
        if role.startswith(prefix):
            return role[len(prefix):]
    return role


def validate_roundtrip(spec: NotationSpec) -> list[str]:
    """Warnings for ambiguities that make printing-then-reparsing lossy.

    The lossy cases are distinct constructs sharing one literal (the
    extractor then has to disambiguate from context); matched start/end
    delimiters of the same construct are conventional and not warned about.
    """
    warnings = []
    roles = sorted(spec.metasymbols)
    for i, a in enumerate(roles):
        for b in roles[i + 1:]:
            if spec.metasymbols[a] != spec.metasymbols[b]:
                continue
            if _construct(a) == _construct(b):
                continue
            warnings.append(
                f"{a} and {b} share literal {spec.metasymbols[a]!r}")
    return warnings
