import pytest

from gforge import DATA_DIR
from gforge.notation import parse_notation

DIALECTS = DATA_DIR / "dialects"
SCRIPTS = DATA_DIR / "scripts"
CORPUS = DATA_DIR / "corpus"

DIALECT_NAMES = ("mediawiki", "metawiki", "tables", "noparse", "wsn", "iso-ebnf")

# Corpus sources with the dialect, rewrites table, and tolerance each needs;
# mirrors the bundled pipeline manifest.
CORPUS_SOURCES = {
    "article-title.txt": ("mediawiki", None, False),
    "article.txt": ("mediawiki", "rewrites-eof-word.tsv", False),
    "article-meta.txt": ("metawiki", None, False),
    "noparse.txt": ("noparse", "rewrites-eof-lookahead.tsv", False),
    "links.txt": ("mediawiki", None, False),
    "magic-links.txt": ("mediawiki", None, False),
    "special-block.txt": ("mediawiki", None, False),
    "special-tables.txt": ("tables", None, True),
    "inline-text.txt": ("mediawiki", None, False),
    "inline-text-images.txt": ("tables", None, True),
    "fundamentals.txt": ("mediawiki", None, False),
    "wghtmlentities.txt": ("mediawiki", None, False),
}


@pytest.fixture(scope="session")
def dialect():
    cache = {}

    def load(name):
        if name not in cache:
            cache[name] = parse_notation(
                (DIALECTS / f"{name}.edd").read_text(encoding="utf-8"))
        return cache[name]

    return load


@pytest.fixture(scope="session")
def corpus_text():
    def load(name) -> str:
        return (CORPUS / name).read_text(encoding="utf-8")

    return load


def atomicity_cases():
    """One precondition-violating call per operator, with its error.

    Returns (operator name, grammar text, thunk args, expected error) so the
    whole 20-operator catalogue can be replayed by any suite.
    """
    from gforge import xbgf
    from gforge.grammar import Production, parse_expr

    p = lambda lhs, body: Production(lhs, parse_expr(body))
    return [
        ("renameN", 'a: b\nb: "x"', lambda g: xbgf.rename_n(g, "b", "a"),
         xbgf.TargetNotFresh),
        ("renameT", 'a: "x"', lambda g: xbgf.rename_t(g, "q", "r"),
         xbgf.SourceMissing),
        ("unite", "a: x", lambda g: xbgf.unite(g, "x", "x"), xbgf.SameName),
        ("define", 'a: "x"', lambda g: xbgf.define(g, [p("a", '"y"')]),
         xbgf.AlreadyDefined),
        ("redefine", 'a: "x"', lambda g: xbgf.redefine(g, [p("q", '"y"')]),
         xbgf.NotDefined),
        ("eliminate", 'a: b\nb: "x"', lambda g: xbgf.eliminate(g, "b"),
         xbgf.StillUsed),
        ("inline", 'a: b\nb: "x" b?', lambda g: xbgf.inline(g, "b"),
         xbgf.SelfReference),
        ("fold", 'a: "x"\nn: " "', lambda g: xbgf.fold(g, "n"),
         xbgf.NothingToFold),
        ("unfold", 'a: "x"\nn: " "', lambda g: xbgf.unfold(g, "n"),
         xbgf.NothingToUnfold),
        ("massage", "a: x?\nx: \"x\"",
         lambda g: xbgf.massage(g, parse_expr("x?"), parse_expr("x+")),
         xbgf.NotEquivalent),
        ("deyaccify", 'n: "x"', lambda g: xbgf.deyaccify(g, "n"),
         xbgf.PatternMismatch),
        ("vertical", 'a: "x" "y"', lambda g: xbgf.vertical(g, "a"),
         xbgf.ShapeMismatch),
        ("horizontal", 'a: "x" | "y"', lambda g: xbgf.horizontal(g, "a"),
         xbgf.ShapeMismatch),
        ("distribute", 'a: "x"', lambda g: xbgf.distribute(g, "q"),
         xbgf.NotDefined),
        ("addV", 'a: "x"', lambda g: xbgf.add_v(g, p("a", '"x"')),
         xbgf.Duplicate),
        ("removeV", 'a: "x"', lambda g: xbgf.remove_v(g, p("a", '"x"')),
         xbgf.LastAlternative),
        ("replace", 'a: "x"',
         lambda g: xbgf.replace(g, parse_expr('"q"'), parse_expr('"r"')),
         xbgf.NothingMatched),
        ("widen", "a: x?\nx: \"x\"",
         lambda g: xbgf.widen(g, parse_expr("x?"), parse_expr("x"), "a"),
         xbgf.NotWidening),
        ("project", 'a: "x" i',
         lambda g: xbgf.project(g, p("a", '"y" <i>')), xbgf.NoSuchProduction),
        ("abstractize", 'a: "x" i',
         lambda g: xbgf.abstractize(g, p("a", '"x" <i>')),
         xbgf.MarkedNotConcrete),
    ]
