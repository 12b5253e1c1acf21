"""Named example functions shared by the command line and the test suite."""

from __future__ import annotations

from .expr import MeroExpr, parse

CORPUS = {
    "expz": "exp(z)",
    "tanz": "tan(z)",
    "zsq": "z^2",
    "invz": "1/z",
    "fatou": "z + 1 + exp(-z)",
    "lacunary2": "lacunary(2)",
    "canprod4": "canprod(4)",
}


def corpus_names() -> tuple:
    return tuple(sorted(CORPUS))


def corpus_function(name: str) -> MeroExpr:
    """Parsed expression for a corpus entry; KeyError lists valid names."""
    try:
        text = CORPUS[name]
    except KeyError:
        raise KeyError(
            "unknown corpus entry %r; choose from %s" % (name, ", ".join(corpus_names()))
        ) from None
    return parse(text)
