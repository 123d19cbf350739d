"""SQL tokenizer and canonical detokenizer.

Non-value tokens come out lowercased; string literals keep their original
quoting and character case so values survive normalization untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import TokenizeError

CLAUSE_KEYWORDS = (
    "select", "from", "where", "group", "having", "order", "limit",
    "intersect", "union", "except",
)
AGGREGATORS = ("max", "min", "count", "sum", "avg")
KEYWORDS = frozenset(
    CLAUSE_KEYWORDS
    + AGGREGATORS
    + ("by", "distinct", "as", "join", "on", "and", "or", "not", "in",
       "like", "between", "asc", "desc")
)

COMPARE_OPS = ("=", "!=", "<=", ">=", "<", ">")
ARITH_OPS = ("+", "-", "*", "/")

_NUMBER_RE = re.compile(r"^\d+(\.\d+)?$")
_WORD_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz"
                        "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.")


@dataclass(frozen=True)
class Token:
    text: str
    kind: str  # keyword | identifier | number-literal | string-literal | operator | punctuation | star


def _classify_word(text: str) -> Token:
    if text in KEYWORDS:
        return Token(text, "keyword")
    if _NUMBER_RE.match(text):
        return Token(text, "number-literal")
    if text == "*" or text.endswith(".*"):
        return Token(text, "star")
    return Token(text, "identifier")


def tokenize(sql: str) -> list[Token]:
    """Split SQL text into tokens, lowercasing everything but string literals."""
    if sql is None or not sql.strip():
        raise TokenizeError("empty input")
    tokens: list[Token] = []
    i, n = 0, len(sql)
    while i < n:
        c = sql[i]
        if c.isspace():
            i += 1
            continue
        if c in "'\"":
            end = sql.find(c, i + 1)
            if end < 0:
                raise TokenizeError(f"unterminated string literal starting at offset {i}")
            tokens.append(Token(sql[i:end + 1], "string-literal"))
            i = end + 1
            continue
        if c in _WORD_CHARS:
            j = i
            while j < n and sql[j] in _WORD_CHARS:
                j += 1
            word = sql[i:j]
            # qualified star: "t.*"
            if word.endswith(".") and j < n and sql[j] == "*":
                word += "*"
                j += 1
            tokens.append(_classify_word(word.lower()))
            i = j
            continue
        if c == "*":
            tokens.append(Token("*", "star"))
            i += 1
            continue
        two = sql[i:i + 2]
        if two in ("<=", ">=", "!=", "<>"):
            tokens.append(Token("!=" if two == "<>" else two, "operator"))
            i += 2
            continue
        if c in "=<>":
            tokens.append(Token(c, "operator"))
            i += 1
            continue
        if c in "+-/":
            tokens.append(Token(c, "operator"))
            i += 1
            continue
        if c in "(),;":
            tokens.append(Token(c, "punctuation"))
            i += 1
            continue
        raise TokenizeError(f"illegal character {c!r} at offset {i}")
    return tokens


def detokenize(texts) -> str:
    """Join token texts with canonical spacing.

    Single spaces everywhere except: nothing after "(", nothing before ")"
    or ",", a space after ",", and no space between an aggregator name and
    its opening parenthesis.
    """
    out: list[str] = []
    prev = None
    for text in texts:
        if prev is None:
            out.append(text)
        elif prev == "(":
            out.append(text)
        elif text in (")", ","):
            out.append(text)
        elif text == "(" and prev in AGGREGATORS:
            out.append(text)
        else:
            out.append(" " + text)
        prev = text
    return "".join(out)
