"""Clause maps: a query decomposed into an ordered clause -> text mapping.

A clause containing nested subqueries becomes a composite entry whose text
carries ``(subqueryN)`` placeholders and whose subqueries are clause maps
of their own. A set operation stores the right-hand query as a nested
clause map under the ``intersect``/``union``/``except`` key.
"""

from __future__ import annotations

import re
from typing import Iterator, Optional, Union

from .errors import MapError
from .nodes import Query
from .render import (
    bool_tokens, from_tokens, group_by_tokens, order_by_tokens, select_tokens,
)
from .tokens import detokenize, tokenize

CLAUSE_KEYS = ("select", "from", "where", "groupBy", "having", "orderBy",
               "limit", "intersect", "union", "except")
CLAUSE_INDEX = {key: i for i, key in enumerate(CLAUSE_KEYS)}
SET_OP_KEYS = ("intersect", "union", "except")

_KEYWORD_TO_KEY = {"select": "select", "from": "from", "where": "where",
                   "group": "groupBy", "having": "having", "order": "orderBy",
                   "limit": "limit"}
_PLACEHOLDER_RE = re.compile(r"\bsubquery\d+\b")


class Composite:
    """A clause whose text references nested subqueries by placeholder id."""

    __slots__ = ("clause", "subqueries")

    def __init__(self, clause: str, subqueries: dict[str, "ClauseMap"]):
        named = _PLACEHOLDER_RE.findall(clause)
        if len(named) != len(set(named)):
            raise MapError(f"placeholder repeated in clause text: {clause!r}")
        expected = [f"subquery{i}" for i in range(len(named))]
        if named != expected:
            raise MapError(
                f"placeholders must be subquery0..subquery{len(named) - 1} "
                f"in order of appearance, got {named}")
        if set(named) != set(subqueries):
            raise MapError(
                f"placeholders {sorted(named)} do not match subquery keys "
                f"{sorted(subqueries)}")
        self.clause = clause
        self.subqueries = {sid: subqueries[sid] for sid in expected}

    def __eq__(self, other):
        return (isinstance(other, Composite) and self.clause == other.clause
                and self.subqueries == other.subqueries)

    def __repr__(self):
        return f"Composite({self.clause!r}, {self.subqueries!r})"

    def copy(self) -> "Composite":
        return Composite(self.clause, {k: v.copy() for k, v in self.subqueries.items()})


Entry = Union[str, Composite, "ClauseMap"]


class ClauseMap:
    """Ordered mapping from clause key to entry, kept in canonical key order."""

    __slots__ = ("_entries",)

    def __init__(self, entries=None):
        self._entries: dict[str, Entry] = {}
        if entries:
            pairs = entries.items() if isinstance(entries, dict) else entries
            for key, value in pairs:
                self.set(key, value)

    def set(self, key: str, entry: Entry) -> None:
        if key not in CLAUSE_INDEX:
            raise MapError(f"unknown clause key {key!r}")
        if key in SET_OP_KEYS:
            if not isinstance(entry, ClauseMap):
                raise MapError(f"value of {key!r} must be a nested clause map")
        elif not isinstance(entry, (str, Composite)):
            raise MapError(f"value of {key!r} must be clause text or a composite entry")
        self._entries[key] = entry
        self._entries = {k: self._entries[k]
                         for k in sorted(self._entries, key=CLAUSE_INDEX.get)}

    def pop(self, key: str) -> Entry:
        if key not in self._entries:
            raise MapError(f"clause key {key!r} not present")
        return self._entries.pop(key)

    def get(self, key: str) -> Optional[Entry]:
        return self._entries.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def keys(self) -> list[str]:
        return list(self._entries)

    def items(self) -> Iterator[tuple[str, Entry]]:
        return iter(list(self._entries.items()))

    def __eq__(self, other):
        return isinstance(other, ClauseMap) and self._entries == other._entries

    def __repr__(self):
        return f"ClauseMap({self._entries!r})"

    def copy(self) -> "ClauseMap":
        out = ClauseMap()
        for key, entry in self._entries.items():
            out._entries[key] = entry.copy() if isinstance(entry, (Composite, ClauseMap)) else entry
        return out


# ---------------------------------------------------------------------------
# AST -> clause map


def decompose(query: Query) -> ClauseMap:
    """Split a normalized query into its clause map, depth first: subqueries
    become independent clause maps referenced by placeholders."""
    cm = ClauseMap()
    cm.set("select", detokenize(select_tokens(query.select)))
    cm.set("from", _entry(lambda c: from_tokens(query.from_clause, c)))
    if query.where is not None:
        cm.set("where", _entry(lambda c: ["where"] + bool_tokens(query.where, c)))
    if query.group_by:
        cm.set("groupBy", detokenize(group_by_tokens(query.group_by)))
    if query.having is not None:
        cm.set("having", _entry(lambda c: ["having"] + bool_tokens(query.having, c)))
    if query.order_by:
        cm.set("orderBy", detokenize(order_by_tokens(query.order_by)))
    if query.limit is not None:
        cm.set("limit", f"limit {query.limit}")
    if query.set_op is not None:
        cm.set(query.set_op.kind, decompose(query.set_op.right))
    return cm


def _entry(tokens_fn) -> Entry:
    subs: list[ClauseMap] = []

    def collect(subquery: Query) -> list[str]:
        subs.append(decompose(subquery))
        return [f"subquery{len(subs) - 1}"]

    text = detokenize(tokens_fn(collect))
    if subs:
        return Composite(text, {f"subquery{i}": m for i, m in enumerate(subs)})
    return text


# ---------------------------------------------------------------------------
# clause map -> SQL


def to_sql(cm: ClauseMap) -> str:
    """Reassemble the SQL text: clause texts in canonical order, placeholders
    re-inlined as parenthesized subqueries, set operations appended."""
    if "select" not in cm or "from" not in cm:
        raise MapError("clause map must contain both select and from")
    parts = []
    for key, entry in cm.items():
        if key in SET_OP_KEYS:
            parts.append(key + " " + to_sql(entry))
        elif isinstance(entry, Composite):
            parts.append(_inline_placeholders(entry))
        else:
            parts.append(entry)
    return " ".join(parts)


def entry_sql(key: str, entry: Entry) -> str:
    """SQL text of one entry: composite placeholders inlined; a set-op entry
    becomes the operator keyword followed by the right-hand query."""
    if isinstance(entry, ClauseMap):
        return key + " " + to_sql(entry)
    if isinstance(entry, Composite):
        return _inline_placeholders(entry)
    return entry


def entry_value_sql(entry: Entry) -> str:
    """SQL text of an entry value alone: like :func:`entry_sql` but a set-op
    entry yields just the right-hand query without the operator keyword.
    This is the string form edit-program assignments carry."""
    if isinstance(entry, ClauseMap):
        return to_sql(entry)
    if isinstance(entry, Composite):
        return _inline_placeholders(entry)
    return entry


def _inline_placeholders(entry: Composite) -> str:
    def repl(match):
        sub = entry.subqueries.get(match.group(0))
        if sub is None:
            raise MapError(f"dangling placeholder {match.group(0)!r}")
        return to_sql(sub)

    return _PLACEHOLDER_RE.sub(repl, entry.clause)


# ---------------------------------------------------------------------------
# SQL text -> clause map (lexical; for already-canonical text)


def sql_to_clause_map(sql: str) -> ClauseMap:
    """Build a clause map from canonical SQL text without a schema, by
    splitting at top-level clause keywords and extracting ``(select ...)``
    spans. On render output this reproduces :func:`decompose` exactly."""
    return _tokens_to_map([t.text for t in tokenize(sql)])


def entry_from_clause_text(key: str, text: str) -> Entry:
    """Build one entry from its SQL text (used when applying edits whose
    payloads are plain clause text)."""
    if key not in CLAUSE_INDEX:
        raise MapError(f"unknown clause key {key!r}")
    tokens = [t.text for t in tokenize(text)]
    if key in SET_OP_KEYS:
        return _tokens_to_map(tokens)
    lead = {v: k for k, v in _KEYWORD_TO_KEY.items()}[key]
    if not tokens or tokens[0] != lead:
        raise MapError(f"clause text for {key!r} must start with {lead!r}: {text!r}")
    return _make_entry(tokens)


def split_clause_texts(text: str) -> list[tuple[str, str]]:
    """Split a run of clause texts (or a whole query) into (key, text) pairs
    at top-level clause keywords."""
    tokens = [t.text for t in tokenize(text)]
    return [(key, detokenize(seg)) for key, seg in _split_segments(tokens)]


def _split_segments(tokens: list[str]) -> list[tuple[str, list[str]]]:
    segments: list[tuple[str, list[str]]] = []
    key = None
    cur: list[str] = []
    depth = 0
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise MapError("unbalanced parenthesis in clause text")
        if depth == 0 and tok in SET_OP_KEYS:
            if key is not None:
                segments.append((key, cur))
            segments.append((tok, tokens[i + 1:]))
            return segments
        if depth == 0 and tok in _KEYWORD_TO_KEY:
            if key is not None:
                segments.append((key, cur))
            key = _KEYWORD_TO_KEY[tok]
            cur = [tok]
        else:
            if key is None:
                raise MapError(f"clause text must start with a clause keyword, got {tok!r}")
            cur.append(tok)
        i += 1
    if key is not None:
        segments.append((key, cur))
    return segments


def _tokens_to_map(tokens: list[str]) -> ClauseMap:
    cm = ClauseMap()
    for key, seg in _split_segments(tokens):
        if key in SET_OP_KEYS:
            cm.set(key, _tokens_to_map(seg))
        else:
            if key in cm:
                raise MapError(f"clause {key!r} appears twice")
            cm.set(key, _make_entry(seg))
    return cm


def _make_entry(tokens: list[str]) -> Entry:
    out: list[str] = []
    subs: list[list[str]] = []
    i = 0
    while i < len(tokens):
        if tokens[i] == "(" and i + 1 < len(tokens) and tokens[i + 1] == "select":
            j = _matching_paren(tokens, i)
            subs.append(tokens[i + 1:j])
            out += ["(", f"subquery{len(subs) - 1}", ")"]
            i = j + 1
        else:
            out.append(tokens[i])
            i += 1
    if not subs:
        return detokenize(out)
    return Composite(detokenize(out),
                     {f"subquery{k}": _tokens_to_map(body) for k, body in enumerate(subs)})


def _matching_paren(tokens: list[str], start: int) -> int:
    depth = 0
    for i in range(start, len(tokens)):
        if tokens[i] == "(":
            depth += 1
        elif tokens[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    raise MapError("unbalanced parenthesis in clause text")
