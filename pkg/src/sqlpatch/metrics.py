"""Evaluation: exact set match, execution match, and McNemar's test.

Exact set match compares the components of two normalized queries under
set semantics (select items, FROM tables plus join conditions, top-level
AND conjuncts, group-by columns) while keeping ORDER BY an ordered list
and literal values exact. It is a per-query boolean, not a partial score.
"""

from __future__ import annotations

import math
import sqlite3
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol

from .errors import BackendUnavailable, ExecutionError
from .nodes import (
    BoolOp, ColUnit, Condition, Literal, Query, ValueList, conjuncts,
)


@dataclass(frozen=True)
class EvalOutcome:
    em: bool
    ex: Optional[bool] = None  # present iff an execution backend was supplied


# ---------------------------------------------------------------------------
# Exact set match


def exact_set_match(pred: Query, gold: Query) -> bool:
    return query_canon(pred) == query_canon(gold)


def query_canon(q: Query):
    """Hashable canonical form; two queries are an exact set match iff their
    canonical forms are equal."""
    select = (q.select.distinct,
              frozenset(_item_canon(item) for item in q.select.items))
    fc = q.from_clause
    if fc.subquery is not None:
        from_canon = ("subquery", query_canon(fc.subquery))
    else:
        tables = tuple(sorted(jt.table for jt in fc.tables))
        conds = frozenset(_join_cond_canon(c) for jt in fc.tables for c in jt.conds)
        from_canon = ("tables", tables, conds)
    where = _bool_canon(q.where)
    group = frozenset((c.table, c.column) for c in q.group_by)
    having = _bool_canon(q.having)
    order = tuple((_val_canon(i.val), i.direction) for i in q.order_by)
    set_op = (q.set_op.kind, query_canon(q.set_op.right)) if q.set_op else None
    return ("query", select, from_canon, where, group, having, order, q.limit, set_op)


def _item_canon(item):
    return (item.agg, item.distinct, _val_canon(item.val))


def _val_canon(val):
    return (val.op, _unit_canon(val.left),
            _unit_canon(val.right) if val.right is not None else None)


def _unit_canon(unit: ColUnit):
    return (unit.agg, unit.distinct, unit.col.table, unit.col.column)


def _bool_canon(expr):
    """Top-level AND conjuncts as a set; OR subtrees compared structurally."""
    if expr is None:
        return frozenset()
    return frozenset(_conjunct_canon(c) for c in conjuncts(expr))


def _conjunct_canon(expr):
    if isinstance(expr, BoolOp):  # an OR subtree: ordered, structural
        return ("or",) + tuple(_conjunct_canon(a) for a in expr.args)
    return _cond_canon(expr)


def _cond_canon(cond: Condition):
    return (cond.op, _val_canon(cond.left), _operand_canon(cond.right),
            _operand_canon(cond.right2) if cond.right2 is not None else None)


def _join_cond_canon(cond: Condition):
    # join conditions are unordered equalities: sort the two column sides
    if cond.op == "=" and isinstance(cond.right, ColUnit) and cond.left.op is None:
        left = _unit_canon(cond.left.left)
        right = _unit_canon(cond.right)
        first, second = sorted((left, right), key=repr)
        return ("=", ("col", first), ("col", second))
    return _cond_canon(cond)


def _operand_canon(operand):
    if isinstance(operand, Literal):
        return ("lit", operand.kind, operand.value())
    if isinstance(operand, ColUnit):
        return ("col", _unit_canon(operand))
    if isinstance(operand, ValueList):
        return ("list", tuple(("lit", v.kind, v.value()) for v in operand.items))
    if isinstance(operand, Query):
        return query_canon(operand)
    raise TypeError(f"cannot canonicalize operand {operand!r}")


# ---------------------------------------------------------------------------
# Execution match


class ExecBackend(Protocol):
    def execute(self, sql: str, db_id: str) -> list[tuple]:
        """Run a read-only query and return its rows in result order.

        Raises ExecutionError for queries the database rejects and
        BackendUnavailable when the database itself cannot be opened.
        """
        ...


class SqliteBackend:
    """Reads databases laid out as ``<db_dir>/<db_id>/<db_id>.sqlite``."""

    def __init__(self, db_dir):
        self.db_dir = Path(db_dir)

    def _db_path(self, db_id: str) -> Path:
        base = self.db_dir / db_id
        for ext in (".sqlite", ".db", ".sqlite3"):
            candidate = base / f"{db_id}{ext}"
            if candidate.exists():
                return candidate
        if base.is_dir():
            found = sorted(base.glob(f"{db_id}.*"))
            if found:
                return found[0]
        raise BackendUnavailable(f"no database file for {db_id!r} under {self.db_dir}")

    def execute(self, sql: str, db_id: str) -> list[tuple]:
        path = self._db_path(db_id)
        try:
            conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
        except sqlite3.Error as exc:
            raise BackendUnavailable(f"cannot open {path}: {exc}") from None
        try:
            cursor = conn.execute(sql)
            return [tuple(row) for row in cursor.fetchall()]
        except sqlite3.Error as exc:
            raise ExecutionError(str(exc)) from None
        finally:
            conn.close()


def execution_match(pred: str, gold: str, db_id: str, backend: ExecBackend,
                    gold_ordered: Optional[bool] = None) -> bool:
    """True iff both queries run and produce the same rows: compared as
    multisets, or as ordered sequences when the gold query orders its
    result. A query that errors yields False; an unavailable backend
    raises instead of producing a verdict."""
    if gold_ordered is None:
        gold_ordered = _has_top_level_order(gold)
    try:
        gold_rows = backend.execute(gold, db_id)
    except ExecutionError:
        return False
    try:
        pred_rows = backend.execute(pred, db_id)
    except ExecutionError:
        return False
    a = [_norm_row(r) for r in pred_rows]
    b = [_norm_row(r) for r in gold_rows]
    if gold_ordered:
        return a == b
    return Counter(a) == Counter(b)


def _norm_row(row: tuple) -> tuple:
    return tuple(float(v) if isinstance(v, (int, float)) and not isinstance(v, bool)
                 else v for v in row)


def _has_top_level_order(sql: str) -> bool:
    from .tokens import tokenize

    depth = 0
    for tok in tokenize(sql):
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        elif depth == 0 and tok.text == "order":
            return True
    return False


# ---------------------------------------------------------------------------
# McNemar's test


@dataclass(frozen=True)
class McNemarResult:
    b: int  # first system correct, second wrong
    c: int  # first system wrong, second correct
    p: float
    degenerate: bool = False  # no discordant pairs at all


def mcnemar(outcomes) -> McNemarResult:
    """Exact two-sided binomial McNemar test over paired boolean outcomes."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("outcomes must be non-empty")
    b = sum(1 for a_ok, b_ok in outcomes if a_ok and not b_ok)
    c = sum(1 for a_ok, b_ok in outcomes if not a_ok and b_ok)
    return mcnemar_counts(b, c)


def mcnemar_counts(b: int, c: int) -> McNemarResult:
    n = b + c
    if n == 0:
        return McNemarResult(0, 0, 1.0, degenerate=True)
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    p = min(1.0, 2.0 * tail / 2.0 ** n)
    return McNemarResult(b, c, p)
