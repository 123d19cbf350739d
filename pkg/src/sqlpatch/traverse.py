"""Read-only traversal helpers over the query AST."""

from __future__ import annotations

from typing import Iterator, Optional

from .nodes import BoolExpr, ColUnit, Condition, Query, ValUnit


def iter_conditions(expr: Optional[BoolExpr]) -> Iterator[Condition]:
    if expr is None:
        return
    if isinstance(expr, Condition):
        yield expr
        return
    for arg in expr.args:
        yield from iter_conditions(arg)


def iter_own_colunits(query: Query) -> Iterator[ColUnit]:
    """Column units referenced directly by this query (not by subqueries)."""
    for item in query.select.items:
        yield from _valunit_units(item.val)
    for jt in query.from_clause.tables:
        for cond in jt.conds:
            yield from _condition_units(cond)
    for expr in (query.where, query.having):
        for cond in iter_conditions(expr):
            yield from _condition_units(cond)
    for col in query.group_by:
        yield ColUnit(None, False, col)
    for item in query.order_by:
        yield from _valunit_units(item.val)


def _valunit_units(val: ValUnit) -> Iterator[ColUnit]:
    yield val.left
    if val.right is not None:
        yield val.right


def _condition_units(cond: Condition) -> Iterator[ColUnit]:
    yield from _valunit_units(cond.left)
    for operand in (cond.right, cond.right2):
        if isinstance(operand, ColUnit):
            yield operand


def iter_child_queries(query: Query) -> Iterator[Query]:
    """Directly nested queries: condition subqueries, FROM subquery, set-op right."""
    if query.from_clause.subquery is not None:
        yield query.from_clause.subquery
    for expr in (query.where, query.having):
        for cond in iter_conditions(expr):
            for operand in (cond.right, cond.right2):
                if isinstance(operand, Query):
                    yield operand
    if query.set_op is not None:
        yield query.set_op.right


def visible_tables(query: Query) -> set[str]:
    """Real table names a query's columns can resolve against."""
    if query.from_clause.subquery is not None:
        return visible_tables(query.from_clause.subquery)
    return {jt.table for jt in query.from_clause.tables}
