"""Query normalization: alias resolution, column qualification, lowercasing.

Aliases for tables that occur once in FROM are dropped and their references
rewritten to the real table name; aliases on repeated tables (self-joins)
are kept, since dropping them would lose which occurrence a column means.
The pass is idempotent.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional

from .errors import NormalizeError
from .nodes import (
    BoolExpr, BoolOp, ColumnRef, ColUnit, Condition, FromClause, JoinedTable,
    Literal, OrderItem, Query, Select, SelectItem, SetOp, ValueList, ValUnit,
)
from .schema import SchemaInfo
from .traverse import visible_tables


def normalize(query: Query, schema: SchemaInfo) -> Query:
    fc = query.from_clause
    if fc.subquery is not None:
        sub = normalize(fc.subquery, schema)
        scope = _SubqueryScope(sub, fc.subquery_alias, schema)
        new_from = FromClause((), sub, None)
    else:
        scope = _TableScope(fc.tables, schema)
        new_from = FromClause(
            tuple(
                JoinedTable(
                    jt.table.lower(),
                    scope.kept_alias(jt),
                    tuple(_norm_cond(c, scope, schema) for c in jt.conds),
                )
                for jt in fc.tables
            ),
            None,
        )

    select = Select(
        query.select.distinct,
        tuple(
            SelectItem(item.agg, item.distinct, _norm_val(item.val, scope))
            for item in query.select.items
        ),
    )
    where = _norm_bool(query.where, scope, schema)
    group_by = tuple(scope.resolve(c) for c in query.group_by)
    having = _norm_bool(query.having, scope, schema)
    order_by = tuple(OrderItem(_norm_val(i.val, scope), i.direction) for i in query.order_by)
    set_op = None
    if query.set_op is not None:
        set_op = SetOp(query.set_op.kind, normalize(query.set_op.right, schema))
    return Query(select, new_from, where, group_by, having, order_by, query.limit, set_op)


class _TableScope:
    def __init__(self, tables: tuple[JoinedTable, ...], schema: SchemaInfo):
        self.schema = schema
        self.counts = Counter(jt.table.lower() for jt in tables)
        self.alias_to_table: dict[str, str] = {}
        self.kept: set[str] = set()
        for jt in tables:
            table = jt.table.lower()
            if jt.alias:
                alias = jt.alias.lower()
                if alias in self.alias_to_table:
                    raise NormalizeError(f"alias {alias!r} declared more than once")
                self.alias_to_table[alias] = table
                if self.counts[table] > 1:
                    self.kept.add(alias)
        self.tables = [jt.table.lower() for jt in tables]

    def kept_alias(self, jt: JoinedTable) -> Optional[str]:
        if jt.alias and jt.alias.lower() in self.kept:
            return jt.alias.lower()
        return None

    def resolve(self, col: ColumnRef) -> ColumnRef:
        column = col.column.lower()
        if col.table:
            qual = col.table.lower()
            if qual in self.alias_to_table and qual not in self.kept:
                qual = self.alias_to_table[qual]
            return ColumnRef(qual, column)
        if column == "*":
            return ColumnRef(None, "*")
        owners = [t for t in dict.fromkeys(self.tables)
                  if self.schema.has_column(t, column)]
        if len(owners) > 1:
            raise NormalizeError(
                f"column {column!r} is ambiguous across tables {owners}")
        if not owners:
            raise NormalizeError(f"column {column!r} not found in FROM tables")
        owner = owners[0]
        if self.counts[owner] > 1:
            raise NormalizeError(
                f"column {column!r} of repeated table {owner!r} must be alias-qualified")
        return ColumnRef(owner, column)


class _SubqueryScope:
    """Resolution against a FROM (subquery) source: columns belong to the
    tables visible inside the subquery; the subquery alias is dropped."""

    def __init__(self, sub: Query, alias: Optional[str], schema: SchemaInfo):
        self.schema = schema
        self.alias = alias.lower() if alias else None
        self.visible = sorted(visible_tables(sub))

    def resolve(self, col: ColumnRef) -> ColumnRef:
        column = col.column.lower()
        if column == "*" and not col.table:
            return ColumnRef(None, "*")
        if col.table and col.table.lower() != self.alias:
            return ColumnRef(col.table.lower(), column)
        owners = [t for t in self.visible if self.schema.has_column(t, column)]
        if len(owners) > 1:
            raise NormalizeError(
                f"column {column!r} is ambiguous across tables {owners}")
        if not owners:
            raise NormalizeError(f"column {column!r} not found in subquery scope")
        return ColumnRef(owners[0], column)


def _norm_val(val: ValUnit, scope) -> ValUnit:
    left = _norm_unit(val.left, scope)
    right = _norm_unit(val.right, scope) if val.right is not None else None
    return ValUnit(val.op, left, right)


def _norm_unit(unit: ColUnit, scope) -> ColUnit:
    return ColUnit(unit.agg, unit.distinct, scope.resolve(unit.col))


def _norm_bool(expr: Optional[BoolExpr], scope, schema: SchemaInfo) -> Optional[BoolExpr]:
    if expr is None:
        return None
    if isinstance(expr, BoolOp):
        return BoolOp(expr.op, tuple(_norm_bool(a, scope, schema) for a in expr.args))
    return _norm_cond(expr, scope, schema)


def _norm_cond(cond: Condition, scope, schema: SchemaInfo) -> Condition:
    return Condition(
        _norm_val(cond.left, scope),
        cond.op,
        _norm_operand(cond.right, scope, schema),
        _norm_operand(cond.right2, scope, schema) if cond.right2 is not None else None,
    )


def _norm_operand(operand, scope, schema: SchemaInfo):
    if isinstance(operand, Query):
        return normalize(operand, schema)
    if isinstance(operand, ColUnit):
        return _norm_unit(operand, scope)
    if isinstance(operand, (Literal, ValueList)):
        return operand
    raise NormalizeError(f"unsupported operand {operand!r}")
