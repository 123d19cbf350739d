"""Deterministic text rendering of normalized query ASTs.

One canonical form: lowercase keywords and identifiers, single spaces,
", " after commas, spaces around comparison operators, no space inside
function parentheses, "table.column" with no spaces, ascending direction
left implicit, explicit "desc".

The per-clause token builders are shared with clause decomposition, which
swaps in placeholder tokens for nested subqueries via the ``sub`` callback.
"""

from __future__ import annotations

from typing import Callable, Optional

from .nodes import (
    BoolExpr, ColUnit, Condition, FromClause, Literal, OrderItem,
    Query, Select, SelectItem, ValueList, ValUnit,
)
from .tokens import detokenize

SubHandler = Callable[[Query], list[str]]


def _inline(query: Query) -> list[str]:
    return render_tokens(query)


def render_tokens(query: Query, sub: Optional[SubHandler] = None) -> list[str]:
    sub = sub or _inline
    out = select_tokens(query.select)
    out += from_tokens(query.from_clause, sub)
    if query.where is not None:
        out += ["where"] + bool_tokens(query.where, sub)
    if query.group_by:
        out += group_by_tokens(query.group_by)
    if query.having is not None:
        out += ["having"] + bool_tokens(query.having, sub)
    if query.order_by:
        out += order_by_tokens(query.order_by)
    if query.limit is not None:
        out += ["limit", str(query.limit)]
    if query.set_op is not None:
        out += [query.set_op.kind] + render_tokens(query.set_op.right, sub)
    return out


def render(query: Query) -> str:
    """Canonical text of a normalized query."""
    return detokenize(render_tokens(query))


def select_tokens(select: Select) -> list[str]:
    out = ["select"]
    if select.distinct:
        out.append("distinct")
    for i, item in enumerate(select.items):
        if i:
            out.append(",")
        out += item_tokens(item)
    return out


def item_tokens(item: SelectItem) -> list[str]:
    if item.agg is not None:
        out = [item.agg, "("]
        if item.distinct:
            out.append("distinct")
        out += val_tokens(item.val)
        out.append(")")
        return out
    return val_tokens(item.val)


def val_tokens(val: ValUnit) -> list[str]:
    out = unit_tokens(val.left)
    if val.op is not None:
        out.append(val.op)
        out += unit_tokens(val.right)
    return out


def unit_tokens(unit: ColUnit) -> list[str]:
    if unit.agg is not None:
        out = [unit.agg, "("]
        if unit.distinct:
            out.append("distinct")
        out.append(unit.col.text())
        out.append(")")
        return out
    return [unit.col.text()]


def from_tokens(fc: FromClause, sub: SubHandler) -> list[str]:
    if fc.subquery is not None:
        out = ["from", "("] + sub(fc.subquery) + [")"]
        if fc.subquery_alias:
            out += ["as", fc.subquery_alias]
        return out
    out = ["from"]
    for i, jt in enumerate(fc.tables):
        if i:
            out.append("join")
        out.append(jt.table)
        if jt.alias:
            out += ["as", jt.alias]
        if jt.conds:
            out.append("on")
            for j, cond in enumerate(jt.conds):
                if j:
                    out.append("and")
                out += cond_tokens(cond, sub)
    return out


def bool_tokens(expr: BoolExpr, sub: SubHandler) -> list[str]:
    if isinstance(expr, Condition):
        return cond_tokens(expr, sub)
    joiner = expr.op
    out: list[str] = []
    for i, arg in enumerate(expr.args):
        if i:
            out.append(joiner)
        out += bool_tokens(arg, sub)
    return out


def cond_tokens(cond: Condition, sub: SubHandler) -> list[str]:
    out = val_tokens(cond.left)
    out += cond.op.split(" ")  # "not in" / "not like" become two tokens
    out += operand_tokens(cond.right, sub)
    if cond.op == "between":
        out.append("and")
        out += operand_tokens(cond.right2, sub)
    return out


def operand_tokens(operand, sub: SubHandler) -> list[str]:
    if isinstance(operand, Literal):
        return [operand.text]
    if isinstance(operand, ColUnit):
        return unit_tokens(operand)
    if isinstance(operand, ValueList):
        out = ["("]
        for i, lit in enumerate(operand.items):
            if i:
                out.append(",")
            out.append(lit.text)
        out.append(")")
        return out
    if isinstance(operand, Query):
        return ["("] + sub(operand) + [")"]
    raise TypeError(f"cannot render operand {operand!r}")


def group_by_tokens(group_by) -> list[str]:
    out = ["group", "by"]
    for i, col in enumerate(group_by):
        if i:
            out.append(",")
        out.append(col.text())
    return out


def order_by_tokens(order_by: tuple[OrderItem, ...]) -> list[str]:
    out = ["order", "by"]
    for i, item in enumerate(order_by):
        if i:
            out.append(",")
        out += val_tokens(item.val)
        if item.direction == "desc":
            out.append("desc")
    return out
