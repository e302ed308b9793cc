"""Deterministic SQL text from ASTs: lowercase keywords, single-space tokens.

``parse_sql(print_sql(q))`` is structurally identical to ``q`` for every AST
the parser produces.  ON conditions of a join chain are printed collected
after the last join; re-parsing yields the same flat condition list.
"""

from __future__ import annotations

from convsql.ast_nodes import (
    AggExpr,
    ArithExpr,
    BoolExpr,
    ColumnRef,
    CondNode,
    Condition,
    FromClause,
    OrderItem,
    SelectCore,
    SelectItem,
    SqlQuery,
    SubquerySource,
    TableRef,
    ValueExpr,
)


def print_sql(query: SqlQuery) -> str:
    parts = _core_tokens(query.body)
    if query.set_op is not None:
        parts.append(query.set_op.operator)
        parts.append(print_sql(query.set_op.right))
    return " ".join(parts)


def print_value(expr: ValueExpr) -> str:
    if isinstance(expr, ColumnRef):
        return print_column(expr)
    if isinstance(expr, AggExpr):
        inner = print_value(expr.arg)
        if expr.distinct:
            inner = f"distinct {inner}"
        return f"{expr.func} ( {inner} )"
    if isinstance(expr, ArithExpr):
        return f"{print_value(expr.lhs)} {expr.op} {print_value(expr.rhs)}"
    return expr.value  # Literal; string literals keep their quotes verbatim


def print_column(ref: ColumnRef) -> str:
    if ref.qualifier is not None:
        return f"{ref.qualifier}.{ref.column}"
    return ref.column


def print_condition(node: CondNode) -> str:
    if isinstance(node, BoolExpr):
        left = _cond_operand(node.left, node.connective)
        right = _cond_operand(node.right, node.connective)
        return f"{left} {node.connective} {right}"
    return _print_atom(node)


def _cond_operand(node: CondNode, outer: str) -> str:
    # An OR nested under AND needs parentheses to survive re-parsing.
    if outer == "and" and isinstance(node, BoolExpr) and node.connective == "or":
        return f"( {print_condition(node)} )"
    return print_condition(node)


def _print_atom(atom: Condition) -> str:
    lhs = print_value(atom.lhs)
    if atom.op == "between":
        return f"{lhs} between {print_value(atom.rhs)} and {print_value(atom.rhs2)}"
    if isinstance(atom.rhs, SqlQuery):
        return f"{lhs} {atom.op} ( {print_sql(atom.rhs)} )"
    return f"{lhs} {atom.op} {print_value(atom.rhs)}"


def print_from(clause: FromClause) -> str:
    parts = ["from", _print_source(clause.tables[0])]
    for src in clause.tables[1:]:
        parts.append("join")
        parts.append(_print_source(src))
    if clause.join_conditions:
        parts.append("on")
        conds = [
            f"{print_column(jc.left)} = {print_column(jc.right)}"
            for jc in clause.join_conditions
        ]
        parts.append(" and ".join(conds))
    return " ".join(parts)


def _print_source(src) -> str:
    if isinstance(src, SubquerySource):
        text = f"( {print_sql(src.query)} )"
    else:
        assert isinstance(src, TableRef)
        text = src.name
    if src.alias:
        text += f" as {src.alias}"
    return text


def print_select(core: SelectCore) -> str:
    head = "select distinct" if core.distinct else "select"
    items = " , ".join(_print_item(item) for item in core.select_items)
    return f"{head} {items}"


def _print_item(item: SelectItem) -> str:
    return print_value(item.expr)


def print_group_by(core: SelectCore) -> str:
    return "group by " + " , ".join(print_column(c) for c in core.group_by)


def print_order_by(core: SelectCore) -> str:
    items = " , ".join(_print_order_item(i) for i in core.order_by)
    return f"order by {items}"


def _print_order_item(item: OrderItem) -> str:
    return f"{print_value(item.expr)} {item.direction}"


def _core_tokens(core: SelectCore) -> list[str]:
    parts = [print_select(core), print_from(core.from_clause)]
    if core.where is not None:
        parts.append(f"where {print_condition(core.where)}")
    if core.group_by:
        parts.append(print_group_by(core))
    if core.having is not None:
        parts.append(f"having {print_condition(core.having)}")
    if core.order_by:
        parts.append(print_order_by(core))
    if core.limit is not None:
        parts.append(f"limit {core.limit}")
    return parts
