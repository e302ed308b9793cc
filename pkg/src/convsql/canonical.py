"""Canonical form for parsed SQL, plus explicit column qualification.

``canonicalize`` rewrites alias qualifiers to their table names, drops the
aliases themselves, lowercases identifiers, and strips leading zeros from
numeric literals.  It never invents qualifiers for unqualified columns;
``qualify_columns`` does that as a separate, schema-driven step so callers
that need positional identity (the evaluator, label derivation) can opt in.

Derived-table aliases (subqueries in FROM) are kept: without them there is
no way to reference the subquery's columns.  Clause order, conjunct order,
and select-item order all pass through untouched.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable

from convsql.ast_nodes import (
    AggExpr,
    ArithExpr,
    BoolExpr,
    ColumnRef,
    CondNode,
    Condition,
    FromClause,
    Literal,
    OrderItem,
    SelectCore,
    SetOp,
    SqlQuery,
    SubquerySource,
    TableRef,
    ValueExpr,
)
from convsql.parser import resolve
from convsql.schema import DatabaseSchema

_ColFn = Callable[[ColumnRef], ColumnRef]
_LitFn = Callable[[Literal], Literal]
_SubFn = Callable[[SqlQuery], SqlQuery]


def canonicalize(query: SqlQuery, schema: DatabaseSchema) -> SqlQuery:
    """Return the canonical twin of ``query``; idempotent."""
    resolve(query, schema)
    return _canon_query(query, schema, {})


def qualify_columns(query: SqlQuery, schema: DatabaseSchema) -> SqlQuery:
    """Attach a table qualifier to every bare non-star column reference.

    Expects canonical input (alias-free).  A bare column takes the first
    FROM-clause table that owns it; columns that only resolve inside a
    derived table stay bare.
    """
    return _qualify_query(query, schema, ())


# shared walkers


def _ident(lit: Literal) -> Literal:
    return lit


def _map_value(expr: ValueExpr, col: _ColFn, lit: _LitFn = _ident) -> ValueExpr:
    if isinstance(expr, ColumnRef):
        return col(expr)
    if isinstance(expr, Literal):
        return lit(expr)
    if isinstance(expr, AggExpr):
        return replace(
            expr, func=expr.func.lower(), arg=_map_value(expr.arg, col, lit)
        )
    assert isinstance(expr, ArithExpr)
    return replace(
        expr, lhs=_map_value(expr.lhs, col, lit), rhs=_map_value(expr.rhs, col, lit)
    )


def _map_cond(node: CondNode, col: _ColFn, sub: _SubFn, lit: _LitFn) -> CondNode:
    if isinstance(node, BoolExpr):
        return replace(
            node,
            left=_map_cond(node.left, col, sub, lit),
            right=_map_cond(node.right, col, sub, lit),
        )
    assert isinstance(node, Condition)
    if isinstance(node.rhs, SqlQuery):
        rhs: ValueExpr | SqlQuery = sub(node.rhs)
    else:
        rhs = _map_value(node.rhs, col, lit)
    rhs2 = None if node.rhs2 is None else _map_value(node.rhs2, col, lit)
    return replace(node, lhs=_map_value(node.lhs, col, lit), rhs=rhs, rhs2=rhs2)


def _map_core(
    core: SelectCore,
    from_clause: FromClause,
    col: _ColFn,
    sub: _SubFn,
    lit: _LitFn = _ident,
) -> SelectCore:
    where = None if core.where is None else _map_cond(core.where, col, sub, lit)
    having = None if core.having is None else _map_cond(core.having, col, sub, lit)
    return replace(
        core,
        select_items=tuple(
            replace(i, expr=_map_value(i.expr, col, lit)) for i in core.select_items
        ),
        from_clause=replace(
            from_clause,
            join_conditions=tuple(
                replace(jc, left=col(jc.left), right=col(jc.right))
                for jc in from_clause.join_conditions
            ),
        ),
        where=where,
        group_by=tuple(col(c) for c in core.group_by),
        having=having,
        order_by=tuple(
            OrderItem(expr=_map_value(i.expr, col, lit), direction=i.direction.lower())
            for i in core.order_by
        ),
    )


# canonicalization pass


def _canon_query(
    query: SqlQuery, schema: DatabaseSchema, outer_aliases: dict[str, str]
) -> SqlQuery:
    body = _canon_core(query.body, schema, outer_aliases)
    set_op = query.set_op
    if set_op is not None:
        set_op = SetOp(
            operator=set_op.operator.lower(),
            right=_canon_query(set_op.right, schema, outer_aliases),
        )
    return SqlQuery(body=body, set_op=set_op)


def _canon_core(
    core: SelectCore, schema: DatabaseSchema, outer_aliases: dict[str, str]
) -> SelectCore:
    aliases = dict(outer_aliases)
    derived: set[str] = set()
    sources: list[TableRef | SubquerySource] = []
    for src in core.from_clause.tables:
        if isinstance(src, TableRef):
            name = src.name.lower()
            if src.alias:
                aliases[src.alias.lower()] = name
            sources.append(TableRef(name=name))
        else:
            if src.alias:
                derived.add(src.alias.lower())
            sources.append(
                SubquerySource(
                    query=_canon_query(src.query, schema, aliases),
                    alias=src.alias.lower() if src.alias else None,
                )
            )

    def col(ref: ColumnRef) -> ColumnRef:
        qualifier = ref.qualifier.lower() if ref.qualifier else None
        if qualifier is not None and qualifier not in derived:
            qualifier = aliases.get(qualifier, qualifier)
        return ColumnRef(column=ref.column.lower(), qualifier=qualifier)

    def sub(q: SqlQuery) -> SqlQuery:
        return _canon_query(q, schema, aliases)

    def lit(value: Literal) -> Literal:
        if value.is_string:
            return value
        return replace(value, value=_strip_leading_zeros(value.value))

    return _map_core(
        core, replace(core.from_clause, tables=tuple(sources)), col, sub, lit
    )


def _strip_leading_zeros(text: str) -> str:
    if "." in text:
        whole, frac = text.split(".", 1)
        return f"{whole.lstrip('0') or '0'}.{frac}"
    return text.lstrip("0") or "0"


# qualification pass


def _qualify_query(
    query: SqlQuery, schema: DatabaseSchema, outer_scope: tuple[str, ...]
) -> SqlQuery:
    body = _qualify_core(query.body, schema, outer_scope)
    set_op = query.set_op
    if set_op is not None:
        set_op = SetOp(
            operator=set_op.operator,
            right=_qualify_query(set_op.right, schema, outer_scope),
        )
    return SqlQuery(body=body, set_op=set_op)


def _qualify_core(
    core: SelectCore, schema: DatabaseSchema, outer_scope: tuple[str, ...]
) -> SelectCore:
    local = tuple(
        src.name for src in core.from_clause.tables if isinstance(src, TableRef)
    )
    scope = local + tuple(t for t in outer_scope if t not in local)

    sources = tuple(
        src
        if isinstance(src, TableRef)
        else replace(src, query=_qualify_query(src.query, schema, scope))
        for src in core.from_clause.tables
    )

    def col(ref: ColumnRef) -> ColumnRef:
        if ref.qualifier is not None or ref.is_star:
            return ref
        for table in scope:
            if schema.has_column(table, ref.column):
                return ColumnRef(column=ref.column, qualifier=table)
        return ref  # resolves only inside a derived table; left bare

    def sub(q: SqlQuery) -> SqlQuery:
        return _qualify_query(q, schema, scope)

    return _map_core(core, replace(core.from_clause, tables=sources), col, sub)
