"""Auxiliary-task targets derived from interactions and their SQL ASTs.

Three label families ride alongside plain SQL generation:

* related-schema: the tables and columns the current query touches,
* turn-switch: which clause slots changed relative to the previous query,
* final-utterance: the single question summarizing the whole interaction.

Turn-switch diffs compare printed sub-clauses of the column-qualified
canonical forms, so "name" versus "college.name" never registers as a
change when both resolve to the same column.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from convsql.ast_nodes import (
    AggExpr,
    ArithExpr,
    BoolExpr,
    ColumnRef,
    CondNode,
    Condition,
    SelectCore,
    SqlQuery,
    SubquerySource,
    TableRef,
    ValueExpr,
)
from convsql.canonical import qualify_columns
from convsql.parser import resolve
from convsql.printer import (
    print_condition,
    print_from,
    print_group_by,
    print_order_by,
    print_select,
    print_sql,
)
from convsql.schema import DatabaseSchema

TWP_SEPARATOR = " </s> "
RSP_SEPARATOR = " , "


class ChangeTag(enum.Enum):
    SELECT_CHANGE = "select change"
    FROM_CHANGE = "from change"
    WHERE_CHANGE = "where change"
    GROUP_BY_CHANGE = "group by change"
    HAVING_CHANGE = "having change"
    ORDER_BY_CHANGE = "order by change"
    LIMIT_CHANGE = "limit change"
    SET_OP_CHANGE = "set op change"
    NONE = "none"


@dataclass(frozen=True)
class RspLabel:
    tables: tuple[str, ...]
    columns: tuple[str, ...]  # "table.column", star excluded


@dataclass(frozen=True)
class TwpLabel:
    changes: frozenset[ChangeTag]


@dataclass(frozen=True)
class Turn:
    utterance: str
    gold_sql: str


@dataclass(frozen=True)
class Interaction:
    id: str
    db_id: str
    turns: tuple[Turn, ...]
    final_utterance: str | None = None
    dataset: str = field(default="", compare=False)


def extract_related_schema(query: SqlQuery, schema: DatabaseSchema) -> RspLabel:
    """Collect the tables and qualified columns ``query`` references.

    Walks the query in print order, subqueries included; expects canonical
    input.  Bare columns are qualified against the FROM scope first, so the
    label is independent of how the original SQL spelled its references.
    """
    resolve(query, schema)
    qualified = qualify_columns(query, schema)
    tables: list[str] = []
    columns: list[str] = []

    def add_table(name: str) -> None:
        if name not in tables:
            tables.append(name)

    def add_column(ref: ColumnRef) -> None:
        if ref.is_star or ref.qualifier is None:
            return
        if not schema.has_table(ref.qualifier):
            return  # derived-table alias; its real columns show up inside
        add_table(ref.qualifier)
        name = f"{ref.qualifier}.{ref.column}"
        if name not in columns:
            columns.append(name)

    def walk_value(expr: ValueExpr) -> None:
        if isinstance(expr, ColumnRef):
            add_column(expr)
        elif isinstance(expr, AggExpr):
            walk_value(expr.arg)
        elif isinstance(expr, ArithExpr):
            walk_value(expr.lhs)
            walk_value(expr.rhs)

    def walk_cond(node: CondNode) -> None:
        if isinstance(node, BoolExpr):
            walk_cond(node.left)
            walk_cond(node.right)
            return
        assert isinstance(node, Condition)
        walk_value(node.lhs)
        if isinstance(node.rhs, SqlQuery):
            walk_query(node.rhs)
        else:
            walk_value(node.rhs)
        if node.rhs2 is not None:
            walk_value(node.rhs2)

    def walk_core(core: SelectCore) -> None:
        for item in core.select_items:
            walk_value(item.expr)
        for src in core.from_clause.tables:
            if isinstance(src, TableRef):
                add_table(src.name)
            else:
                assert isinstance(src, SubquerySource)
                walk_query(src.query)
        for jc in core.from_clause.join_conditions:
            add_column(jc.left)
            add_column(jc.right)
        if core.where is not None:
            walk_cond(core.where)
        for col in core.group_by:
            add_column(col)
        if core.having is not None:
            walk_cond(core.having)
        for item in core.order_by:
            walk_value(item.expr)

    def walk_query(q: SqlQuery) -> None:
        walk_core(q.body)
        if q.set_op is not None:
            walk_query(q.set_op.right)

    walk_query(qualified)
    return RspLabel(tables=tuple(tables), columns=tuple(columns))


def compute_turn_switch(
    prev: SqlQuery, curr: SqlQuery, schema: DatabaseSchema
) -> TwpLabel:
    """Diff two canonical queries clause slot by clause slot."""
    a = qualify_columns(prev, schema)
    b = qualify_columns(curr, schema)
    changes = {
        tag
        for tag, slot in _SLOT_PRINTERS
        if slot(a) != slot(b)
    }
    if not changes:
        return TwpLabel(changes=frozenset({ChangeTag.NONE}))
    return TwpLabel(changes=frozenset(changes))


def _slot_select(q: SqlQuery) -> str:
    return print_select(q.body)


def _slot_from(q: SqlQuery) -> str:
    return print_from(q.body.from_clause)


def _slot_where(q: SqlQuery) -> str:
    return "" if q.body.where is None else print_condition(q.body.where)


def _slot_group_by(q: SqlQuery) -> str:
    return "" if not q.body.group_by else print_group_by(q.body)


def _slot_having(q: SqlQuery) -> str:
    return "" if q.body.having is None else print_condition(q.body.having)


def _slot_order_by(q: SqlQuery) -> str:
    return "" if not q.body.order_by else print_order_by(q.body)


def _slot_limit(q: SqlQuery) -> str:
    return "" if q.body.limit is None else str(q.body.limit)


def _slot_set_op(q: SqlQuery) -> str:
    if q.set_op is None:
        return ""
    return f"{q.set_op.operator} {print_sql(q.set_op.right)}"


_SLOT_PRINTERS = (
    (ChangeTag.SELECT_CHANGE, _slot_select),
    (ChangeTag.FROM_CHANGE, _slot_from),
    (ChangeTag.WHERE_CHANGE, _slot_where),
    (ChangeTag.GROUP_BY_CHANGE, _slot_group_by),
    (ChangeTag.HAVING_CHANGE, _slot_having),
    (ChangeTag.ORDER_BY_CHANGE, _slot_order_by),
    (ChangeTag.LIMIT_CHANGE, _slot_limit),
    (ChangeTag.SET_OP_CHANGE, _slot_set_op),
)

_TAG_ORDER = {tag: i for i, tag in enumerate(ChangeTag)}


def serialize_twp(label: TwpLabel) -> str:
    tags = sorted(label.changes, key=_TAG_ORDER.__getitem__)
    return TWP_SEPARATOR.join(tag.value for tag in tags)


def serialize_rsp(label: RspLabel) -> str:
    return RSP_SEPARATOR.join(label.tables + label.columns)


def build_fup_target(interaction: Interaction) -> str | None:
    return interaction.final_utterance
