"""Seeded structural mutations of gold SQL.

Four mutation kinds over canonical ASTs: replace or append a same-table
column in the select list, exchange the qualifiers of a join condition,
rewrite a star item to a concrete in-scope column, and flip an order-by
direction.  A budget derived from the query's token count bounds how many
distinct sites one call touches.

Sites address disjoint AST locations, so any subset of them composes; the
application order is fixed (sorted by location) to keep appended select
items deterministic.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, replace

from convsql.ast_nodes import (
    AggExpr,
    ArithExpr,
    ColumnRef,
    Condition,
    JoinCondition,
    OrderItem,
    SelectCore,
    SelectItem,
    SqlQuery,
    SubquerySource,
    TableRef,
    ValueExpr,
)
from convsql.lexer import tokenize_sql
from convsql.printer import print_sql
from convsql.schema import DatabaseSchema


class SiteKind(enum.Enum):
    SELECT_COLUMN_MOD = "select_column_mod"
    JOIN_TABLE_SWAP = "join_table_swap"
    STAR_TO_COLUMN = "star_to_column"
    ORDER_DIRECTION_SWAP = "order_direction_swap"


# location: (core index in walk order, clause slot, item index within slot)
Location = tuple[int, str, int]
# alternative: ("replace" | "append", replacement AST node)
Alternative = tuple[str, object]


@dataclass(frozen=True)
class PerturbConfig:
    alpha: float
    beta: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class PerturbSite:
    kind: SiteKind
    location: Location
    alternatives: tuple[Alternative, ...]


def enumerate_sites(query: SqlQuery, schema: DatabaseSchema) -> list[PerturbSite]:
    """List every legal mutation site of ``query``, subqueries included.

    Expects canonical input.  Walk order (and thus core numbering) is:
    core itself, FROM subqueries, WHERE subqueries, HAVING subqueries,
    then the set-op right-hand side.
    """
    sites: list[PerturbSite] = []
    for core_idx, core in enumerate(_walk_cores(query)):
        scope = [
            src.name
            for src in core.from_clause.tables
            if isinstance(src, TableRef)
        ]
        for i, item in enumerate(core.select_items):
            site = _select_item_site(item, (core_idx, "select", i), scope, schema)
            if site is not None:
                sites.append(site)
        for i, jc in enumerate(core.from_clause.join_conditions):
            site = _join_site(jc, (core_idx, "join", i), schema)
            if site is not None:
                sites.append(site)
        for i, oi in enumerate(core.order_by):
            flipped = replace(oi, direction="desc" if oi.direction == "asc" else "asc")
            sites.append(
                PerturbSite(
                    kind=SiteKind.ORDER_DIRECTION_SWAP,
                    location=(core_idx, "order", i),
                    alternatives=(("replace", flipped),),
                )
            )
    return sites


def perturb_sql(
    query: SqlQuery, schema: DatabaseSchema, beta: float, rng: random.Random
) -> SqlQuery:
    """Mutate up to ``max(1, floor(beta * token_count))`` distinct sites."""
    sites = enumerate_sites(query, schema)
    if not sites:
        return query
    budget = max(1, math.floor(beta * len(tokenize_sql(print_sql(query)))))
    count = min(budget, len(sites))
    chosen = sorted(rng.sample(range(len(sites)), count))
    picks = [
        (sites[i], sites[i].alternatives[rng.randrange(len(sites[i].alternatives))])
        for i in chosen
    ]
    return apply_sites(query, picks)


def apply_sites(
    query: SqlQuery, picks: list[tuple[PerturbSite, Alternative]]
) -> SqlQuery:
    """Apply chosen (site, alternative) pairs; sites must be distinct."""
    edits: dict[int, list[tuple[Location, Alternative]]] = {}
    seen: set[Location] = set()
    for site, alt in picks:
        if site.location in seen:
            raise ValueError(f"duplicate site at {site.location}")
        seen.add(site.location)
        edits.setdefault(site.location[0], []).append((site.location, alt))
    counter = [0]
    return _rebuild_query(query, edits, counter)


# site construction


def _select_item_site(
    item: SelectItem,
    location: Location,
    scope: list[str],
    schema: DatabaseSchema,
) -> PerturbSite | None:
    if item.is_star:
        star = item.expr
        assert isinstance(star, ColumnRef)
        if star.qualifier is not None:
            tables = [star.qualifier] if schema.has_table(star.qualifier) else []
            qualify = True
        else:
            tables = scope
            qualify = len(scope) > 1
        alts: list[Alternative] = []
        for table in tables:
            for column in schema.table(table).column_names():
                ref = ColumnRef(column=column, qualifier=table if qualify else None)
                alts.append(("replace", ref))
        if not alts:
            return None
        return PerturbSite(
            kind=SiteKind.STAR_TO_COLUMN, location=location, alternatives=tuple(alts)
        )

    anchor = _anchor_column(item.expr)
    if anchor is None:
        return None
    owner = anchor.qualifier
    if owner is None:
        owner = next(
            (t for t in scope if schema.has_column(t, anchor.column)), None
        )
    if owner is None or not schema.has_table(owner):
        return None
    siblings = [
        c for c in schema.table(owner).column_names() if c != anchor.column
    ]
    if not siblings:
        return None
    alts = []
    for sibling in siblings:
        ref = ColumnRef(column=sibling, qualifier=anchor.qualifier)
        alts.append(("replace", _swap_anchor(item.expr, ref)))
        alts.append(("append", ref))
    return PerturbSite(
        kind=SiteKind.SELECT_COLUMN_MOD, location=location, alternatives=tuple(alts)
    )


def _join_site(
    jc: JoinCondition, location: Location, schema: DatabaseSchema
) -> PerturbSite | None:
    lq, rq = jc.left.qualifier, jc.right.qualifier
    if lq is None or rq is None or lq == rq:
        return None
    # legal only when each column also exists in the other side's table
    if not (schema.has_table(lq) and schema.has_table(rq)):
        return None
    if not schema.has_column(rq, jc.left.column):
        return None
    if not schema.has_column(lq, jc.right.column):
        return None
    swapped = JoinCondition(
        left=ColumnRef(column=jc.left.column, qualifier=rq),
        right=ColumnRef(column=jc.right.column, qualifier=lq),
    )
    return PerturbSite(
        kind=SiteKind.JOIN_TABLE_SWAP,
        location=location,
        alternatives=(("replace", swapped),),
    )


def _anchor_column(expr: ValueExpr) -> ColumnRef | None:
    """First non-star column reference in ``expr``, print order."""
    if isinstance(expr, ColumnRef):
        return None if expr.is_star else expr
    if isinstance(expr, AggExpr):
        return _anchor_column(expr.arg)
    if isinstance(expr, ArithExpr):
        return _anchor_column(expr.lhs) or _anchor_column(expr.rhs)
    return None


def _swap_anchor(expr: ValueExpr, new_ref: ColumnRef) -> ValueExpr:
    """Replace the anchor column of ``expr`` with ``new_ref``."""
    if isinstance(expr, ColumnRef):
        return expr if expr.is_star else new_ref
    if isinstance(expr, AggExpr):
        return replace(expr, arg=_swap_anchor(expr.arg, new_ref))
    if isinstance(expr, ArithExpr):
        if _anchor_column(expr.lhs) is not None:
            return replace(expr, lhs=_swap_anchor(expr.lhs, new_ref))
        return replace(expr, rhs=_swap_anchor(expr.rhs, new_ref))
    return expr


# shared core walk; enumerate and rebuild must agree on numbering


def _walk_cores(query: SqlQuery):
    yield from _walk_core(query.body)
    if query.set_op is not None:
        yield from _walk_cores(query.set_op.right)


def _walk_core(core: SelectCore):
    yield core
    for src in core.from_clause.tables:
        if isinstance(src, SubquerySource):
            yield from _walk_cores(src.query)
    for cond in (core.where, core.having):
        if cond is None:
            continue
        for atom in _cond_atoms(cond):
            if isinstance(atom.rhs, SqlQuery):
                yield from _walk_cores(atom.rhs)


def _cond_atoms(node) -> list[Condition]:
    if isinstance(node, Condition):
        return [node]
    return _cond_atoms(node.left) + _cond_atoms(node.right)


def _rebuild_query(
    query: SqlQuery,
    edits: dict[int, list[tuple[Location, Alternative]]],
    counter: list[int],
) -> SqlQuery:
    body = _rebuild_core(query.body, edits, counter)
    set_op = query.set_op
    if set_op is not None:
        set_op = replace(
            set_op, right=_rebuild_query(set_op.right, edits, counter)
        )
    return SqlQuery(body=body, set_op=set_op)


def _rebuild_core(
    core: SelectCore,
    edits: dict[int, list[tuple[Location, Alternative]]],
    counter: list[int],
) -> SelectCore:
    core_idx = counter[0]
    counter[0] += 1
    my_edits = edits.get(core_idx, [])

    select_items = list(core.select_items)
    appends: list[tuple[Location, SelectItem]] = []
    join_conditions = list(core.from_clause.join_conditions)
    order_by = list(core.order_by)
    for location, (op, node) in sorted(my_edits, key=lambda e: e[0]):
        _, slot, idx = location
        if slot == "select":
            assert isinstance(node, (ColumnRef, AggExpr, ArithExpr))
            if op == "append":
                appends.append((location, SelectItem(expr=node)))
            else:
                select_items[idx] = SelectItem(expr=node)
        elif slot == "join":
            assert isinstance(node, JoinCondition)
            join_conditions[idx] = node
        else:
            assert slot == "order" and isinstance(node, OrderItem)
            order_by[idx] = node
    select_items.extend(item for _, item in sorted(appends, key=lambda e: e[0]))

    tables = tuple(
        src
        if isinstance(src, TableRef)
        else replace(src, query=_rebuild_query(src.query, edits, counter))
        for src in core.from_clause.tables
    )
    where = _rebuild_cond(core.where, edits, counter)
    having = _rebuild_cond(core.having, edits, counter)
    return replace(
        core,
        select_items=tuple(select_items),
        from_clause=replace(
            core.from_clause, tables=tables, join_conditions=tuple(join_conditions)
        ),
        where=where,
        group_by=core.group_by,
        having=having,
        order_by=tuple(order_by),
    )


def _rebuild_cond(node, edits, counter):
    if node is None:
        return None
    if isinstance(node, Condition):
        if isinstance(node.rhs, SqlQuery):
            return replace(node, rhs=_rebuild_query(node.rhs, edits, counter))
        return node
    return replace(
        node,
        left=_rebuild_cond(node.left, edits, counter),
        right=_rebuild_cond(node.right, edits, counter),
    )
