"""AST node types for the supported SQL dialect.

All nodes are immutable; every transformation (canonicalization, perturbation)
rebuilds the affected subtree.  Identifiers are stored lowercase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

AGG_FUNCS = ("max", "min", "count", "sum", "avg")
ARITH_OPS = ("+", "-", "*", "/")
COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")
CONDITION_OPS = COMPARISON_OPS + ("between", "in", "not in", "like", "not like")
SET_OPERATORS = ("intersect", "union", "except")
ORDER_DIRECTIONS = ("asc", "desc")


@dataclass(frozen=True)
class ColumnRef:
    column: str
    qualifier: str | None = None

    @property
    def is_star(self) -> bool:
        return self.column == "*"


@dataclass(frozen=True)
class Literal:
    value: str
    is_string: bool = False


@dataclass(frozen=True)
class AggExpr:
    func: str  # one of AGG_FUNCS
    arg: ValueExpr
    distinct: bool = False


@dataclass(frozen=True)
class ArithExpr:
    op: str  # one of ARITH_OPS
    lhs: ValueExpr
    rhs: ValueExpr


ValueExpr = Union[ColumnRef, Literal, AggExpr, ArithExpr]


@dataclass(frozen=True)
class SelectItem:
    expr: ValueExpr

    @property
    def agg(self) -> str | None:
        return self.expr.func if isinstance(self.expr, AggExpr) else None

    @property
    def is_star(self) -> bool:
        return isinstance(self.expr, ColumnRef) and self.expr.is_star


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class SubquerySource:
    query: SqlQuery
    alias: str | None = None


TableSource = Union[TableRef, SubquerySource]


@dataclass(frozen=True)
class JoinCondition:
    left: ColumnRef
    right: ColumnRef


@dataclass(frozen=True)
class FromClause:
    tables: tuple[TableSource, ...]
    join_conditions: tuple[JoinCondition, ...] = ()


@dataclass(frozen=True)
class Condition:
    """One comparison atom.  ``rhs2`` is the upper bound of BETWEEN."""

    lhs: ValueExpr
    op: str  # one of CONDITION_OPS
    rhs: Union[ValueExpr, SqlQuery]
    rhs2: ValueExpr | None = None


@dataclass(frozen=True)
class BoolExpr:
    connective: str  # "and" | "or"
    left: CondNode
    right: CondNode


CondNode = Union[Condition, BoolExpr]


@dataclass(frozen=True)
class OrderItem:
    expr: ValueExpr
    direction: str = "asc"


@dataclass(frozen=True)
class SelectCore:
    select_items: tuple[SelectItem, ...]
    from_clause: FromClause
    distinct: bool = False
    where: CondNode | None = None
    group_by: tuple[ColumnRef, ...] = ()
    having: CondNode | None = None
    order_by: tuple[OrderItem, ...] = ()
    limit: int | None = None


@dataclass(frozen=True)
class SetOp:
    operator: str  # one of SET_OPERATORS
    right: SqlQuery


@dataclass(frozen=True)
class SqlQuery:
    body: SelectCore
    set_op: SetOp | None = None

    def cores(self) -> list[SelectCore]:
        """All select cores of the set-op chain, left to right."""
        out = [self.body]
        q = self
        while q.set_op is not None:
            q = q.set_op.right
            out.append(q.body)
        return out
