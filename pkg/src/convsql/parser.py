"""Recursive descent parser for the supported SQL dialect.

The dialect covers exactly the shapes found in the gold SQL of the evaluated
datasets: SELECT (DISTINCT, aggregates, arithmetic), inner-join chains with ON
equalities, WHERE / GROUP BY / HAVING / ORDER BY / LIMIT, subqueries in
condition positions and in FROM, and INTERSECT / UNION / EXCEPT chains.
Anything else raises ``UnsupportedFeature`` rather than guessing.
"""

from __future__ import annotations

from convsql.ast_nodes import (
    AGG_FUNCS,
    AggExpr,
    ArithExpr,
    BoolExpr,
    ColumnRef,
    CondNode,
    Condition,
    FromClause,
    JoinCondition,
    Literal,
    OrderItem,
    SelectCore,
    SelectItem,
    SetOp,
    SqlQuery,
    SubquerySource,
    TableRef,
    TableSource,
    ValueExpr,
)
from convsql.errors import SqlSyntaxError, UnknownIdentifier, UnsupportedFeature
from convsql.lexer import NUMBER, STRING, SYM, WORD, Token, scan
from convsql.schema import DatabaseSchema

RESERVED = frozenset(
    "select distinct from where group by having order limit join on as "
    "and or not in like between asc desc intersect union except "
    "max min count sum avg".split()
)

_EOF = (-1, "", -1)


def parse_sql(text: str, schema: DatabaseSchema | None = None) -> SqlQuery:
    """Parse ``text`` into an AST; resolve identifiers when ``schema`` is given."""
    tokens = scan(text)
    parser = _Parser(tokens)
    query = parser.parse_query()
    parser.expect_end()
    if schema is not None:
        resolve(query, schema)
    return query


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # token helpers

    def peek(self) -> Token:
        return self.toks[self.i] if self.i < len(self.toks) else _EOF

    def peek2(self) -> Token:
        return self.toks[self.i + 1] if self.i + 1 < len(self.toks) else _EOF

    def advance(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def at_word(self, *words: str) -> bool:
        kind, value, _ = self.peek()
        return kind == WORD and value in words

    def at_sym(self, *syms: str) -> bool:
        kind, value, _ = self.peek()
        return kind == SYM and value in syms

    def take_word(self, *words: str) -> bool:
        if self.at_word(*words):
            self.i += 1
            return True
        return False

    def take_sym(self, *syms: str) -> bool:
        if self.at_sym(*syms):
            self.i += 1
            return True
        return False

    def expect_word(self, word: str) -> None:
        kind, value, pos = self.peek()
        if kind != WORD or value != word:
            raise SqlSyntaxError(pos, f"keyword {word!r}", value or "<end>")
        self.i += 1

    def expect_sym(self, sym: str) -> None:
        kind, value, pos = self.peek()
        if kind != SYM or value != sym:
            raise SqlSyntaxError(pos, f"{sym!r}", value or "<end>")
        self.i += 1

    def expect_name(self) -> str:
        kind, value, pos = self.peek()
        if kind != WORD:
            raise SqlSyntaxError(pos, "identifier", value or "<end>")
        if value in RESERVED:
            raise SqlSyntaxError(pos, "identifier", value)
        self.i += 1
        return value

    def expect_end(self) -> None:
        self.take_sym(";")
        kind, value, pos = self.peek()
        if kind != _EOF[0]:
            raise SqlSyntaxError(pos, "end of input", value)

    # grammar

    def parse_query(self) -> SqlQuery:
        body = self.parse_select_core()
        if self.at_word("intersect", "union", "except"):
            operator = self.advance()[1]
            if self.take_word("all"):
                raise UnsupportedFeature(f"{operator.upper()} ALL")
            right = self.parse_query()
            return SqlQuery(body=body, set_op=SetOp(operator=operator, right=right))
        return SqlQuery(body=body)

    def parse_select_core(self) -> SelectCore:
        self.expect_word("select")
        distinct = self.take_word("distinct")
        items = [self.parse_select_item()]
        while self.take_sym(","):
            items.append(self.parse_select_item())

        if not self.at_word("from"):
            raise UnsupportedFeature("SELECT without FROM clause")
        from_clause = self.parse_from()

        where = None
        if self.take_word("where"):
            where = self.parse_condition()

        group_by: list[ColumnRef] = []
        if self.take_word("group"):
            self.expect_word("by")
            group_by.append(self.parse_column_ref())
            while self.take_sym(","):
                group_by.append(self.parse_column_ref())

        having = None
        if self.take_word("having"):
            if not group_by:
                raise UnsupportedFeature("HAVING without GROUP BY")
            having = self.parse_condition()

        order_by: list[OrderItem] = []
        if self.take_word("order"):
            self.expect_word("by")
            order_by.append(self.parse_order_item())
            while self.take_sym(","):
                order_by.append(self.parse_order_item())

        limit = None
        if self.take_word("limit"):
            kind, value, pos = self.peek()
            if kind != NUMBER or "." in value:
                raise SqlSyntaxError(pos, "integer LIMIT value", value or "<end>")
            self.i += 1
            limit = int(value)

        return SelectCore(
            select_items=tuple(items),
            from_clause=from_clause,
            distinct=distinct,
            where=where,
            group_by=tuple(group_by),
            having=having,
            order_by=tuple(order_by),
            limit=limit,
        )

    def parse_select_item(self) -> SelectItem:
        if self.at_sym("*"):
            self.advance()
            return SelectItem(expr=ColumnRef(column="*"))
        kind, value, _ = self.peek()
        if kind == WORD and value.endswith(".*"):
            self.advance()
            return SelectItem(expr=ColumnRef(column="*", qualifier=value[:-2]))
        return SelectItem(expr=self.parse_value_expr())

    def parse_from(self) -> FromClause:
        self.expect_word("from")
        tables = [self.parse_table_source()]
        join_conditions: list[JoinCondition] = []
        while self.take_word("join"):
            tables.append(self.parse_table_source())
            if self.take_word("on"):
                join_conditions.append(self.parse_join_condition())
                while self.take_word("and"):
                    join_conditions.append(self.parse_join_condition())
        self._check_alias_uniqueness(tables)
        return FromClause(tables=tuple(tables), join_conditions=tuple(join_conditions))

    def parse_table_source(self) -> TableSource:
        if self.take_sym("("):
            query = self.parse_query()
            self.expect_sym(")")
            alias = self.expect_name() if self.take_word("as") else None
            return SubquerySource(query=query, alias=alias)
        name = self.expect_name()
        if "." in name:
            raise UnsupportedFeature(f"qualified table name {name!r}")
        alias = self.expect_name() if self.take_word("as") else None
        return TableRef(name=name, alias=alias)

    def _check_alias_uniqueness(self, tables: list[TableSource]) -> None:
        seen: set[str] = set()
        for src in tables:
            if src.alias is None:
                continue
            if src.alias in seen:
                raise SqlSyntaxError(self.peek()[2], f"unique alias, {src.alias!r} repeats")
            seen.add(src.alias)

    def parse_join_condition(self) -> JoinCondition:
        left = self.parse_column_ref()
        self.expect_sym("=")
        right = self.parse_column_ref()
        return JoinCondition(left=left, right=right)

    def parse_column_ref(self) -> ColumnRef:
        kind, value, pos = self.peek()
        if kind != WORD or value in RESERVED:
            raise SqlSyntaxError(pos, "column reference", value or "<end>")
        self.i += 1
        if value.endswith(".*"):
            return ColumnRef(column="*", qualifier=value[:-2])
        if "." in value:
            qualifier, column = value.split(".", 1)
            return ColumnRef(column=column, qualifier=qualifier)
        return ColumnRef(column=value)

    # conditions

    def parse_condition(self) -> CondNode:
        node = self.parse_and_chain()
        while self.take_word("or"):
            node = BoolExpr(connective="or", left=node, right=self.parse_and_chain())
        return node

    def parse_and_chain(self) -> CondNode:
        node = self.parse_cond_atom()
        while self.take_word("and"):
            node = BoolExpr(connective="and", left=node, right=self.parse_cond_atom())
        return node

    def parse_cond_atom(self) -> Condition | BoolExpr:
        if self.at_sym("("):
            if self.peek2()[1] == "select":
                raise UnsupportedFeature("subquery on the left side of a condition")
            self.advance()
            inner = self.parse_condition()
            self.expect_sym(")")
            return inner

        lhs = self.parse_value_expr()

        kind, value, pos = self.peek()
        if kind == SYM and value in ("=", "!=", "<", "<=", ">", ">="):
            self.i += 1
            return Condition(lhs=lhs, op=value, rhs=self.parse_condition_rhs())
        if self.take_word("between"):
            low = self.parse_value_expr()
            self.expect_word("and")
            high = self.parse_value_expr()
            return Condition(lhs=lhs, op="between", rhs=low, rhs2=high)
        if self.take_word("like"):
            return Condition(lhs=lhs, op="like", rhs=self.parse_value_expr())
        if self.take_word("in"):
            return Condition(lhs=lhs, op="in", rhs=self.parse_subquery_rhs())
        if self.take_word("not"):
            if self.take_word("like"):
                return Condition(lhs=lhs, op="not like", rhs=self.parse_value_expr())
            if self.take_word("in"):
                return Condition(lhs=lhs, op="not in", rhs=self.parse_subquery_rhs())
            raise UnsupportedFeature("NOT outside of NOT IN / NOT LIKE")
        raise SqlSyntaxError(pos, "comparison operator", value or "<end>")

    def parse_condition_rhs(self) -> ValueExpr | SqlQuery:
        if self.at_sym("(") and self.peek2()[1] == "select":
            self.advance()
            query = self.parse_query()
            self.expect_sym(")")
            return query
        return self.parse_value_expr()

    def parse_subquery_rhs(self) -> SqlQuery:
        self.expect_sym("(")
        if not self.at_word("select"):
            raise UnsupportedFeature("IN over a literal value list")
        query = self.parse_query()
        self.expect_sym(")")
        return query

    # value expressions

    def parse_value_expr(self) -> ValueExpr:
        node = self.parse_term()
        while self.at_sym("+", "-"):
            op = self.advance()[1]
            node = ArithExpr(op=op, lhs=node, rhs=self.parse_term())
        return node

    def parse_term(self) -> ValueExpr:
        node = self.parse_factor()
        while self.at_sym("*", "/"):
            op = self.advance()[1]
            node = ArithExpr(op=op, lhs=node, rhs=self.parse_factor())
        return node

    def parse_factor(self) -> ValueExpr:
        kind, value, pos = self.peek()
        if kind == NUMBER:
            self.i += 1
            return Literal(value=value)
        if kind == STRING:
            self.i += 1
            return Literal(value=value, is_string=True)
        nxt = self.peek2()
        if kind == WORD and value in AGG_FUNCS and nxt[0] == SYM and nxt[1] == "(":
            return self.parse_aggregate()
        if kind == WORD and value not in RESERVED:
            return self.parse_column_ref()
        raise SqlSyntaxError(pos, "value expression", value or "<end>")

    def parse_aggregate(self) -> AggExpr:
        func = self.advance()[1]
        self.expect_sym("(")
        distinct = self.take_word("distinct")
        if self.at_sym("*"):
            self.advance()
            arg: ValueExpr = ColumnRef(column="*")
        else:
            kind, value, _ = self.peek()
            if kind == WORD and value.endswith(".*"):
                self.advance()
                arg = ColumnRef(column="*", qualifier=value[:-2])
            else:
                arg = self.parse_value_expr()
        if _contains_aggregate(arg):
            raise UnsupportedFeature("nested aggregate")
        self.expect_sym(")")
        return AggExpr(func=func, arg=arg, distinct=distinct)

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_value_expr()
        direction = "asc"
        if self.at_word("asc", "desc"):
            direction = self.advance()[1]
        return OrderItem(expr=expr, direction=direction)


def _contains_aggregate(expr: ValueExpr) -> bool:
    if isinstance(expr, AggExpr):
        return True
    if isinstance(expr, ArithExpr):
        return _contains_aggregate(expr.lhs) or _contains_aggregate(expr.rhs)
    return False


# schema resolution


def resolve(query: SqlQuery, schema: DatabaseSchema) -> None:
    """Validate all identifiers of ``query`` against ``schema``.

    Raises ``UnknownIdentifier`` for tables not in the schema, qualifiers that
    are neither an in-scope table, alias, nor derived-table alias, and columns
    that do not belong to any in-scope table.  Columns qualified by a
    derived-table alias are accepted opaquely.
    """
    _resolve_query(query, schema)


def _resolve_query(query: SqlQuery, schema: DatabaseSchema) -> None:
    for core in query.cores():
        _resolve_core(core, schema)


def _resolve_core(core: SelectCore, schema: DatabaseSchema) -> None:
    named: list[str] = []
    derived_aliases: set[str] = set()
    alias_map: dict[str, str] = {}
    for src in core.from_clause.tables:
        if isinstance(src, TableRef):
            if not schema.has_table(src.name):
                raise UnknownIdentifier(src.name)
            named.append(src.name)
            if src.alias:
                alias_map[src.alias] = src.name
        else:
            _resolve_query(src.query, schema)
            if src.alias:
                derived_aliases.add(src.alias)
    has_derived = any(isinstance(s, SubquerySource) for s in core.from_clause.tables)

    def check_column(ref: ColumnRef) -> None:
        if ref.qualifier is not None:
            table = alias_map.get(ref.qualifier, ref.qualifier)
            if schema.has_table(table):
                if not ref.is_star and not schema.has_column(table, ref.column):
                    raise UnknownIdentifier(f"{ref.qualifier}.{ref.column}")
                return
            if ref.qualifier in derived_aliases:
                return  # derived table is opaque
            raise UnknownIdentifier(ref.qualifier)
        if ref.is_star:
            return
        if any(schema.has_column(t, ref.column) for t in named):
            return
        if has_derived:
            return  # may resolve inside the derived table; treated opaquely
        raise UnknownIdentifier(ref.column)

    def check_value(expr: ValueExpr) -> None:
        if isinstance(expr, ColumnRef):
            check_column(expr)
        elif isinstance(expr, AggExpr):
            check_value(expr.arg)
        elif isinstance(expr, ArithExpr):
            check_value(expr.lhs)
            check_value(expr.rhs)

    def check_cond(node: CondNode) -> None:
        if isinstance(node, BoolExpr):
            check_cond(node.left)
            check_cond(node.right)
            return
        check_value(node.lhs)
        if isinstance(node.rhs, SqlQuery):
            _resolve_query(node.rhs, schema)
        else:
            check_value(node.rhs)
        if node.rhs2 is not None:
            check_value(node.rhs2)

    for item in core.select_items:
        check_value(item.expr)
    for jc in core.from_clause.join_conditions:
        check_column(jc.left)
        check_column(jc.right)
    if core.where is not None:
        check_cond(core.where)
    for col in core.group_by:
        check_column(col)
    if core.having is not None:
        check_cond(core.having)
    for item in core.order_by:
        check_value(item.expr)
