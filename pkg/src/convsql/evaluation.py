"""Exact-set-match scoring of predicted SQL against gold.

Two headline numbers: question match (fraction of turns whose prediction
matches gold) and interaction match (fraction of interactions where every
turn matches).  Matching is structural and value-free: clause contents are
compared as sets where SQL semantics allow reordering, and every literal
collapses to a placeholder.

Difficulty buckets follow the component-count convention used by the
Spider evaluation script:

    comp1  = (has where) + (has group by) + (has order by) + (has limit)
             + (from lists more than one table) + (#or) + (#like)
    comp2  = number of nested queries hanging off the top level
             (set-op right side, subqueries in where / having / from)
    others = (#aggregates > 1) + (#select items > 1)
             + (#where atoms > 1) + (#group-by columns > 1)

    easy    comp1 <= 1 and comp2 = 0 and others = 0
    medium  comp2 = 0 and (others <= 2 and comp1 <= 1
                           or comp1 <= 2 and others < 2)
    hard    comp2 = 0 and (others > 2 and comp1 <= 2
                           or 2 < comp1 <= 3 and others <= 2)
            or comp2 <= 1 and comp1 <= 1 and others = 0
    extra   everything else
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from convsql.ast_nodes import (
    AggExpr,
    ArithExpr,
    BoolExpr,
    ColumnRef,
    CondNode,
    Condition,
    Literal,
    SelectCore,
    SqlQuery,
    SubquerySource,
    TableRef,
    ValueExpr,
)
from convsql.canonical import canonicalize, qualify_columns
from convsql.errors import MissingPrediction, SchemaFormatError
from convsql.labels import Interaction
from convsql.parser import parse_sql
from convsql.printer import print_condition
from convsql.schema import DatabaseSchema

TURN_BUCKETS = ("1", "2", "3", "4+")
DIFFICULTIES = ("easy", "medium", "hard", "extra")

_VALUE = ("val",)


def exact_match(pred: SqlQuery, gold: SqlQuery, schema: DatabaseSchema) -> bool:
    """Set-based structural equality of two canonicalized queries."""
    return match_key(pred, schema) == match_key(gold, schema)


def match_key(query: SqlQuery, schema: DatabaseSchema):
    """Hashable identity of a canonical query under set-match semantics."""
    return _query_key(qualify_columns(query, schema))


def _query_key(query: SqlQuery):
    set_op = None
    if query.set_op is not None:
        set_op = (query.set_op.operator, _query_key(query.set_op.right))
    return (_core_key(query.body), set_op)


def _core_key(core: SelectCore):
    select = frozenset(
        Counter(_value_key(item.expr) for item in core.select_items).items()
    )
    tables = frozenset(
        src.name if isinstance(src, TableRef) else _query_key(src.query)
        for src in core.from_clause.tables
    )
    joins = frozenset(
        frozenset((_value_key(jc.left), _value_key(jc.right)))
        for jc in core.from_clause.join_conditions
    )
    return (
        core.distinct,
        select,
        tables,
        joins,
        _cond_key(core.where),
        frozenset(_value_key(c) for c in core.group_by),
        tuple((_value_key(i.expr), i.direction) for i in core.order_by),
        core.limit,
    )


def _value_key(expr: ValueExpr):
    if isinstance(expr, ColumnRef):
        return ("col", expr.qualifier or "", expr.column)
    if isinstance(expr, Literal):
        return _VALUE
    if isinstance(expr, AggExpr):
        return ("agg", expr.func, expr.distinct, _value_key(expr.arg))
    assert isinstance(expr, ArithExpr)
    return ("arith", expr.op, _value_key(expr.lhs), _value_key(expr.rhs))


def _cond_key(node: CondNode | None):
    """WHERE/HAVING identity: a set of OR-alternatives, each a set of atoms.

    An OR nested inside an AND chain has no flat set form; such subtrees
    fall back to their printed text so they still compare deterministically.
    """
    if node is None:
        return None
    groups = []
    for branch in _split(node, "or"):
        atoms = []
        for atom in _split(branch, "and"):
            if isinstance(atom, Condition):
                atoms.append(_atom_key(atom))
            else:
                atoms.append(("opaque", print_condition(atom)))
        groups.append(frozenset(atoms))
    return frozenset(groups)


def _split(node: CondNode, connective: str) -> list[CondNode]:
    if isinstance(node, BoolExpr) and node.connective == connective:
        return _split(node.left, connective) + _split(node.right, connective)
    return [node]


def _atom_key(atom: Condition):
    if isinstance(atom.rhs, SqlQuery):
        rhs = _query_key(atom.rhs)
    else:
        rhs = _value_key(atom.rhs)
    rhs2 = None if atom.rhs2 is None else _value_key(atom.rhs2)
    return (atom.op, _value_key(atom.lhs), rhs, rhs2)


# difficulty classification


def classify_difficulty(query: SqlQuery) -> str:
    comp1 = _count_component1(query.body)
    comp2 = _count_nested(query)
    others = _count_others(query.body)
    if comp1 <= 1 and comp2 == 0 and others == 0:
        return "easy"
    if comp2 == 0 and (
        (others <= 2 and comp1 <= 1) or (comp1 <= 2 and others < 2)
    ):
        return "medium"
    if (
        comp2 == 0
        and ((others > 2 and comp1 <= 2) or (2 < comp1 <= 3 and others <= 2))
    ) or (comp2 <= 1 and comp1 <= 1 and others == 0):
        return "hard"
    return "extra"


def _count_component1(core: SelectCore) -> int:
    count = 0
    count += core.where is not None
    count += bool(core.group_by)
    count += bool(core.order_by)
    count += core.limit is not None
    count += len(core.from_clause.tables) > 1
    if core.where is not None:
        count += len(_split(core.where, "or")) - 1
        count += sum(
            atom.op in ("like", "not like")
            for atom in _atoms(core.where)
        )
    return count


def _count_nested(query: SqlQuery) -> int:
    core = query.body
    count = 0
    count += query.set_op is not None
    count += sum(
        isinstance(src, SubquerySource) for src in core.from_clause.tables
    )
    for cond in (core.where, core.having):
        if cond is not None:
            count += sum(isinstance(a.rhs, SqlQuery) for a in _atoms(cond))
    return count


def _count_others(core: SelectCore) -> int:
    aggs = sum(_count_aggs(item.expr) for item in core.select_items)
    where_atoms = 0
    if core.where is not None:
        atoms = _atoms(core.where)
        where_atoms = len(atoms)
        aggs += sum(_count_aggs(a.lhs) for a in atoms)
    if core.having is not None:
        aggs += sum(_count_aggs(a.lhs) for a in _atoms(core.having))
    aggs += sum(_count_aggs(i.expr) for i in core.order_by)
    count = 0
    count += aggs > 1
    count += len(core.select_items) > 1
    count += where_atoms > 1
    count += len(core.group_by) > 1
    return count


def _atoms(node: CondNode) -> list[Condition]:
    if isinstance(node, Condition):
        return [node]
    assert isinstance(node, BoolExpr)
    return _atoms(node.left) + _atoms(node.right)


def _count_aggs(expr: ValueExpr) -> int:
    if isinstance(expr, AggExpr):
        return 1
    if isinstance(expr, ArithExpr):
        return _count_aggs(expr.lhs) + _count_aggs(expr.rhs)
    return 0


# scoring


@dataclass(frozen=True)
class EvalReport:
    qm: float
    im: float
    per_turn: dict[str, float | None]
    per_difficulty: dict[str, float | None]
    per_turn_counts: dict[str, int]
    per_difficulty_counts: dict[str, int]
    n_questions: int
    n_interactions: int
    failures: tuple[dict, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "qm": self.qm,
            "im": self.im,
            "per_turn": self.per_turn,
            "per_difficulty": self.per_difficulty,
            "per_turn_counts": self.per_turn_counts,
            "per_difficulty_counts": self.per_difficulty_counts,
            "n_questions": self.n_questions,
            "n_interactions": self.n_interactions,
            "failures": list(self.failures),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render_text(self) -> str:
        def fmt(value: float | None) -> str:
            return "-" if value is None else f"{value:.4f}"

        lines = [
            f"{'questions':<12}{self.n_questions:>8}",
            f"{'interactions':<12}{self.n_interactions:>8}",
            f"{'QM':<12}{fmt(self.qm):>8}",
            f"{'IM':<12}{fmt(self.im):>8}",
            "",
            f"{'turn':<12}{'n':>6}{'QM':>10}",
        ]
        for bucket in TURN_BUCKETS:
            lines.append(
                f"{bucket:<12}{self.per_turn_counts[bucket]:>6}"
                f"{fmt(self.per_turn[bucket]):>10}"
            )
        lines.append("")
        lines.append(f"{'difficulty':<12}{'n':>6}{'QM':>10}")
        for bucket in DIFFICULTIES:
            lines.append(
                f"{bucket:<12}{self.per_difficulty_counts[bucket]:>6}"
                f"{fmt(self.per_difficulty[bucket]):>10}"
            )
        return "\n".join(lines) + "\n"


def evaluate(
    predictions: dict[str, list[str]],
    gold: list[Interaction],
    schemas: dict[str, DatabaseSchema],
) -> EvalReport:
    """Score per-interaction predicted SQL strings against gold turns.

    Unparsable or unresolvable predictions count as mismatches; a missing
    turn raises instead, because silence would skew both metrics.
    """
    matched = 0
    total = 0
    full_interactions = 0
    turn_hits = {b: 0 for b in TURN_BUCKETS}
    turn_totals = {b: 0 for b in TURN_BUCKETS}
    diff_hits = {d: 0 for d in DIFFICULTIES}
    diff_totals = {d: 0 for d in DIFFICULTIES}
    failures: list[dict] = []

    for interaction in gold:
        schema = schemas[interaction.db_id]
        preds = predictions.get(interaction.id)
        if preds is None:
            raise MissingPrediction(interaction.id, 1)
        all_match = True
        for t, turn in enumerate(interaction.turns, 1):
            if t > len(preds):
                raise MissingPrediction(interaction.id, t)
            gold_ast = canonicalize(parse_sql(turn.gold_sql), schema)
            ok, reason = _match_one(preds[t - 1], gold_ast, schema)
            bucket = str(t) if t < 4 else "4+"
            difficulty = classify_difficulty(gold_ast)
            total += 1
            turn_totals[bucket] += 1
            diff_totals[difficulty] += 1
            if ok:
                matched += 1
                turn_hits[bucket] += 1
                diff_hits[difficulty] += 1
            else:
                all_match = False
                failures.append(
                    {"interaction_id": interaction.id, "turn": t, "reason": reason}
                )
        if all_match:
            full_interactions += 1

    def ratios(hits: dict[str, int], totals: dict[str, int]) -> dict[str, float | None]:
        return {
            key: (hits[key] / totals[key] if totals[key] else None)
            for key in totals
        }

    n_interactions = len(gold)
    return EvalReport(
        qm=matched / total if total else 0.0,
        im=full_interactions / n_interactions if n_interactions else 0.0,
        per_turn=ratios(turn_hits, turn_totals),
        per_difficulty=ratios(diff_hits, diff_totals),
        per_turn_counts=turn_totals,
        per_difficulty_counts=diff_totals,
        n_questions=total,
        n_interactions=n_interactions,
        failures=tuple(failures),
    )


def _match_one(
    pred_sql: str, gold_ast: SqlQuery, schema: DatabaseSchema
) -> tuple[bool, str | None]:
    try:
        pred_ast = canonicalize(parse_sql(pred_sql), schema)
    except Exception as exc:
        return False, f"prediction does not parse: {exc}"
    if exact_match(pred_ast, gold_ast, schema):
        return True, None
    return False, "mismatch"


def load_predictions(path) -> dict[str, list[str]]:
    """Read a predictions JSONL file into per-interaction ordered lists."""
    by_interaction: dict[str, dict[int, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                interaction_id = str(obj["interaction_id"])
                turn_index = int(obj["turn_index"])
                sql = obj["sql"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise SchemaFormatError(f"{path}:{line_no}: bad prediction line: {exc}")
            turns = by_interaction.setdefault(interaction_id, {})
            if turn_index in turns:
                raise SchemaFormatError(
                    f"{path}:{line_no}: duplicate prediction for interaction "
                    f"{interaction_id!r} turn {turn_index}"
                )
            turns[turn_index] = sql
    out: dict[str, list[str]] = {}
    for interaction_id, turns in by_interaction.items():
        ordered = sorted(turns)
        if ordered != list(range(1, len(ordered) + 1)):
            missing = next(
                t for t in range(1, max(ordered) + 1) if t not in turns
            )
            raise MissingPrediction(interaction_id, missing)
        out[interaction_id] = [turns[t] for t in ordered]
    return out
