"""Exact surface-form checks.

The printed dialect is the contract for corpus targets, so specific
strings matter here, not just round-tripping.
"""

import pytest

from convsql.parser import parse_sql
from convsql.printer import print_sql


def printed(sql):
    return print_sql(parse_sql(sql))


@pytest.mark.parametrize(
    "sql,expected",
    [
        ("SELECT name FROM college", "select name from college"),
        ("SELECT * FROM college", "select * from college"),
        ("SELECT t1.* FROM college AS t1", "select t1.* from college as t1"),
        ("SELECT DISTINCT state FROM college", "select distinct state from college"),
        ("SELECT count(*) FROM college", "select count ( * ) from college"),
        (
            "SELECT count(DISTINCT state) FROM college",
            "select count ( distinct state ) from college",
        ),
        (
            "SELECT max(enr) - min(enr) FROM college",
            "select max ( enr ) - min ( enr ) from college",
        ),
        (
            "SELECT * FROM college WHERE enr > 15000",
            "select * from college where enr > 15000",
        ),
        (
            "SELECT * FROM t WHERE a = 'CA' AND b < 2",
            "select * from t where a = 'CA' and b < 2",
        ),
        (
            "SELECT * FROM t WHERE x BETWEEN 1 AND 5",
            "select * from t where x between 1 and 5",
        ),
        (
            "SELECT * FROM t WHERE a NOT IN (SELECT a FROM s)",
            "select * from t where a not in ( select a from s )",
        ),
        (
            "SELECT state FROM college GROUP BY state HAVING count(*) > 2",
            "select state from college group by state having count ( * ) > 2",
        ),
        (
            "SELECT name FROM college ORDER BY enr DESC LIMIT 3",
            "select name from college order by enr desc limit 3",
        ),
        (
            "SELECT name FROM college ORDER BY enr",
            "select name from college order by enr asc",
        ),
        (
            "SELECT a FROM t UNION SELECT a FROM s",
            "select a from t union select a from s",
        ),
        (
            "SELECT * FROM (SELECT state FROM college) AS sub",
            "select * from ( select state from college ) as sub",
        ),
    ],
)
def test_surface_forms(sql, expected):
    assert printed(sql) == expected


def test_join_flattens_on_chain():
    got = printed(
        "SELECT T1.name FROM college AS T1 JOIN city AS T2 "
        "ON T1.state = T2.state AND T1.name = T2.city_name"
    )
    assert got == (
        "select t1.name from college as t1 join city as t2 "
        "on t1.state = t2.state and t1.name = t2.city_name"
    )


def test_three_table_join_keeps_on_list_at_end():
    got = printed(
        "SELECT a FROM x AS T1 JOIN y AS T2 ON T1.i = T2.i "
        "JOIN z AS T3 ON T2.j = T3.j"
    )
    assert got == (
        "select a from x as t1 join y as t2 join z as t3 "
        "on t1.i = t2.i and t2.j = t3.j"
    )


def test_or_under_and_is_parenthesized():
    got = printed("SELECT * FROM t WHERE (a = 1 OR b = 2) AND c = 3")
    assert got == "select * from t where ( a = 1 or b = 2 ) and c = 3"
    # reparse keeps the grouping
    reparsed = parse_sql(got)
    assert reparsed.body.where.connective == "and"


def test_or_at_top_level_unparenthesized():
    assert (
        printed("SELECT * FROM t WHERE a = 1 OR b = 2")
        == "select * from t where a = 1 or b = 2"
    )


def test_angle_inequality_prints_as_bang_eq():
    assert printed("SELECT * FROM t WHERE a <> 1") == "select * from t where a != 1"


def test_round_trip_is_identity_on_fixtures(gold_sqls):
    for _, sql in gold_sqls:
        q = parse_sql(sql)
        assert parse_sql(print_sql(q)) == q, sql


def test_print_is_fixpoint_on_fixtures(gold_sqls):
    for _, sql in gold_sqls:
        p = print_sql(parse_sql(sql))
        assert print_sql(parse_sql(p)) == p, sql
