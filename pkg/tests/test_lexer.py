import pytest

from convsql.errors import LexError
from convsql.lexer import (
    NUMBER,
    SCANNER_BACKEND,
    STRING,
    SYM,
    WORD,
    _scan_py,
    scan,
    tokenize_sql,
)


def texts(sql):
    return [t[1] for t in scan(sql)]


def test_basic_token_stream():
    toks = scan("SELECT name FROM t WHERE x >= 10")
    assert [t[0] for t in toks] == [WORD, WORD, WORD, WORD, WORD, WORD, SYM, NUMBER]
    assert [t[1] for t in toks] == ["select", "name", "from", "t", "where", "x", ">=", "10"]


def test_positions_point_into_source():
    sql = "SELECT  a , b"
    for _, text, pos in scan(sql):
        assert sql[pos : pos + len(text)].lower() == text


def test_identifiers_lowercased_at_scan_time():
    assert texts("SeLeCt T1.Name") == ["select", "t1.name"]


def test_qualified_name_is_one_token():
    toks = scan("t1.name t1.* college.enr")
    assert [t[0] for t in toks] == [WORD, WORD, WORD]
    assert [t[1] for t in toks] == ["t1.name", "t1.*", "college.enr"]


def test_dangling_dot_raises():
    with pytest.raises(LexError):
        scan("t1. name")


@pytest.mark.parametrize("sym", ["<=", ">=", "!=", "=", "<", ">", "(", ")", ",", "*", "+", "-", "/"])
def test_symbols(sym):
    assert scan(f"a {sym} b")[1][:2] == (SYM, sym)


def test_two_char_symbols_not_split():
    assert texts("a<=b") == ["a", "<=", "b"]


def test_angle_inequality_normalized():
    assert texts("a <> b") == ["a", "!=", "b"]


def test_single_quoted_string_kept_verbatim():
    toks = scan("x = 'Some Value'")
    assert toks[2] == (STRING, "'Some Value'", 4)


def test_double_quoted_string():
    assert scan('x = "abc"')[2][:2] == (STRING, '"abc"')


def test_numbers():
    toks = scan("1 1.5 015 2014")
    assert [t[0] for t in toks] == [NUMBER] * 4
    assert [t[1] for t in toks] == ["1", "1.5", "015", "2014"]


def test_unterminated_string_raises():
    with pytest.raises(LexError):
        scan("x = 'oops")


def test_stray_character_raises():
    with pytest.raises(LexError):
        scan("a ? b")


def test_empty_input_raises():
    with pytest.raises(LexError):
        scan("")
    with pytest.raises(LexError):
        scan("   \t\n ")


def test_lex_error_carries_position():
    try:
        scan("abc ?")
    except LexError as e:
        assert e.position == 4
    else:
        pytest.fail("expected LexError")


def test_tokenize_sql_returns_texts():
    assert tokenize_sql("select a , b from t") == ["select", "a", ",", "b", "from", "t"]


def test_backends_agree(gold_sqls):
    # the compiled scanner must be token-for-token equal to the pure one
    if SCANNER_BACKEND != "compiled":
        pytest.skip("compiled scanner not built")
    for _, sql in gold_sqls:
        assert scan(sql) == _scan_py(sql)


def test_backend_name_is_reported():
    assert SCANNER_BACKEND in ("compiled", "pure")
