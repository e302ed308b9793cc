"""SQL scanner: the hot kernel of the toolkit.

Every parse, round-trip check, and perturbation-budget computation runs the
scanner over the whole corpus, so it ships in two interchangeable forms: this
pure-Python reference and a compiled twin (``convsql._scanner``, built from
``_scanner.pyx``).  The compiled module is selected at import time when
present; both produce identical token lists.

Tokens are plain tuples ``(kind, value, position)``.  Identifiers and keywords
are lowercased at scan time; string literals are kept verbatim, quotes
included.  Qualified names (``t1.name``, ``t1.*``) are single tokens, matching
the convention of the gold SQL this dialect covers.
"""

from __future__ import annotations

from convsql.errors import LexError

WORD = 0
NUMBER = 1
STRING = 2
SYM = 3

Token = tuple[int, str, int]


def _scan_py(text: str) -> list[Token]:
    n = len(text)
    out: list[Token] = []
    i = 0
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "'" or c == '"':
            j = i + 1
            while j < n and text[j] != c:
                j += 1
            if j >= n:
                raise LexError(i, "unterminated string literal")
            out.append((STRING, text[i : j + 1], i))
            i = j + 1
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 2
                while j < n and text[j].isdigit():
                    j += 1
            out.append((NUMBER, text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j < n and text[j] == ".":
                if j + 1 < n and (text[j + 1].isalpha() or text[j + 1] == "_"):
                    j += 2
                    while j < n and (text[j].isalnum() or text[j] == "_"):
                        j += 1
                elif j + 1 < n and text[j + 1] == "*":
                    j += 2
                else:
                    raise LexError(j, "dangling '.' after identifier")
            out.append((WORD, text[i:j].lower(), i))
            i = j
            continue
        two = text[i : i + 2]
        if two in (">=", "<=", "!=", "<>"):
            out.append((SYM, "!=" if two == "<>" else two, i))
            i += 2
            continue
        if c in "()=<>,;+-*/":
            out.append((SYM, c, i))
            i += 1
            continue
        raise LexError(i, f"illegal character {c!r}")
    if not out:
        raise LexError(0, "empty SQL")
    return out


try:
    from convsql._scanner import scan_tokens as _scan_impl

    SCANNER_BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    _scan_impl = _scan_py
    SCANNER_BACKEND = "pure"


def scan(text: str) -> list[Token]:
    """Scan SQL text into ``(kind, value, position)`` tuples."""
    return _scan_impl(text)


def tokenize_sql(text: str) -> list[str]:
    """Return the token texts of ``text``.

    Joining the result with single spaces re-parses to the same AST.
    """
    return [tok[1] for tok in scan(text)]
