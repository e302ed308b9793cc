# cython: boundscheck=False, wraparound=False
"""Compiled twin of the pure-Python scanner in ``convsql.lexer``.

Must stay token-for-token identical to ``lexer._scan_py``; the test suite
cross-checks both over the whole fixture corpus.
"""

from convsql.errors import LexError

DEF K_WORD = 0
DEF K_NUMBER = 1
DEF K_STRING = 2
DEF K_SYM = 3


def scan_tokens(str text):
    cdef Py_ssize_t i = 0, j, n = len(text)
    cdef Py_UCS4 c, q
    out = []
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == u"'" or c == u'"':
            q = c
            j = i + 1
            while j < n and text[j] != q:
                j += 1
            if j >= n:
                raise LexError(i, "unterminated string literal")
            out.append((K_STRING, text[i : j + 1], i))
            i = j + 1
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == u"." and text[j + 1].isdigit():
                j += 2
                while j < n and text[j].isdigit():
                    j += 1
            out.append((K_NUMBER, text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == u"_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == u"_"):
                j += 1
            if j < n and text[j] == u".":
                if j + 1 < n and (text[j + 1].isalpha() or text[j + 1] == u"_"):
                    j += 2
                    while j < n and (text[j].isalnum() or text[j] == u"_"):
                        j += 1
                elif j + 1 < n and text[j + 1] == u"*":
                    j += 2
                else:
                    raise LexError(j, "dangling '.' after identifier")
            out.append((K_WORD, text[i:j].lower(), i))
            i = j
            continue
        if i + 1 < n:
            two = text[i : i + 2]
            if two == ">=" or two == "<=" or two == "!=":
                out.append((K_SYM, two, i))
                i += 2
                continue
            if two == "<>":
                out.append((K_SYM, "!=", i))
                i += 2
                continue
        if c == u"(" or c == u")" or c == u"=" or c == u"<" or c == u">" \
                or c == u"," or c == u";" or c == u"+" or c == u"-" \
                or c == u"*" or c == u"/":
            out.append((K_SYM, text[i : i + 1], i))
            i += 1
            continue
        raise LexError(i, f"illegal character {chr(c)!r}")
    if not out:
        raise LexError(0, "empty SQL")
    return out
