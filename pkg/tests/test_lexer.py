"""Lexer behavior pinned against hand-written token expectations."""
from __future__ import annotations

import pytest

from branchforce.frontend import LexError, tokenize
from branchforce.frontend.lexer import EOF, IDENT, KEYWORD, NUMBER, PUNCT, REGEX, STRING, TEMPLATE
from support import fixture_text


def values(tokens, type_):
    return [t.value for t in tokens if t.type == type_]


def test_timer_fixture_tokens():
    toks = tokenize(fixture_text("listing1_timebomb.js"))
    idents = values(toks, IDENT)
    assert "setTimeout" in idents
    assert "insertBefore" in idents
    assert 93445000.0 in values(toks, NUMBER)
    # comments never become tokens
    assert not any(isinstance(t.value, str) and "tracker methods" in t.value for t in toks)
    assert toks[-1].type == EOF


@pytest.mark.parametrize(
    "src,expected",
    [
        ("0", 0.0),
        ("42", 42.0),
        ("0x1F", 31.0),
        ("0XAB", 171.0),
        ("93445e3", 93445000.0),
        (".5", 0.5),
        ("5.", 5.0),
        ("1e+3", 1000.0),
        ("2E-2", 0.02),
        ("10.25", 10.25),
    ],
)
def test_number_literals(src, expected):
    toks = tokenize(src)
    assert [t.type for t in toks] == [NUMBER, EOF]
    assert toks[0].value == expected


@pytest.mark.parametrize("src", ["3px", "1e", "0x", "0xZZ", "1e+"])
def test_malformed_numbers(src):
    with pytest.raises(LexError):
        tokenize(src)


@pytest.mark.parametrize(
    "src,expected",
    [
        ("'abc'", "abc"),
        ('"a\\n"', "a\n"),
        ("'it\\'s'", "it's"),
        ('"he said \\"hi\\""', 'he said "hi"'),
        ('"\\u0041"', "A"),
        ('"\\x41"', "A"),
        ('"tab\\t"', "tab\t"),
        ("'\\\\'", "\\"),
        ("'\\q'", "q"),
        ("''", ""),
    ],
)
def test_string_literals(src, expected):
    toks = tokenize(src)
    assert [t.type for t in toks] == [STRING, EOF]
    assert toks[0].value == expected


@pytest.mark.parametrize("src", ["'abc", "'ab\ncd'", "'\\u12'", "'\\x4g'"])
def test_malformed_strings(src):
    with pytest.raises(LexError):
        tokenize(src)


def test_template_parts():
    toks = tokenize("`a${x + 1}b`")
    assert [t.type for t in toks] == [TEMPLATE, EOF]
    parts = toks[0].value
    assert parts[0] == ("str", "a")
    assert parts[1][0] == "expr" and parts[1][1] == "x + 1"
    assert parts[2] == ("str", "b")


def test_template_nested():
    toks = tokenize("`a${`in${y}ner`}c`")
    assert [t.type for t in toks] == [TEMPLATE, EOF]
    inner_src = toks[0].value[1][1]
    assert inner_src == "`in${y}ner`"


@pytest.mark.parametrize("src", ["`abc", "`a${1`", "`a${", "/*x"])
def test_unterminated(src):
    with pytest.raises(LexError):
        tokenize(src)


def test_regex_token_at_expression_position():
    toks = tokenize("/ab+c/gi")
    assert [t.type for t in toks] == [REGEX, EOF]
    assert toks[0].value == "/ab+c/gi"


def test_regex_with_escaped_slash_and_class():
    toks = tokenize(r"s.replace(/x\/y/, 'z')")
    regexes = values(toks, REGEX)
    assert regexes == [r"/x\/y/"]
    toks = tokenize("/[/]/")
    assert values(toks, REGEX) == ["/[/]/"]


def test_slash_after_value_is_division():
    toks = tokenize("a / b / c")
    assert values(toks, PUNCT) == ["/", "/"]
    assert values(toks, REGEX) == []
    # after a closing paren division is also the only reading
    toks = tokenize("(a) / 2")
    assert "/" in values(toks, PUNCT)


def test_keywords_vs_identifiers():
    toks = tokenize("of undefined if for typeof")
    kinds = [(t.type, t.value) for t in toks[:-1]]
    assert kinds == [
        (IDENT, "of"),
        (IDENT, "undefined"),
        (KEYWORD, "if"),
        (KEYWORD, "for"),
        (KEYWORD, "typeof"),
    ]


def test_positions_and_newline_flags():
    toks = tokenize("a\n  bb\n c")
    a, bb, c = toks[0], toks[1], toks[2]
    assert (a.line, a.col, a.end_line, a.end_col) == (1, 1, 1, 1)
    assert (bb.line, bb.col, bb.end_line, bb.end_col) == (2, 3, 2, 4)
    assert (c.line, c.col) == (3, 2)
    assert not a.nl_before
    assert bb.nl_before
    assert c.nl_before


def test_newline_inside_block_comment_counts():
    toks = tokenize("a /*\n*/ b")
    b = toks[1]
    assert b.line == 2
    assert b.nl_before


def test_punctuator_longest_match():
    toks = tokenize("a >>>= b >>> c >> d > e")
    assert values(toks, PUNCT) == [">>>=", ">>>", ">>", ">"]
    toks = tokenize("a === b == c = d")
    assert values(toks, PUNCT) == ["===", "==", "="]
