"""Hand-written lexer for the JavaScript subset.

Produces a flat token list with 1-based line/column spans. Comments are
skipped but still advance line accounting, so spans always point into
the original text.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional


class LexError(Exception):
    """Raised on malformed input, with the offending position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.line = line
        self.col = col


IDENT = "ident"
KEYWORD = "keyword"
NUMBER = "number"
STRING = "string"
TEMPLATE = "template"
REGEX = "regex"
PUNCT = "punct"
EOF = "eof"

KEYWORDS = frozenset(
    [
        "var", "let", "const", "function", "if", "else", "switch", "case",
        "default", "do", "while", "for", "in", "break", "continue", "return",
        "new", "delete", "typeof", "instanceof", "void", "null", "true",
        "false", "this", "try", "catch", "finally", "throw",
        # Recognized so the parser can reject them with a structured error.
        "class", "async", "await", "yield", "import", "export", "super",
        "extends", "with", "debugger",
    ]
)

# Longest first so that maximal munch falls out of a linear scan.
PUNCTUATORS = [
    ">>>=", "===", "!==", "**=", "<<=", ">>=", ">>>", "...",
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "**",
    "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/",
    "%", "&", "|", "^", "!", "~", "?", ":", "=", ".",
]

# After these a `/` must be a division sign, not a regex literal.
_NO_REGEX_AFTER_PUNCT = frozenset([")", "]", "}", "++", "--"])
_NO_REGEX_AFTER_KEYWORD = frozenset(["this", "null", "true", "false"])

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v", "0": "\0"}


@dataclass
class Token:
    type: str
    value: Any
    line: int
    col: int
    end_line: int
    end_col: int
    nl_before: bool = False

    def is_punct(self, text: str) -> bool:
        return self.type == PUNCT and self.value == text

    def is_keyword(self, text: str) -> bool:
        return self.type == KEYWORD and self.value == text


def _is_ident_start(ch: str) -> bool:
    # ch may be "" when peeking at EOF
    return ch.isalpha() or ch in ("_", "$")


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in ("_", "$")


class Lexer:
    """Single-pass scanner over the source text."""

    def __init__(self, text: str, line: int = 1, col: int = 1) -> None:
        self.text = text
        self.pos = 0
        self.line = line
        self.col = col
        self.tokens: list[Token] = []

    # -- low-level cursor ------------------------------------------------

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def _advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def _error(self, message: str) -> LexError:
        return LexError(message, self.line, self.col)

    # -- token emission ---------------------------------------------------

    def _emit(self, type_: str, value: Any, line: int, col: int) -> None:
        prev = self.tokens[-1] if self.tokens else None
        nl = prev is not None and line > prev.end_line
        self.tokens.append(Token(type_, value, line, col, self.line, max(self.col - 1, 1), nl))

    def _last_significant(self) -> Optional[Token]:
        return self.tokens[-1] if self.tokens else None

    def _regex_allowed(self) -> bool:
        prev = self._last_significant()
        if prev is None:
            return True
        if prev.type in (IDENT, NUMBER, STRING, TEMPLATE, REGEX):
            return False
        if prev.type == PUNCT and prev.value in _NO_REGEX_AFTER_PUNCT:
            return False
        if prev.type == KEYWORD and prev.value in _NO_REGEX_AFTER_KEYWORD:
            return False
        return True

    # -- scanners ----------------------------------------------------------

    def tokenize(self) -> list[Token]:
        """Scan the whole text; appends a trailing EOF token."""
        while self.pos < len(self.text):
            ch = self._peek()
            if ch in " \t\r\n":
                self._advance()
                continue
            if ch == "/" and self._peek(1) == "/":
                while self.pos < len(self.text) and self._peek() != "\n":
                    self._advance()
                continue
            if ch == "/" and self._peek(1) == "*":
                self._scan_block_comment()
                continue
            line, col = self.line, self.col
            if _is_ident_start(ch):
                self._scan_word(line, col)
            elif ch.isdigit() or (ch == "." and self._peek(1).isdigit()):
                self._scan_number(line, col)
            elif ch in "'\"":
                self._scan_string(line, col)
            elif ch == "`":
                self._scan_template(line, col)
            elif ch == "/" and self._regex_allowed():
                self._scan_regex(line, col)
            else:
                self._scan_punct(line, col)
        self._emit(EOF, None, self.line, self.col)
        return self.tokens

    def _scan_block_comment(self) -> None:
        line, col = self.line, self.col
        self._advance()
        self._advance()
        while self.pos < len(self.text):
            if self._peek() == "*" and self._peek(1) == "/":
                self._advance()
                self._advance()
                return
            self._advance()
        raise LexError("Unterminated block comment", line, col)

    def _scan_word(self, line: int, col: int) -> None:
        start = self.pos
        while self.pos < len(self.text) and _is_ident_part(self._peek()):
            self._advance()
        word = self.text[start : self.pos]
        self._emit(KEYWORD if word in KEYWORDS else IDENT, word, line, col)

    def _scan_number(self, line: int, col: int) -> None:
        start = self.pos
        if self._peek() == "0" and self._peek(1) in ("x", "X"):
            self._advance()
            self._advance()
            if not self._peek().isalnum():
                raise self._error("Malformed hex literal")
            while self.pos < len(self.text) and self._peek().isalnum():
                self._advance()
            try:
                value = float(int(self.text[start : self.pos], 16))
            except ValueError:
                raise LexError("Malformed hex literal", line, col) from None
        else:
            while self._peek().isdigit():
                self._advance()
            if self._peek() == ".":
                self._advance()
                while self._peek().isdigit():
                    self._advance()
            # _peek() is "" at EOF; tuples avoid the `"" in "eE"` substring trap
            if self._peek() in ("e", "E"):
                self._advance()
                if self._peek() in ("+", "-"):
                    self._advance()
                if not self._peek().isdigit():
                    raise self._error("Malformed exponent")
                while self._peek().isdigit():
                    self._advance()
            if _is_ident_start(self._peek()):
                raise self._error("Identifier starts immediately after number")
            value = float(self.text[start : self.pos])
        self._emit(NUMBER, value, line, col)

    def _scan_string(self, line: int, col: int) -> None:
        quote = self._advance()
        out: list[str] = []
        while True:
            if self.pos >= len(self.text) or self._peek() == "\n":
                raise LexError("Unterminated string literal", line, col)
            ch = self._advance()
            if ch == quote:
                break
            if ch == "\\":
                out.append(self._scan_escape(line, col))
            else:
                out.append(ch)
        self._emit(STRING, "".join(out), line, col)

    def _scan_escape(self, line: int, col: int) -> str:
        if self.pos >= len(self.text):
            raise LexError("Unterminated string literal", line, col)
        ch = self._advance()
        if ch in _ESCAPES:
            return _ESCAPES[ch]
        if ch == "u":
            return self._scan_hex_escape(4)
        if ch == "x":
            return self._scan_hex_escape(2)
        if ch == "\n":
            return ""
        return ch

    def _scan_hex_escape(self, width: int) -> str:
        digits = ""
        for _ in range(width):
            if self.pos >= len(self.text):
                raise self._error("Truncated hex escape")
            digits += self._advance()
        try:
            return chr(int(digits, 16))
        except ValueError:
            raise self._error("Malformed hex escape") from None

    def _scan_template(self, line: int, col: int) -> None:
        """Scan a template literal into ("str", text) / ("expr", src, line, col) parts."""
        self._advance()
        parts: list[tuple] = []
        chunk: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise LexError("Unterminated template literal", line, col)
            if self._peek() == "`":
                self._advance()
                break
            if self._peek() == "\\":
                self._advance()
                chunk.append(self._scan_escape(line, col))
                continue
            if self._peek() == "$" and self._peek(1) == "{":
                parts.append(("str", "".join(chunk)))
                chunk = []
                self._advance()
                self._advance()
                parts.append(self._scan_template_expr(line, col))
                continue
            chunk.append(self._advance())
        parts.append(("str", "".join(chunk)))
        self._emit(TEMPLATE, parts, line, col)

    def _scan_template_expr(self, tpl_line: int, tpl_col: int) -> tuple:
        expr_line, expr_col = self.line, self.col
        start = self.pos
        depth = 1
        while depth > 0:
            if self.pos >= len(self.text):
                raise LexError("Unterminated template literal", tpl_line, tpl_col)
            ch = self._peek()
            if ch in "'\"":
                self._scan_string(self.line, self.col)
                self.tokens.pop()
                continue
            if ch == "`":
                self._scan_template(self.line, self.col)
                self.tokens.pop()
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    src = self.text[start : self.pos]
                    self._advance()
                    return ("expr", src, expr_line, expr_col)
            self._advance()
        raise LexError("Unterminated template literal", tpl_line, tpl_col)

    def _scan_regex(self, line: int, col: int) -> None:
        start = self.pos
        self._advance()
        in_class = False
        while True:
            if self.pos >= len(self.text) or self._peek() == "\n":
                raise LexError("Unterminated regular expression", line, col)
            ch = self._advance()
            if ch == "\\":
                if self.pos >= len(self.text) or self._peek() == "\n":
                    raise LexError("Unterminated regular expression", line, col)
                self._advance()
            elif ch == "[":
                in_class = True
            elif ch == "]":
                in_class = False
            elif ch == "/" and not in_class:
                break
        while self.pos < len(self.text) and self._peek().isalpha():
            self._advance()
        self._emit(REGEX, self.text[start : self.pos], line, col)

    def _scan_punct(self, line: int, col: int) -> None:
        rest = self.text[self.pos :]
        for punct in PUNCTUATORS:
            if rest.startswith(punct):
                for _ in punct:
                    self._advance()
                self._emit(PUNCT, punct, line, col)
                return
        raise self._error("Unexpected character %r" % self._peek())


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    """Tokenize `text`, returning the token list ending in EOF."""
    return Lexer(text, line=line, col=col).tokenize()
