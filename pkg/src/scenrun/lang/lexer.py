"""Indentation-aware scanner for scenario source files.

Whitespace and comments are kept as *leading trivia* on the following token,
so joining ``leading + text`` over the token stream reproduces the input.
Inside brackets, newlines and indentation are insignificant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .diagnostics import Diagnostic, OscError, SourceSpan


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    NUMBER = "number"
    PHYSICAL_LITERAL = "physical"
    STRING = "string"
    OPERATOR = "operator"
    INDENT = "indent"
    DEDENT = "dedent"
    NEWLINE = "newline"
    EOF = "eof"


KEYWORDS = frozenset(
    {
        "import", "scenario", "actor", "action", "struct", "do", "serial", "parallel",
        "wait", "emit", "with", "keep", "in", "it", "inherits",
    }
)

UNITS = frozenset({"m", "cm", "s", "ms", "rad", "deg", "percent"})

_OPERATORS_2 = ("==",)
_OPERATORS_1 = frozenset("()[],:.=")
_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    unit: str | None = None
    leading: str = ""

    def is_op(self, text: str) -> bool:
        return self.kind is TokenKind.OPERATOR and self.text == text

    def is_kw(self, text: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.text == text

    @property
    def number_text(self) -> str:
        """Numeric part of a NUMBER or PHYSICAL_LITERAL token."""
        if self.unit:
            return self.text[: -len(self.unit)]
        return self.text

    def __repr__(self) -> str:
        extra = f" unit={self.unit}" if self.unit else ""
        return f"<{self.kind.name} {self.text!r}{extra} @{self.span.line}:{self.span.column}>"


class LexError(OscError):
    pass


def decode_string(text: str) -> str:
    """Decode a quoted string token (including its quotes)."""
    body = text[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def encode_string(value: str) -> str:
    body = value.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n").replace("\t", "\\t")
    return f"'{body}'"


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ("0" <= ch <= "9")


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


class _Scanner:
    def __init__(self, source: str, file: str):
        self.src = source
        self.file = file
        self.n = len(source)
        self.pos = 0
        self.line = 1
        self.line_start = 0
        self.tokens: list[Token] = []
        self.errors: list[Diagnostic] = []
        self.pending: list[str] = []
        self.indents = [0]
        self.depth = 0

    def span(self, pos: int, length: int) -> SourceSpan:
        return SourceSpan(self.file, self.line, pos - self.line_start + 1, length)

    def error(self, message: str, pos: int, length: int = 1) -> None:
        self.errors.append(Diagnostic(message, self.span(pos, length)))

    def emit(self, kind: TokenKind, start: int, end: int, unit: str | None = None) -> None:
        text = self.src[start:end]
        self.tokens.append(Token(kind, text, self.span(start, end - start), unit, "".join(self.pending)))
        self.pending.clear()

    def emit_virtual(self, kind: TokenKind) -> None:
        self.tokens.append(Token(kind, "", self.span(self.pos, 0)))

    def newline(self, end: int) -> None:
        self.line += 1
        self.line_start = end

    def run(self) -> list[Token]:
        at_line_start = True
        src, n = self.src, self.n
        while self.pos < n:
            if at_line_start and self.depth == 0:
                if self.scan_line_start():
                    at_line_start = False
                continue
            ch = src[self.pos]
            if ch == "\n":
                if self.depth > 0:
                    self.pending.append(ch)
                else:
                    self.emit(TokenKind.NEWLINE, self.pos, self.pos + 1)
                    at_line_start = True
                self.pos += 1
                self.newline(self.pos)
            elif ch in " \t\r\f":
                self.pending.append(ch)
                self.pos += 1
            elif ch == "#":
                end = src.find("\n", self.pos)
                end = n if end < 0 else end
                self.pending.append(src[self.pos:end])
                self.pos = end
            elif ch in "'\"":
                self.scan_string(ch)
            elif _is_digit(ch) or (ch == "-" and self.pos + 1 < n and _is_digit(src[self.pos + 1])):
                self.scan_number()
            elif _is_ident_start(ch):
                start = self.pos
                while self.pos < n and _is_ident_char(src[self.pos]):
                    self.pos += 1
                word = src[start:self.pos]
                self.emit(TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENTIFIER, start, self.pos)
            elif src.startswith(_OPERATORS_2, self.pos):
                self.emit(TokenKind.OPERATOR, self.pos, self.pos + 2)
                self.pos += 2
            elif ch in _OPERATORS_1:
                if ch in "([":
                    self.depth += 1
                elif ch in ")]" and self.depth > 0:
                    self.depth -= 1
                self.emit(TokenKind.OPERATOR, self.pos, self.pos + 1)
                self.pos += 1
            else:
                self.error(f"unknown character {ch!r}", self.pos)
                self.pending.append(ch)
                self.pos += 1
        if not at_line_start or self.depth > 0:
            self.emit_virtual(TokenKind.NEWLINE)
        while len(self.indents) > 1:
            self.indents.pop()
            self.emit_virtual(TokenKind.DEDENT)
        self.tokens.append(Token(TokenKind.EOF, "", self.span(self.pos, 0), None, "".join(self.pending)))
        self.pending.clear()
        return self.tokens

    def scan_line_start(self) -> bool:
        """Handle indentation at the start of a physical line.

        Returns True when the line carries tokens, False when it was blank or
        comment-only (its text is then folded into trivia).
        """
        src, n = self.src, self.n
        start = self.pos
        while self.pos < n and src[self.pos] in " \t\f":
            self.pos += 1
        ws = src[start:self.pos]
        if self.pos >= n or src[self.pos] in "\r\n#":
            end = src.find("\n", self.pos)
            end = n if end < 0 else end + 1
            self.pending.append(src[start:end])
            self.pos = end
            if end <= n and src[end - 1:end] == "\n":
                self.newline(end)
            return False
        tab = ws.find("\t")
        if tab >= 0:
            self.error("indentation contains a tab character; indent with spaces only", start + tab)
        width = len(ws)
        top = self.indents[-1]
        if width > top:
            self.indents.append(width)
            self.emit_virtual(TokenKind.INDENT)
        elif width < top:
            while len(self.indents) > 1 and self.indents[-1] > width:
                self.indents.pop()
                self.emit_virtual(TokenKind.DEDENT)
            if self.indents[-1] != width:
                self.error(
                    f"inconsistent dedent: indentation of {width} matches no enclosing indentation level",
                    start,
                    max(width, 1),
                )
        self.pending.append(ws)
        return True

    def scan_string(self, quote: str) -> None:
        src, n = self.src, self.n
        start = self.pos
        i = start + 1
        while i < n and src[i] != quote and src[i] != "\n":
            i += 2 if src[i] == "\\" and i + 1 < n and src[i + 1] != "\n" else 1
        if i >= n or src[i] != quote:
            self.error("unterminated string literal", start, i - start)
            self.pending.append(src[start:i])
            self.pos = i
            return
        self.pos = i + 1
        self.emit(TokenKind.STRING, start, self.pos)

    def scan_number(self) -> None:
        src, n = self.src, self.n
        start = self.pos
        i = start + 1 if src[start] == "-" else start
        while i < n and _is_digit(src[i]):
            i += 1
        if i + 1 < n and src[i] == "." and _is_digit(src[i + 1]):
            i += 1
            while i < n and _is_digit(src[i]):
                i += 1
        num_end = i
        while i < n and _is_ident_char(src[i]):
            i += 1
        unit = src[num_end:i]
        if not unit:
            self.pos = num_end
            self.emit(TokenKind.NUMBER, start, num_end)
        elif unit in UNITS:
            self.pos = i
            self.emit(TokenKind.PHYSICAL_LITERAL, start, i, unit)
        else:
            self.error(f"unknown unit {unit!r}; expected one of {', '.join(sorted(UNITS))}", num_end, len(unit))
            self.pos = i
            self.emit(TokenKind.NUMBER, start, num_end)


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens ending with a single EOF.

    Raises LexError carrying every problem found; scanning does not stop at
    the first one.
    """
    scanner = _Scanner(source, file)
    tokens = scanner.run()
    if scanner.errors:
        raise LexError(scanner.errors)
    return tokens
