"""Front end for the supported OpenSCENARIO 2 subset."""

from .ast import Node, NodeKind
from .diagnostics import Diagnostic, OscError, SourceSpan, render_diagnostics
from .lexer import KEYWORDS, UNITS, LexError, Token, TokenKind, tokenize
from .parser import ParseError, parse, parse_source
from .printer import pretty

__all__ = [
    "Diagnostic",
    "KEYWORDS",
    "LexError",
    "Node",
    "NodeKind",
    "OscError",
    "ParseError",
    "SourceSpan",
    "Token",
    "TokenKind",
    "UNITS",
    "parse",
    "parse_source",
    "pretty",
    "render_diagnostics",
    "tokenize",
]
