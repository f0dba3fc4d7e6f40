"""JavaScript subset frontend: lexer, parser, AST model, renderer."""
from .lexer import LexError, Token, tokenize
from .nodes import (
    AstNode,
    NodeKind,
    SourceFile,
    Span,
    finalize_tree,
    iter_tree,
    node_count,
    structurally_equal,
)
from .parser import ParseError, UnsupportedSyntax, parse
from .render import render

__all__ = [
    "AstNode",
    "LexError",
    "NodeKind",
    "ParseError",
    "SourceFile",
    "Span",
    "Token",
    "UnsupportedSyntax",
    "finalize_tree",
    "iter_tree",
    "node_count",
    "parse",
    "render",
    "structurally_equal",
    "tokenize",
]
