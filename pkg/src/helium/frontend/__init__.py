from .lexer import Token, TokenKind, tokenize, untokenize
from .parser import parse, parse_source
from .printer import dump_ast, format_expr, pretty_print
from . import syntax

__all__ = [
    "Token", "TokenKind", "tokenize", "untokenize",
    "parse", "parse_source", "pretty_print", "format_expr", "dump_ast", "syntax",
]
