"""Hand-written lexer for HEDSL source text."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from ..errors import LexError, Span


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer-literal"
    OPERATOR = "operator"
    PUNCT = "punctuation"


KEYWORDS = frozenset({"input", "output", "var", "fun", "for", "return", "plain", "int"})

# Longest match first so `**` beats `*`, `<=` and `<<` beat `<`, `=>` beats `=`.
OPERATORS = ("**", "<<", ">>", "<=", "=>", "+", "-", "*", "=")
PUNCTUATION = (";", ",", ":", "@", "(", ")", "{", "}", "[", "]")

_TRIVIA = re.compile(r"(?:[ \t\r\n\f\v]+|//[^\n]*)*")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span
    # whitespace and comments preceding the lexeme; `trailing` is only set
    # on the final token of a stream
    leading: str = field(default="", compare=False)
    trailing: str = field(default="", compare=False)

    def __repr__(self) -> str:
        return f"Token({self.kind.value}, {self.lexeme!r}, {self.span})"


_TOKEN = re.compile(
    r"(?P<trivia>" + _TRIVIA.pattern + r")"
    r"(?:(?P<ident>" + _IDENT.pattern + r")|(?P<int>" + _INT.pattern + r")"
    r"|(?P<op>" + "|".join(re.escape(op) for op in OPERATORS) + r")"
    r"|(?P<punct>[" + re.escape("".join(PUNCTUATION)) + r"]))?"
)


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, skipping whitespace and ``//`` comments.

    Columns count characters from 1; offsets count UTF-8 bytes from 0.
    """
    tokens: list[Token] = []
    pos, n = 0, len(source)
    line, line_start = 1, 0
    # byte offset of each character position, only needed for non-ASCII input
    byte_at = None if source.isascii() else _byte_offsets(source)
    match, keywords, kinds = _TOKEN.match, KEYWORDS, _KINDS
    while True:
        m = match(source, pos)
        trivia = m.group("trivia")
        if trivia:
            newline = trivia.rfind("\n")
            if newline >= 0:
                line += trivia.count("\n")
                line_start = pos + newline + 1
            pos += len(trivia)
        if pos >= n:
            if tokens and trivia:
                last = tokens[-1]
                tokens[-1] = Token(last.kind, last.lexeme, last.span, last.leading, trivia)
            return tokens
        start = Span(line, pos - line_start + 1, pos if byte_at is None else byte_at[pos])
        kind_name = m.lastgroup
        if kind_name == "trivia":
            raise LexError(f"unexpected character {source[pos]!r}", start)
        text = m.group(kind_name)
        if kind_name == "ident":
            kind = TokenKind.KEYWORD if text in keywords else TokenKind.IDENT
        else:
            kind = kinds[kind_name]
        tokens.append(Token(kind, text, start, trivia))
        pos += len(text)


def _byte_offsets(source: str) -> list[int]:
    offsets, total = [], 0
    for ch in source:
        offsets.append(total)
        total += len(ch.encode("utf-8"))
    offsets.append(total)
    return offsets


_KINDS = {"int": TokenKind.INT, "op": TokenKind.OPERATOR, "punct": TokenKind.PUNCT}


def untokenize(tokens: list[Token]) -> str:
    """Rebuild the original source text from a token stream."""
    return "".join(t.leading + t.lexeme + t.trailing for t in tokens)
