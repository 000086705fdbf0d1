"""Recursive-descent parser producing :mod:`syntax` trees.

Accepted grammar (liberalized where the published figure and the example
programs disagree)::

    Program    := Stmt*
    Stmt       := InputStmt | OutputStmt | VarDecl | VarAssignment
                | FuncDecl | ForStmt | ReturnStmt
    TypeExpr   := plain? int ( '[' Expr ']' )?
    InputStmt  := input ID ':' TypeExpr ('@' ID)? ('<=' ID)? ';'
    OutputStmt := output ID ('=>' ID)? ('@' ID)? ':' Expr ';'
    VarDecl    := var ID (':' TypeExpr)? ('=' Expr)? ';'
    VarAssign  := ID '=' Expr ';'
    ReturnStmt := return Expr ';'
    FuncDecl   := fun ID '(' (Param (',' Param)*)? ')' '{' Stmt+ '}'
    Param      := ID (':' TypeExpr)?
    ForStmt    := for '(' ID ':' Expr ')' '{' Stmt+ '}'

    Expr  := Shift
    Shift := Add (('<<' | '>>') Add)*
    Add   := Mul (('+' | '-') Mul)*
    Mul   := Unary ('*' Unary)*
    Unary := '-' Unary | Power
    Power := Atom ('**' Unary)?
    Atom  := INT | ID | ID '(' (Expr (',' Expr)*)? ')' | '(' Expr ')'
"""
from __future__ import annotations

from ..errors import Diagnostic, ParseError, Span
from . import syntax as S
from .lexer import Token, TokenKind, tokenize


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _describe(tok: Token | None) -> str:
    return "end of input" if tok is None else repr(tok.lexeme)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.errors: list[Diagnostic] = []

    # -- token helpers -------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, lexeme: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok is not None and tok.lexeme == lexeme and tok.kind is not TokenKind.IDENT

    def here(self) -> Span:
        tok = self.peek()
        if tok is not None:
            return tok.span
        if self.tokens:
            last = self.tokens[-1]
            return Span(last.span.line, last.span.column + len(last.lexeme),
                        last.span.offset + len(last.lexeme.encode("utf-8")))
        return Span(1, 1, 0)

    def fail(self, expected: str) -> _Fail:
        return _Fail(Diagnostic(self.here(), expected, _describe(self.peek())))

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise self.fail(repr(lexeme))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.pos += 1
            return True
        return False

    def ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            raise self.fail("identifier")
        self.pos += 1
        return tok

    def recover(self) -> None:
        while (tok := self.peek()) is not None:
            if tok.lexeme == ";":
                self.pos += 1
                return
            if tok.lexeme == "}":
                return
            self.pos += 1

    # -- statements ----------------------------------------------------------

    def program(self) -> S.Program:
        stmts = self.block_items(context="top", closing=None)
        if self.errors:
            raise ParseError(self.errors)
        return S.Program(stmts)

    def block_items(self, context: str, closing: str | None) -> list[S.Stmt]:
        stmts: list[S.Stmt] = []
        while (tok := self.peek()) is not None and not (closing and tok.lexeme == closing):
            start = self.pos
            try:
                stmts.append(self.statement(context))
            except _Fail as exc:
                self.errors.append(exc.diag)
                self.recover()
                if self.pos == start:
                    # stray closing brace at top level
                    self.pos += 1
        return stmts

    def statement(self, context: str) -> S.Stmt:
        tok = self.peek()
        span = tok.span
        if self.at("input") or self.at("output") or self.at("fun"):
            if context != "top":
                raise _Fail(Diagnostic(span, "statement allowed inside a block", repr(tok.lexeme)))
            if self.at("input"):
                return self.input_stmt()
            if self.at("output"):
                return self.output_stmt()
            return self.func_decl()
        if self.at("var"):
            return self.var_decl()
        if self.at("for"):
            return self.for_stmt(context)
        if self.at("return"):
            if context != "function":
                raise _Fail(Diagnostic(span, "statement outside of a function body", "'return'"))
            self.pos += 1
            expr = self.expr()
            self.expect(";")
            return S.ReturnStmt(expr, span)
        if tok.kind is TokenKind.IDENT and self.at("=", 1):
            name = self.ident().lexeme
            self.expect("=")
            expr = self.expr()
            self.expect(";")
            return S.VarAssignment(name, expr, span)
        raise self.fail("statement")

    def type_expr(self) -> S.TypeExpr:
        span = self.here()
        plain = self.accept("plain")
        self.expect("int")
        length = None
        if self.accept("["):
            length = self.expr()
            self.expect("]")
        return S.TypeExpr(length, plain, span)

    def input_stmt(self) -> S.InputStmt:
        span = self.expect("input").span
        name = self.ident().lexeme
        self.expect(":")
        texpr = self.type_expr()
        key = party = None
        if self.accept("@"):
            key = self.ident().lexeme
        if self.accept("<="):
            party = self.ident().lexeme
        self.expect(";")
        return S.InputStmt(name, texpr, key, party, span)

    def output_stmt(self) -> S.OutputStmt:
        span = self.expect("output").span
        name = self.ident().lexeme
        party = key = None
        if self.accept("=>"):
            party = self.ident().lexeme
        if self.accept("@"):
            key = self.ident().lexeme
        self.expect(":")
        expr = self.expr()
        self.expect(";")
        return S.OutputStmt(name, expr, party, key, span)

    def var_decl(self) -> S.VarDecl:
        span = self.expect("var").span
        name = self.ident().lexeme
        texpr = self.type_expr() if self.accept(":") else None
        init = self.expr() if self.accept("=") else None
        self.expect(";")
        return S.VarDecl(name, texpr, init, span)

    def body(self, context: str) -> list[S.Stmt]:
        self.expect("{")
        open_span = self.here()
        stmts = self.block_items(context, closing="}")
        self.expect("}")
        if not stmts:
            raise _Fail(Diagnostic(open_span, "at least one statement", "'}'"))
        return stmts

    def func_decl(self) -> S.FuncDecl:
        span = self.expect("fun").span
        name = self.ident().lexeme
        self.expect("(")
        params: list[S.Param] = []
        if not self.at(")"):
            while True:
                ptok = self.ident()
                ptype = self.type_expr() if self.accept(":") else None
                params.append(S.Param(ptok.lexeme, ptype, ptok.span))
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.body("function")
        returns = [i for i, st in enumerate(body) if isinstance(st, S.ReturnStmt)]
        if returns != [len(body) - 1]:
            raise _Fail(Diagnostic(span, f"function {name!r} to end with its only return statement",
                                   f"{len(returns)} return statement(s)"))
        return S.FuncDecl(name, params, body, span)

    def for_stmt(self, context: str) -> S.ForStmt:
        span = self.expect("for").span
        self.expect("(")
        var = self.ident().lexeme
        self.expect(":")
        target = self.expr()
        self.expect(")")
        body = self.body("loop" if context == "top" else context + "-loop")
        return S.ForStmt(var, target, body, span)

    # -- expressions ---------------------------------------------------------

    def expr(self) -> S.Expr:
        return self.binary_level(("<<", ">>"), self.additive)

    def additive(self) -> S.Expr:
        return self.binary_level(("+", "-"), self.multiplicative)

    def multiplicative(self) -> S.Expr:
        return self.binary_level(("*",), self.unary)

    def binary_level(self, ops: tuple[str, ...], operand) -> S.Expr:
        lhs = operand()
        while (tok := self.peek()) is not None and tok.kind is TokenKind.OPERATOR and tok.lexeme in ops:
            self.pos += 1
            lhs = S.BinaryOp(tok.lexeme, lhs, operand(), tok.span)
        return lhs

    def unary(self) -> S.Expr:
        if self.at("-"):
            tok = self.tokens[self.pos]
            self.pos += 1
            return S.BinaryOp("-", S.IntLiteral(0, tok.span), self.unary(), tok.span)
        return self.power()

    def power(self) -> S.Expr:
        base = self.atom()
        if self.at("**"):
            tok = self.tokens[self.pos]
            self.pos += 1
            return S.BinaryOp("**", base, self.unary(), tok.span)
        return base

    def atom(self) -> S.Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail("expression")
        if tok.kind is TokenKind.INT:
            self.pos += 1
            return S.IntLiteral(int(tok.lexeme), tok.span)
        if tok.kind is TokenKind.IDENT:
            self.pos += 1
            if not self.accept("("):
                return S.Identifier(tok.lexeme, tok.span)
            args: list[S.Expr] = []
            if not self.at(")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
            self.expect(")")
            return S.Call(tok.lexeme, args, tok.span)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.fail("expression")


def parse(tokens: list[Token]) -> S.Program:
    """Parse a token stream; raises :class:`ParseError` listing every error found."""
    return Parser(tokens).program()


def parse_source(source: str) -> S.Program:
    return parse(tokenize(source))
