"""AST node classes for HEDSL.

Spans are excluded from equality so that structurally identical programs
compare equal regardless of formatting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, TypeVar, Union

from ..errors import Span

_NOSPAN = Span(0, 0, 0)


def _span():
    return field(default=_NOSPAN, compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass(eq=True)
class IntLiteral:
    value: int
    span: Span = _span()


@dataclass(eq=True)
class Identifier:
    name: str
    span: Span = _span()


@dataclass(eq=False)
class BinaryOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span = _span()

    def __eq__(self, other):
        return isinstance(other, BinaryOp) and expr_equal(self, other)


@dataclass(eq=False)
class Call:
    callee: str
    args: list["Expr"]
    span: Span = _span()

    def __eq__(self, other):
        return isinstance(other, Call) and expr_equal(self, other)


Expr = Union[IntLiteral, Identifier, BinaryOp, Call]

BINARY_OPS = ("+", "-", "*", "**", "<<", ">>")


# -- types and statements ----------------------------------------------------

@dataclass
class TypeExpr:
    vector_len: Expr | None = None
    plain: bool = False
    span: Span = _span()


@dataclass
class InputStmt:
    name: str
    type_expr: TypeExpr
    key_label: str | None = None
    party: str | None = None
    span: Span = _span()


@dataclass
class OutputStmt:
    name: str
    expr: Expr
    party: str | None = None
    key_label: str | None = None
    span: Span = _span()


@dataclass
class VarDecl:
    name: str
    type_expr: TypeExpr | None
    init_expr: Expr | None = None
    span: Span = _span()


@dataclass
class VarAssignment:
    name: str
    expr: Expr
    span: Span = _span()


@dataclass
class ReturnStmt:
    expr: Expr
    span: Span = _span()


@dataclass
class Param:
    name: str
    type_expr: TypeExpr | None = None
    span: Span = _span()


@dataclass
class FuncDecl:
    name: str
    params: list[Param]
    body: list["Stmt"]
    span: Span = _span()


@dataclass
class ForStmt:
    loop_var: str
    iter_expr: Expr
    body: list["Stmt"]
    span: Span = _span()


Stmt = Union[InputStmt, OutputStmt, VarDecl, VarAssignment, FuncDecl, ForStmt, ReturnStmt]


@dataclass
class Program:
    statements: list[Stmt]


# -- traversal ---------------------------------------------------------------

def children(expr: Expr) -> list[Expr]:
    if isinstance(expr, BinaryOp):
        return [expr.lhs, expr.rhs]
    if isinstance(expr, Call):
        return expr.args
    return []


T = TypeVar("T")


def postorder(expr: Expr, visit: Callable[[Expr, list[T]], T]) -> T:
    """Evaluate ``visit(node, child_results)`` bottom-up without recursion.

    Deep left-leaning operator chains (thousands of operands) are common in
    generated programs, so every expression walker goes through here.
    """
    results: list[T] = []
    stack: list[tuple[Expr, bool]] = [(expr, False)]
    while stack:
        node, expanded = stack.pop()
        kids = children(node)
        if expanded or not kids:
            k = len(kids)
            args = results[len(results) - k:] if k else []
            if k:
                del results[len(results) - k:]
            results.append(visit(node, args))
        else:
            stack.append((node, True))
            for kid in reversed(kids):
                stack.append((kid, False))
    return results[0]


def expr_equal(a: Expr, b: Expr) -> bool:
    # hash-consing both sides to nested tuples would recurse in tuple __eq__,
    # so compare flattened preorder streams instead
    return _flatten(a) == _flatten(b)


def _flatten(expr: Expr) -> list:
    out = []
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, IntLiteral):
            out.append(("int", node.value))
        elif isinstance(node, Identifier):
            out.append(("id", node.name))
        elif isinstance(node, BinaryOp):
            out.append(("bin", node.op))
            stack.append(node.rhs)
            stack.append(node.lhs)
        else:
            out.append(("call", node.callee, len(node.args)))
            stack.extend(reversed(node.args))
    return out
