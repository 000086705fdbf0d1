"""Canonical HEDSL formatting and a debug dump of the AST."""
from __future__ import annotations

from . import syntax as S

PRECEDENCE = {"<<": 1, ">>": 1, "+": 2, "-": 2, "*": 3, "**": 4}
_ATOM = 5


def format_expr(expr: S.Expr) -> str:
    def visit(node, kids):
        if isinstance(node, S.IntLiteral):
            return str(node.value), _ATOM
        if isinstance(node, S.Identifier):
            return node.name, _ATOM
        if isinstance(node, S.Call):
            return f"{node.callee}({', '.join(text for text, _ in kids)})", _ATOM
        prec = PRECEDENCE[node.op]
        (lt, lp), (rt, rp) = kids
        right_assoc = node.op == "**"
        if lp < prec or (right_assoc and lp == prec):
            lt = f"({lt})"
        if rp < prec or (not right_assoc and rp == prec):
            rt = f"({rt})"
        return f"{lt} {node.op} {rt}", prec

    return S.postorder(expr, visit)[0]


def format_type(texpr: S.TypeExpr) -> str:
    base = "int" if texpr.vector_len is None else f"int[{format_expr(texpr.vector_len)}]"
    return f"plain {base}" if texpr.plain else base


def _stmt_lines(stmt: S.Stmt, indent: str) -> list[str]:
    if isinstance(stmt, S.InputStmt):
        text = f"input {stmt.name}: {format_type(stmt.type_expr)}"
        if stmt.key_label is not None:
            text += f" @{stmt.key_label}"
        if stmt.party is not None:
            text += f" <= {stmt.party}"
        return [indent + text + ";"]
    if isinstance(stmt, S.OutputStmt):
        text = f"output {stmt.name}"
        if stmt.party is not None:
            text += f" => {stmt.party}"
        if stmt.key_label is not None:
            text += f" @{stmt.key_label}"
        return [indent + f"{text}: {format_expr(stmt.expr)};"]
    if isinstance(stmt, S.VarDecl):
        text = f"var {stmt.name}"
        if stmt.type_expr is not None:
            text += f": {format_type(stmt.type_expr)}"
        if stmt.init_expr is not None:
            text += f" = {format_expr(stmt.init_expr)}"
        return [indent + text + ";"]
    if isinstance(stmt, S.VarAssignment):
        return [indent + f"{stmt.name} = {format_expr(stmt.expr)};"]
    if isinstance(stmt, S.ReturnStmt):
        return [indent + f"return {format_expr(stmt.expr)};"]
    if isinstance(stmt, S.FuncDecl):
        params = ", ".join(
            p.name if p.type_expr is None else f"{p.name}: {format_type(p.type_expr)}"
            for p in stmt.params
        )
        head = f"fun {stmt.name}({params}) {{"
    else:
        head = f"for ({stmt.loop_var} : {format_expr(stmt.iter_expr)}) {{"
    lines = [indent + head]
    for inner in stmt.body:
        lines.extend(_stmt_lines(inner, indent + "    "))
    lines.append(indent + "}")
    return lines


def pretty_print(program: S.Program) -> str:
    """Render ``program`` as canonical source; parsing the result yields an equal AST."""
    lines: list[str] = []
    for stmt in program.statements:
        lines.extend(_stmt_lines(stmt, ""))
    return "\n".join(lines) + ("\n" if lines else "")


def dump_ast(program: S.Program) -> str:
    """Indented tree dump used by ``--emit ast``."""
    out: list[str] = []

    def expr_lines(expr: S.Expr, depth: int) -> None:
        stack = [(expr, depth)]
        while stack:
            node, d = stack.pop()
            pad = "  " * d
            if isinstance(node, S.IntLiteral):
                out.append(f"{pad}IntLiteral {node.value}")
            elif isinstance(node, S.Identifier):
                out.append(f"{pad}Identifier {node.name}")
            elif isinstance(node, S.BinaryOp):
                out.append(f"{pad}BinaryOp {node.op}")
                stack.append((node.rhs, d + 1))
                stack.append((node.lhs, d + 1))
            else:
                out.append(f"{pad}Call {node.callee}")
                stack.extend((a, d + 1) for a in reversed(node.args))

    def stmt_lines(stmt: S.Stmt, depth: int) -> None:
        pad = "  " * depth
        name = type(stmt).__name__
        if isinstance(stmt, S.InputStmt):
            out.append(f"{pad}{name} {stmt.name}: {format_type(stmt.type_expr)}"
                       f" key={stmt.key_label} party={stmt.party}")
        elif isinstance(stmt, S.OutputStmt):
            out.append(f"{pad}{name} {stmt.name} key={stmt.key_label} party={stmt.party}")
            expr_lines(stmt.expr, depth + 1)
        elif isinstance(stmt, S.VarDecl):
            texpr = "?" if stmt.type_expr is None else format_type(stmt.type_expr)
            out.append(f"{pad}{name} {stmt.name}: {texpr}")
            if stmt.init_expr is not None:
                expr_lines(stmt.init_expr, depth + 1)
        elif isinstance(stmt, S.VarAssignment):
            out.append(f"{pad}{name} {stmt.name}")
            expr_lines(stmt.expr, depth + 1)
        elif isinstance(stmt, S.ReturnStmt):
            out.append(f"{pad}{name}")
            expr_lines(stmt.expr, depth + 1)
        elif isinstance(stmt, S.FuncDecl):
            out.append(f"{pad}{name} {stmt.name}({', '.join(p.name for p in stmt.params)})")
            for inner in stmt.body:
                stmt_lines(inner, depth + 1)
        else:
            out.append(f"{pad}{name} {stmt.loop_var}")
            expr_lines(stmt.iter_expr, depth + 2)
            for inner in stmt.body:
                stmt_lines(inner, depth + 1)

    for stmt in program.statements:
        stmt_lines(stmt, 0)
    return "\n".join(out) + ("\n" if out else "")
