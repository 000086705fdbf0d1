"""Plaintext reference semantics, independent of the compiler pipeline.

``oracle_evaluate`` interprets either a parsed program directly or a
computation graph, ignoring keys entirely. It shares no evaluation code
with the elaborator, the passes or the simulator, so agreement between the
two paths is meaningful evidence of correctness.
"""
from __future__ import annotations

from typing import Mapping

from .errors import MissingInputError, NameResolutionError
from .frontend import syntax as S
from .heir import CompGraph, Op

_LO, _HI = -(1 << 63), (1 << 63) - 1

Value = "int | tuple[int, ...]"


def _check(v: int) -> int:
    if not _LO <= v <= _HI:
        raise OverflowError(f"{v} does not fit in 64 signed bits")
    return v


def _lift(a, b, f):
    if isinstance(a, tuple) or isinstance(b, tuple):
        n = len(a) if isinstance(a, tuple) else len(b)
        xs = a if isinstance(a, tuple) else (a,) * n
        ys = b if isinstance(b, tuple) else (b,) * n
        if len(xs) != len(ys):
            raise ValueError(f"length mismatch {len(xs)} vs {len(ys)}")
        return tuple(_check(f(x, y)) for x, y in zip(xs, ys))
    return _check(f(a, b))


def _rotl(v: tuple, k: int) -> tuple:
    k %= len(v)
    return v[k:] + v[:k]


def apply_binary(op: str, a, b):
    """Reference meaning of one binary operator on scalars or tuples."""
    if op == "+":
        return _lift(a, b, lambda x, y: x + y)
    if op == "-":
        return _lift(a, b, lambda x, y: x - y)
    if op == "*":
        return _lift(a, b, lambda x, y: x * y)
    if op == "**":
        if isinstance(a, tuple):
            return tuple(_check(x ** b) for x in a)
        return _check(a ** b)
    if op == "<<":
        return _rotl(a, b)
    if op == ">>":
        return _rotl(a, -b)
    raise ValueError(f"unknown operator {op!r}")


def flatten_bundle(inputs: Mapping) -> dict:
    """Accept a party-keyed bundle or a flat ``name -> value`` map."""
    if inputs and all(isinstance(v, Mapping) for v in inputs.values()):
        flat: dict = {}
        for values in inputs.values():
            flat.update(values)
        return flat
    return dict(inputs)


def _as_value(raw):
    return tuple(raw) if isinstance(raw, list) else raw


def _as_payload(v) -> list[int]:
    return list(v) if isinstance(v, tuple) else [v]


class _Interpreter:
    def __init__(self, program: S.Program, inputs: dict):
        self.inputs = inputs
        self.functions = {s.name: s for s in program.statements if isinstance(s, S.FuncDecl)}
        self.program = program

    def run(self) -> dict[str, list[int]]:
        env: list[dict] = [{}]
        outputs = {}
        for stmt in self.program.statements:
            if isinstance(stmt, S.InputStmt):
                if stmt.name not in self.inputs:
                    raise MissingInputError(f"no value for input {stmt.name}")
                env[0][stmt.name] = _as_value(self.inputs[stmt.name])
            elif isinstance(stmt, S.OutputStmt):
                outputs[stmt.name] = _as_payload(self.eval(stmt.expr, env))
            elif not isinstance(stmt, S.FuncDecl):
                self.execute(stmt, env)
        return outputs

    def execute(self, stmt, env: list[dict]) -> None:
        if isinstance(stmt, S.VarDecl):
            value = None
            if stmt.init_expr is not None:
                value = self.fit(self.eval(stmt.init_expr, env), stmt.type_expr, env)
            env[-1][stmt.name] = [value, stmt.type_expr]
        elif isinstance(stmt, S.VarAssignment):
            for frame in reversed(env):
                if stmt.name in frame:
                    cell = frame[stmt.name]
                    cell[0] = self.fit(self.eval(stmt.expr, env), cell[1], env)
                    return
            raise NameResolutionError(f"undeclared {stmt.name}")
        elif isinstance(stmt, S.ForStmt):
            for element in self.eval(stmt.iter_expr, env):
                env.append({stmt.loop_var: element})
                for inner in stmt.body:
                    self.execute(inner, env)
                env.pop()
        else:
            raise NameResolutionError(f"cannot execute {type(stmt).__name__}")

    def fit(self, value, type_expr, env):
        """Broadcast a scalar into a declared vector variable."""
        if type_expr is None or type_expr.vector_len is None or isinstance(value, tuple):
            return value
        return (value,) * self.eval(type_expr.vector_len, env)

    def lookup(self, name: str, env: list[dict]):
        for frame in reversed(env):
            if name in frame:
                v = frame[name]
                return v[0] if isinstance(v, list) else v
        raise NameResolutionError(f"undefined {name}")

    def eval(self, expr, env: list[dict]):
        def visit(node, kids):
            if isinstance(node, S.IntLiteral):
                return node.value
            if isinstance(node, S.Identifier):
                return self.lookup(node.name, env)
            if isinstance(node, S.Call):
                return self.call(node.callee, kids)
            return apply_binary(node.op, kids[0], kids[1])

        return S.postorder(expr, visit)

    def call(self, name: str, args: list):
        if name == "size":
            return len(args[0])
        func = self.functions[name]
        frame = {}
        for param, arg in zip(func.params, args):
            frame[param.name] = arg
        env = [frame]
        for stmt in func.body[:-1]:
            self.execute(stmt, env)
        return self.eval(func.body[-1].expr, env)


_GRAPH_OPS = {Op.ADD: "+", Op.SUB: "-", Op.MUL: "*", Op.POW: "**", Op.ROTL: "<<", Op.ROTR: ">>"}


def _evaluate_graph(g: CompGraph, inputs: dict) -> dict[str, list[int]]:
    value: dict[int, object] = {}
    outputs = {}
    for nid in g.topo_order():
        node = g[nid]
        args = [value[o] for o in node.operands]
        if node.op is Op.INPUT:
            if node.name not in inputs:
                raise MissingInputError(f"no value for input {node.name}")
            value[nid] = _as_value(inputs[node.name])
        elif node.op is Op.CONST:
            value[nid] = node.value
        elif node.op is Op.PROJECT:
            value[nid] = args[0][node.index]
        elif node.op in (Op.PRE, Op.OUTPUT):
            value[nid] = args[0]
            if node.op is Op.OUTPUT:
                outputs[node.name] = _as_payload(args[0])
        else:
            value[nid] = apply_binary(_GRAPH_OPS[node.op], args[0], args[1])
    return outputs


def oracle_evaluate(target: S.Program | CompGraph, inputs: Mapping) -> dict[str, list[int]]:
    """Plaintext outputs of a program or graph as ``name -> payload``."""
    flat = flatten_bundle(inputs)
    if isinstance(target, CompGraph):
        return _evaluate_graph(target, flat)
    return _Interpreter(target, flat).run()
