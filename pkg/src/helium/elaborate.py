"""Lower a parsed program to a :class:`CompGraph`.

Functions are monomorphized: each distinct argument signature is elaborated
once into a template graph and then copied into every call site. Loops are
unrolled, ``size()`` is replaced by its constant value, and ``**`` becomes a
square-and-multiply chain.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

from . import arith
from .errors import (
    ArityError, CompileError, FoldOverflowError, LoopBoundError, NameResolutionError,
    RecursiveCallError, Span, TypeCheckError,
)
from .frontend import syntax as S
from .heir import CompGraph, Op, fold_values
from .types import Secrecy, ValueType

INTRINSICS = frozenset({"size"})
DEFAULT_OUTPUT_PARTY = "Party_Out"
DEFAULT_OUTPUT_KEY = "Key_Out"

_BINOPS = {"+": Op.ADD, "-": Op.SUB, "*": Op.MUL, "<<": Op.ROTL, ">>": Op.ROTR}


def default_party(input_name: str) -> str:
    return f"Party_{input_name}"


def default_key(party: str) -> str:
    return f"Key_{party}"


@dataclass
class _Binding:
    node: int | None
    length: object = ...  # int | None once known; Ellipsis until the first assignment
    plain: bool = False
    mutable: bool = True


class Scope:
    """Innermost-first name lookup. Function bodies start a fresh chain."""

    def __init__(self, parent: "Scope | None" = None):
        self.parent = parent
        self.names: dict[str, _Binding] = {}

    def lookup(self, name: str) -> _Binding | None:
        scope = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None

    def declare(self, name: str, binding: _Binding, span: Span | None) -> None:
        if name in self.names:
            raise NameResolutionError(f"{name!r} is already declared in this scope", span)
        self.names[name] = binding


@dataclass
class FunctionTemplate:
    """A function body specialized for one argument signature."""
    name: str
    signature: tuple
    graph: CompGraph
    params: list[int]   # placeholder node per parameter
    result: int


@dataclass
class Elaborator:
    functions: dict[str, S.FuncDecl] = field(default_factory=dict)
    templates: dict[tuple, FunctionTemplate] = field(default_factory=dict)
    graph: CompGraph = field(default_factory=CompGraph)
    _active: list[str] = field(default_factory=list)

    # -- program -------------------------------------------------------------

    def elaborate(self, program: S.Program) -> CompGraph:
        for stmt in program.statements:
            if isinstance(stmt, S.FuncDecl):
                if stmt.name in self.functions or stmt.name in INTRINSICS:
                    raise NameResolutionError(f"function {stmt.name!r} is already defined", stmt.span)
                self.functions[stmt.name] = stmt
        scope = Scope()
        seen_outputs: set[str] = set()
        for stmt in program.statements:
            if isinstance(stmt, S.InputStmt):
                self._input(stmt, scope)
            elif isinstance(stmt, S.OutputStmt):
                if stmt.name in seen_outputs:
                    raise NameResolutionError(f"output {stmt.name!r} is declared twice", stmt.span)
                seen_outputs.add(stmt.name)
                value = self.expr(stmt.expr, scope)
                self.graph.add_output(stmt.name, value,
                                      party=stmt.party or DEFAULT_OUTPUT_PARTY,
                                      key=stmt.key_label or DEFAULT_OUTPUT_KEY)
            elif not isinstance(stmt, S.FuncDecl):
                self.statement(stmt, scope)
        return self.graph

    def _input(self, stmt: S.InputStmt, scope: Scope) -> None:
        length = self.type_length(stmt.type_expr, scope)
        plain = stmt.type_expr.plain
        if plain and stmt.key_label is not None:
            raise TypeCheckError(f"plain input {stmt.name!r} cannot carry a key label", stmt.span)
        party = stmt.party or default_party(stmt.name)
        key = None if plain else (stmt.key_label or default_key(party))
        vtype = ValueType(Secrecy.PLAIN if plain else Secrecy.CIPHER, length)
        nid = self.graph.add_input(stmt.name, vtype, party=party, key=key)
        scope.declare(stmt.name, _Binding(nid, length, plain, mutable=False), stmt.span)

    # -- statements ----------------------------------------------------------

    def statement(self, stmt: S.Stmt, scope: Scope) -> None:
        if isinstance(stmt, S.VarDecl):
            binding = _Binding(None)
            if stmt.type_expr is not None:
                binding.length = self.type_length(stmt.type_expr, scope)
                binding.plain = stmt.type_expr.plain
            if stmt.init_expr is not None:
                binding.node = self._coerce(self.expr(stmt.init_expr, scope), binding, stmt)
            scope.declare(stmt.name, binding, stmt.span)
        elif isinstance(stmt, S.VarAssignment):
            binding = scope.lookup(stmt.name)
            if binding is None:
                raise NameResolutionError(f"assignment to undeclared name {stmt.name!r}", stmt.span)
            if not binding.mutable:
                raise NameResolutionError(f"{stmt.name!r} cannot be reassigned", stmt.span)
            binding.node = self._coerce(self.expr(stmt.expr, scope), binding, stmt)
        elif isinstance(stmt, S.ForStmt):
            self.unroll_for(stmt, scope)
        elif isinstance(stmt, S.ReturnStmt):
            raise NameResolutionError("return outside of a function", stmt.span)
        else:
            raise NameResolutionError(f"{type(stmt).__name__} is only allowed at top level", stmt.span)

    def _coerce(self, nid: int, binding: _Binding, stmt) -> int:
        vtype = self.graph[nid].vtype
        if binding.plain and vtype.is_cipher:
            raise TypeCheckError(f"cannot store a ciphertext in plain variable {stmt.name!r}", stmt.span)
        if binding.length is ...:
            binding.length = vtype.length
            return nid
        if vtype.length == binding.length:
            return nid
        node = self.graph[nid]
        if binding.length is not None and vtype.length is None and node.op is Op.CONST:
            return self.graph.add_const((node.value,) * binding.length)
        want = "int" if binding.length is None else f"int[{binding.length}]"
        raise TypeCheckError(f"{stmt.name!r} is declared {want} but assigned {vtype}", stmt.span)

    def unroll_for(self, stmt: S.ForStmt, scope: Scope) -> None:
        target = self.expr(stmt.iter_expr, scope)
        node = self.graph[target]
        if not node.vtype.is_vector:
            raise LoopBoundError(f"for-loop target must be a fixed-size vector, got {node.vtype}",
                                 stmt.span)
        for i in range(node.vtype.length):
            inner = Scope(scope)
            if node.op is Op.CONST:
                elem = self.graph.add_const(node.value[i])
            else:
                elem = self.graph.add_project(target, i)
            inner.declare(stmt.loop_var, _Binding(elem, None, mutable=False), stmt.span)
            for body_stmt in stmt.body:
                self.statement(body_stmt, inner)

    def type_length(self, texpr: S.TypeExpr, scope: Scope) -> int | None:
        if texpr.vector_len is None:
            return None
        value = self.static_int(texpr.vector_len, scope)
        if value < 1:
            raise TypeCheckError(f"vector length must be positive, got {value}", texpr.span)
        return value

    def static_int(self, expr: S.Expr, scope: Scope) -> int:
        first = self.graph.next_id
        nid = self.expr(expr, scope)
        value = self.const_value(nid)
        self.discard_from(first)
        if value is None or isinstance(value, tuple):
            raise TypeCheckError("expected a compile-time constant integer", expr.span)
        return value

    # -- expressions ---------------------------------------------------------

    def expr(self, expr: S.Expr, scope: Scope) -> int:
        # each visit returns (node id, first id allocated by that subtree) so
        # compile-time-only operands can be rolled back once evaluated
        def visit(node: S.Expr, kids: list[tuple[int, int]]) -> tuple[int, int]:
            first = kids[0][1] if kids else self.graph.next_id
            try:
                return self._visit(node, kids, scope), first
            except CompileError as exc:
                if exc.span is None:
                    exc.span = node.span
                raise

        return S.postorder(expr, visit)[0]

    def _visit(self, node: S.Expr, kids: list[tuple[int, int]], scope: Scope) -> int:
        g = self.graph
        if isinstance(node, S.IntLiteral):
            return g.add_const(node.value)
        if isinstance(node, S.Identifier):
            binding = scope.lookup(node.name)
            if binding is None:
                raise NameResolutionError(f"undefined name {node.name!r}")
            if binding.node is None:
                raise NameResolutionError(f"{node.name!r} is used before it is assigned")
            return binding.node
        if isinstance(node, S.Call):
            return self.call(node, kids)
        (lhs, _), (rhs, rhs_first) = kids
        if node.op == "**":
            exponent = self._const_operand(rhs, "exponent")
            self.discard_from(rhs_first)
            return self.lower_pow(lhs, exponent)
        if node.op in ("<<", ">>"):
            amount = self._const_operand(rhs, "rotation amount")
            if g[rhs].op is not Op.CONST or rhs < rhs_first:
                self.discard_from(rhs_first)
                rhs = g.add_const(amount)
        return g.add_op(_BINOPS[node.op], [lhs, rhs])

    def discard_from(self, first: int) -> None:
        """Drop unused nodes allocated at or after id ``first``."""
        g = self.graph
        for nid in range(g.next_id - 1, first - 1, -1):
            node = g.nodes.get(nid)
            if node is not None and not node.uses and node.op not in (Op.INPUT, Op.OUTPUT):
                g.remove_node(nid)

    def _const_operand(self, nid: int, what: str) -> int:
        value = self.const_value(nid)
        if value is None or isinstance(value, tuple):
            raise TypeCheckError(f"{what} must be a compile-time constant scalar")
        return value

    def const_value(self, nid: int) -> int | tuple[int, ...] | None:
        """Evaluate ``nid`` if it only depends on constants, else ``None``."""
        memo: dict[int, list[int] | None] = {}
        order, stack = [], [nid]
        while stack:
            cur = stack.pop()
            if cur in memo:
                continue
            memo[cur] = None
            order.append(cur)
            stack.extend(self.graph[cur].operands)
        for cur in reversed(order):
            node = self.graph[cur]
            if node.op is Op.CONST:
                memo[cur] = node.payload()
                continue
            args = [memo[o] for o in node.operands]
            if node.op in (Op.INPUT, Op.OUTPUT, Op.PRE) or any(a is None for a in args):
                memo[cur] = None
                continue
            try:
                memo[cur] = fold_values(node.op, args, node.index)
            except arith.Int64Overflow as exc:
                raise FoldOverflowError(str(exc)) from None
        result = memo[nid]
        if result is None:
            return None
        return tuple(result) if self.graph[nid].vtype.is_vector else result[0]

    def lower_pow(self, base: int, exponent: int) -> int:
        """``base ** exponent`` by repeated squaring, multiplicative depth ceil(log2 e)."""
        g = self.graph
        if exponent < 0:
            raise TypeCheckError(f"exponent must be non-negative, got {exponent}")
        if exponent == 0:
            length = g[base].vtype.length
            return g.add_const(1 if length is None else (1,) * length)
        squares = [base]
        while (1 << len(squares)) <= exponent:
            prev = squares[-1]
            squares.append(g.add_op(Op.MUL, [prev, prev]))
        # combine the set bits, shallowest first
        heap = [(j, j, squares[j]) for j in range(len(squares)) if exponent >> j & 1]
        heapq.heapify(heap)
        seq = len(squares)
        while len(heap) > 1:
            da, _, a = heapq.heappop(heap)
            db, _, b = heapq.heappop(heap)
            heapq.heappush(heap, (max(da, db) + 1, seq, g.add_op(Op.MUL, [a, b])))
            seq += 1
        return heap[0][2]

    # -- calls ---------------------------------------------------------------

    def call(self, node: S.Call, kids: list[tuple[int, int]]) -> int:
        args = [nid for nid, _ in kids]
        if node.callee == "size":
            if len(args) != 1:
                raise ArityError(f"size() takes 1 argument, got {len(args)}")
            vtype = self.graph[args[0]].vtype
            if not vtype.is_vector:
                raise TypeCheckError(f"size() needs a vector argument, got {vtype}")
            self.discard_from(kids[0][1])
            return self.graph.add_const(vtype.length)
        func = self.functions.get(node.callee)
        if func is None:
            raise NameResolutionError(f"undefined function {node.callee!r}")
        template = self.monomorphize(func, args)
        return self.instantiate(template, args)

    def signature(self, args: Sequence[int]) -> tuple:
        sig = []
        for a in args:
            n = self.graph[a]
            sig.append(("const", n.value) if n.op is Op.CONST else n.vtype)
        return tuple(sig)

    def monomorphize(self, func: S.FuncDecl, args: Sequence[int]) -> FunctionTemplate:
        """Return the cached specialization of ``func`` for the types of ``args``."""
        if len(args) != len(func.params):
            raise ArityError(f"{func.name}() takes {len(func.params)} argument(s), got {len(args)}")
        for param, a in zip(func.params, args):
            if param.type_expr is not None:
                self._check_param(func, param, self.graph[a].vtype)
        sig = self.signature(args)
        cache_key = (func.name, sig)
        if cache_key in self.templates:
            return self.templates[cache_key]
        if func.name in self._active:
            raise RecursiveCallError(f"recursive call of {func.name!r} "
                                     f"(via {' -> '.join(self._active)})", func.span)
        outer = self.graph
        self.graph = CompGraph()
        self._active.append(func.name)
        try:
            scope = Scope()
            params = []
            for param, entry in zip(func.params, sig):
                if isinstance(entry, tuple):
                    pid = self.graph.add_const(entry[1])
                else:
                    pid = self.graph.add_input(param.name, entry, key="?" if entry.is_cipher else None)
                params.append(pid)
                plain = param.type_expr is not None and param.type_expr.plain
                scope.declare(param.name, _Binding(pid, self.graph[pid].vtype.length, plain), param.span)
            for stmt in func.body[:-1]:
                self.statement(stmt, scope)
            result = self.expr(func.body[-1].expr, scope)
            template = FunctionTemplate(func.name, sig, self.graph, params, result)
        finally:
            self._active.pop()
            self.graph = outer
        self.templates[cache_key] = template
        return template

    def _check_param(self, func: S.FuncDecl, param: S.Param, vtype: ValueType) -> None:
        want = self.type_length(param.type_expr, Scope())
        if want != vtype.length or (param.type_expr.plain and vtype.is_cipher):
            raise TypeCheckError(
                f"argument {param.name!r} of {func.name}() expects "
                f"{'plain ' if param.type_expr.plain else ''}"
                f"{'int' if want is None else f'int[{want}]'}, got {vtype}")

    def instantiate(self, template: FunctionTemplate, args: Sequence[int]) -> int:
        """Copy a template into the current graph, wiring parameters to ``args``."""
        g, t = self.graph, template.graph
        mapping = dict(zip(template.params, args))
        for nid in t.topo_order():
            if nid in mapping:
                continue
            node = t[nid]
            ops = [mapping[o] for o in node.operands]
            if node.op is Op.CONST:
                mapping[nid] = g.add_const(node.value)
            elif node.op is Op.PROJECT:
                mapping[nid] = g.add_project(ops[0], node.index)
            else:
                mapping[nid] = g.add_op(node.op, ops)
        return mapping[template.result]


def elaborate(program: S.Program) -> CompGraph:
    """Lower ``program`` to a fresh computation graph."""
    return Elaborator().elaborate(program)
