"""Lowering of an optimized graph to a serialized circuit.

A circuit is a JSON document: a header with metrics and suggested
parameters, the input and output tables, and a forward-only instruction
list. Instruction ids are dense and follow topological order, so every
argument refers to an earlier instruction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import CircuitFormatError, VerifyError
from .heir import CompGraph, Op, multiplicative_depth
from .passes.report import PassReport

FORMAT_VERSION = 1
DEFAULT_INPUT_BITS = 1

OPCODES = (
    "CONST", "LOAD", "ADD_CC", "ADD_CP", "ADD_PP", "SUB_CC", "SUB_CP", "SUB_PP",
    "MUL_CC", "MUL_CP", "MUL_PP", "ROT_L", "ROT_R", "PROJECT", "PRE", "STORE",
)
_ARITH = {Op.ADD: "ADD", Op.SUB: "SUB", Op.MUL: "MUL"}
_ROT = {Op.ROTL: "ROT_L", Op.ROTR: "ROT_R"}


@dataclass
class Circuit:
    version: int
    metrics: dict
    suggested_params: dict
    inputs: list[dict]
    outputs: list[dict]
    instructions: list[dict]
    keys: list[str] = field(default_factory=list)
    passes: list[dict] = field(default_factory=list)

    FIELDS = ("version", "metrics", "suggested_params", "inputs", "outputs",
              "instructions", "keys", "passes")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Circuit":
        missing = [f for f in cls.FIELDS if f not in data]
        if missing:
            raise CircuitFormatError(f"circuit is missing field {missing[0]!r}")
        if data["version"] != FORMAT_VERSION:
            raise CircuitFormatError(f"unsupported circuit version {data['version']!r}")
        return cls(**{f: data[f] for f in cls.FIELDS})

    def opcode_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for ins in self.instructions:
            counts[ins["opcode"]] = counts.get(ins["opcode"], 0) + 1
        return counts


@dataclass(frozen=True)
class KeyInterface:
    K_I: frozenset[str]
    K_O: frozenset[str]
    required_rekeys: frozenset[tuple[str, str]]
    pre_count: int
    p_min: int
    p_naive: int


def _input_width(input_bits: int | Mapping[str, int], name: str) -> int:
    if isinstance(input_bits, Mapping):
        return input_bits.get(name, DEFAULT_INPUT_BITS)
    return input_bits


def magnitude_bounds(g: CompGraph, input_bits: int | Mapping[str, int] = DEFAULT_INPUT_BITS,
                     order: list[int] | None = None) -> dict[int, int]:
    """Upper bound on the absolute value every node can take.

    An input of width ``w`` is bounded by ``2**w - 1``. Sums and differences
    add bounds and products multiply them; data movement keeps the bound.
    """
    bound: dict[int, int] = {}
    for nid in order or g.topo_order():
        node = g[nid]
        ops = [bound[o] for o in node.operands]
        if node.op is Op.INPUT:
            bound[nid] = (1 << _input_width(input_bits, node.name)) - 1
        elif node.op is Op.CONST:
            bound[nid] = max(abs(v) for v in node.payload())
        elif node.op in (Op.ADD, Op.SUB):
            bound[nid] = ops[0] + ops[1]
        elif node.op is Op.MUL:
            bound[nid] = ops[0] * ops[1]
        elif node.op is Op.POW:
            bound[nid] = ops[0] ** g[node.operands[1]].value
        else:  # rotations, projections, re-encryptions and outputs move data only
            bound[nid] = ops[0]
    return bound


def max_plain_bits(g: CompGraph, input_bits: int | Mapping[str, int] = DEFAULT_INPUT_BITS,
                   order: list[int] | None = None) -> int:
    """Bits needed to hold the largest magnitude any intermediate value can reach."""
    bounds = magnitude_bounds(g, input_bits, order)
    return max((b.bit_length() for b in bounds.values()), default=0) or 1


def _opcode(g: CompGraph, nid: int) -> str:
    node = g[nid]
    if node.op is Op.INPUT:
        return "LOAD"
    if node.op is Op.OUTPUT:
        return "STORE"
    if node.op is Op.CONST:
        return "CONST"
    if node.op is Op.PRE:
        return "PRE"
    if node.op is Op.PROJECT:
        return "PROJECT"
    if node.op in _ROT:
        return _ROT[node.op]
    if node.op in _ARITH:
        n_cipher = sum(g[o].is_cipher for o in node.operands)
        return _ARITH[node.op] + ("_PP", "_CP", "_CC")[n_cipher]
    raise VerifyError(f"%{nid}: no instruction for {node.op.value}")


def emit(g: CompGraph, input_bits: int | Mapping[str, int] = DEFAULT_INPUT_BITS,
         reports: list[PassReport] | None = None) -> Circuit:
    """Lower ``g`` to a circuit. The graph must already satisfy the key invariants."""
    g.verify_keys()
    order = g.topo_order()
    ref = {nid: i for i, nid in enumerate(order)}
    instructions = []
    for nid in order:
        node = g[nid]
        ins = {"id": ref[nid], "opcode": _opcode(g, nid),
               "args": [ref[o] for o in node.operands]}
        if node.is_cipher:
            ins["key"] = node.key
        if node.op is Op.CONST:
            ins["value"] = list(node.value) if isinstance(node.value, tuple) else node.value
        elif node.op in (Op.INPUT, Op.OUTPUT):
            ins["name"] = node.name
        elif node.op is Op.PRE:
            ins["source_key"] = g[node.operands[0]].key
        elif node.op is Op.PROJECT:
            ins["index"] = node.index
        instructions.append(ins)

    def shape(nid: int) -> list[int]:
        length = g[nid].vtype.length
        return [] if length is None else [length]

    inputs = [{"name": g[i].name, "party": g[i].party, "key": g[i].key, "shape": shape(i)}
              for i in g.inputs]
    outputs = [{"name": g[o].name, "party": g[o].party,
                "key": g[o].key if g[o].is_cipher else None, "instr_ref": ref[o]}
               for o in g.outputs]
    depth = multiplicative_depth(g, order)
    bits = max_plain_bits(g, input_bits, order)
    keys = sorted({ins["key"] for ins in instructions if "key" in ins}
                  | {ins["source_key"] for ins in instructions if "source_key" in ins}
                  | {o["key"] for o in outputs if o["key"] is not None})
    return Circuit(
        version=FORMAT_VERSION,
        metrics={
            "mult_depth": depth,
            "pre_count": sum(ins["opcode"] == "PRE" for ins in instructions),
            "max_plain_bits": bits,
            "node_count": len(g),
        },
        suggested_params={"plain_modulus_bits": bits + 1, "depth_budget": depth},
        inputs=inputs,
        outputs=outputs,
        instructions=instructions,
        keys=keys,
        passes=[r.as_dict() for r in reports or []],
    )


def dumps(c: Circuit) -> str:
    return json.dumps(c.to_dict(), indent=2) + "\n"


def loads(text: str) -> Circuit:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"circuit is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CircuitFormatError("circuit must be a JSON object")
    return Circuit.from_dict(data)


def write_circuit(c: Circuit, path: str | Path) -> None:
    Path(path).write_text(dumps(c), encoding="utf-8")


def read_circuit(path: str | Path) -> Circuit:
    return loads(Path(path).read_text(encoding="utf-8"))


def key_interface(c: Circuit) -> KeyInterface:
    """Key sets of a circuit and the bounds on its re-encryption count.

    ``K_I`` holds the keys of ciphertext inputs that some instruction reads;
    ``p_naive`` counts every ciphertext input.
    """
    read = {a for ins in c.instructions for a in ins["args"]}
    live_keys = {ins["key"] for ins in c.instructions
                 if ins["opcode"] == "LOAD" and "key" in ins and ins["id"] in read}
    k_o = frozenset(o["key"] for o in c.outputs if o["key"] is not None)
    rekeys = frozenset((ins["source_key"], ins["key"])
                       for ins in c.instructions if ins["opcode"] == "PRE")
    return KeyInterface(
        K_I=frozenset(live_keys),
        K_O=k_o,
        required_rekeys=rekeys,
        pre_count=sum(ins["opcode"] == "PRE" for ins in c.instructions),
        p_min=len(live_keys - k_o),
        p_naive=sum(1 for i in c.inputs if i["key"] is not None),
    )
