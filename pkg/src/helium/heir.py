"""HEIR: the term-graph intermediate representation.

A :class:`CompGraph` is a DAG of :class:`Node` objects. Each node lists its
operands by id and keeps the inverse relation in ``uses`` (a multiset: a node
appearing twice as an operand of the same user is recorded twice).
"""
from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from . import arith
from .errors import ArityError, CycleError, TypeCheckError, VerifyError
from .types import Secrecy, ValueType, promote


class Op(Enum):
    INPUT = "input"
    OUTPUT = "output"
    CONST = "const"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    POW = "pow"
    ROTL = "rotl"
    ROTR = "rotr"
    PRE = "pre"
    PROJECT = "project"


ARITY = {
    Op.INPUT: 0, Op.CONST: 0,
    Op.OUTPUT: 1, Op.PRE: 1, Op.PROJECT: 1,
    Op.ADD: 2, Op.SUB: 2, Op.MUL: 2, Op.POW: 2, Op.ROTL: 2, Op.ROTR: 2,
}
SYMBOL = {Op.ADD: "+", Op.SUB: "-", Op.MUL: "*", Op.POW: "**", Op.ROTL: "<<", Op.ROTR: ">>"}
BINARY = frozenset(SYMBOL)
COMMUTATIVE = frozenset({Op.ADD, Op.MUL})
# second operand must be a Const node
CONST_RHS = frozenset({Op.POW, Op.ROTL, Op.ROTR})


@dataclass(slots=True)
class Node:
    id: int
    op: Op
    operands: list[int]
    vtype: ValueType
    key: str | None = None
    name: str | None = None      # Input/Output
    party: str | None = None     # Input/Output
    value: int | tuple[int, ...] | None = None  # Const
    index: int | None = None     # Project
    uses: list[int] = field(default_factory=list)

    @property
    def is_cipher(self) -> bool:
        return self.vtype.secrecy is Secrecy.CIPHER

    def payload(self) -> list[int]:
        """Const value as a payload list (scalars have length 1)."""
        return list(self.value) if isinstance(self.value, tuple) else [self.value]


class CompGraph:
    def __init__(self):
        self.nodes: dict[int, Node] = {}
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self.next_id = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, nid: int) -> Node:
        return self.nodes[nid]

    def copy(self) -> "CompGraph":
        new = CompGraph()
        # value types and const payloads are immutable, so only the lists need copying
        new.nodes = {nid: Node(n.id, n.op, list(n.operands), n.vtype, n.key, n.name, n.party,
                               n.value, n.index, list(n.uses))
                     for nid, n in self.nodes.items()}
        new.inputs, new.outputs, new.next_id = list(self.inputs), list(self.outputs), self.next_id
        return new

    # -- construction --------------------------------------------------------

    def _insert(self, op: Op, operands: list[int], vtype: ValueType, **attrs) -> int:
        if len(operands) != ARITY[op]:
            raise ArityError(f"{op.value} takes {ARITY[op]} operand(s), got {len(operands)}")
        for o in operands:
            if o not in self.nodes:
                raise VerifyError(f"operand %{o} of new {op.value} node does not exist")
        nid = self.next_id
        self.next_id += 1
        self.nodes[nid] = Node(nid, op, list(operands), vtype, **attrs)
        for o in operands:
            self.nodes[o].uses.append(nid)
        return nid

    def add_node(self, op: Op, operands: list[int], **attrs) -> int:
        """Insert a node, inferring its value type from the operands."""
        if op is Op.INPUT:
            return self.add_input(attrs["name"], attrs["vtype"], attrs.get("party"), attrs.get("key"))
        if op is Op.CONST:
            return self.add_const(attrs["value"])
        if op is Op.OUTPUT:
            return self.add_output(attrs["name"], *operands, party=attrs.get("party"), key=attrs.get("key"))
        if op is Op.PRE:
            return self.add_pre(*operands, target_key=attrs["key"])
        if op is Op.PROJECT:
            return self.add_project(*operands, index=attrs["index"])
        return self.add_op(op, operands)

    def add_input(self, name: str, vtype: ValueType, party: str | None = None,
                  key: str | None = None) -> int:
        nid = self._insert(Op.INPUT, [], vtype, name=name, party=party,
                           key=key if vtype.is_cipher else None)
        self.inputs.append(nid)
        return nid

    def add_const(self, value: int | tuple[int, ...] | list[int]) -> int:
        if isinstance(value, list):
            value = tuple(value)
        length = len(value) if isinstance(value, tuple) else None
        return self._insert(Op.CONST, [], ValueType(Secrecy.CONST, length), value=value)

    def add_output(self, name: str, operand: int, party: str | None = None,
                   key: str | None = None) -> int:
        self._require(operand)
        nid = self._insert(Op.OUTPUT, [operand], self.nodes[operand].vtype,
                           name=name, party=party, key=key)
        self.outputs.append(nid)
        return nid

    def add_op(self, op: Op, operands: list[int]) -> int:
        if op not in BINARY:
            raise ArityError(f"{op.value} is not a binary operation")
        if len(operands) != 2:
            raise ArityError(f"{op.value} takes 2 operands, got {len(operands)}")
        lhs, rhs = (self._require(o) for o in operands)
        exponent = None
        if op in CONST_RHS:
            if rhs.op is not Op.CONST:
                raise TypeCheckError(f"{op.value} needs a const node as second operand")
            exponent = rhs.value
        vtype = promote(lhs.vtype, rhs.vtype, SYMBOL[op], exponent)
        return self._insert(op, operands, vtype)

    def add_pre(self, operand: int, target_key: str) -> int:
        src = self._require(operand)
        if not src.is_cipher:
            raise TypeCheckError("proxy re-encryption needs a ciphertext operand")
        return self._insert(Op.PRE, [operand], src.vtype, key=target_key)

    def add_project(self, operand: int, index: int) -> int:
        src = self._require(operand)
        if not src.vtype.is_vector or not 0 <= index < src.vtype.length:
            raise TypeCheckError(f"slot {index} out of range for {src.vtype}")
        return self._insert(Op.PROJECT, [operand], ValueType(src.vtype.secrecy), index=index)

    def _require(self, nid: int) -> Node:
        try:
            return self.nodes[nid]
        except KeyError:
            raise VerifyError(f"node %{nid} does not exist") from None

    # -- mutation ------------------------------------------------------------

    def replace_uses(self, old: int, new: int, exclude: frozenset[int] = frozenset()) -> None:
        """Point every operand slot referencing ``old`` at ``new`` instead."""
        if old == new:
            return
        o, n = self._require(old), self._require(new)
        if o.vtype.length != n.vtype.length:
            raise TypeCheckError(f"cannot replace {o.vtype} with {n.vtype}")
        keep = []
        for user in o.uses:
            if user in exclude:
                keep.append(user)
                continue
            u = self.nodes[user]
            # a user listed k times in uses references old in k slots; patch one per entry
            slot = u.operands.index(old)
            u.operands[slot] = new
            n.uses.append(user)
        o.uses = keep

    def replace_operand(self, user: int, slot: int, new: int) -> None:
        u = self.nodes[user]
        old = u.operands[slot]
        self.nodes[old].uses.remove(user)
        u.operands[slot] = new
        self.nodes[new].uses.append(user)

    def remove_node(self, nid: int) -> None:
        node = self._require(nid)
        if node.uses:
            raise VerifyError(f"cannot remove %{nid}: still used by {node.uses}")
        for o in node.operands:
            self.nodes[o].uses.remove(nid)
        del self.nodes[nid]
        if node.op is Op.INPUT:
            self.inputs.remove(nid)
        elif node.op is Op.OUTPUT:
            self.outputs.remove(nid)

    # -- queries -------------------------------------------------------------

    def drains(self) -> list[int]:
        return sorted(nid for nid, node in self.nodes.items() if not node.uses)

    def topo_order(self) -> list[int]:
        """Operands before users; ties broken by ascending id."""
        nodes = self.nodes
        if all(o < nid for nid, node in nodes.items() for o in node.operands):
            return sorted(nodes)  # what the heap below would produce, without the heap
        pending = {nid: len(node.operands) for nid, node in self.nodes.items()}
        heap = [nid for nid, k in pending.items() if k == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            nid = heapq.heappop(heap)
            order.append(nid)
            for user in self.nodes[nid].uses:
                pending[user] -= 1
                if pending[user] == 0:
                    heapq.heappush(heap, user)
        if len(order) != len(self.nodes):
            stuck = sorted(set(self.nodes) - set(order))
            raise CycleError(f"cycle through nodes {stuck[:8]}")
        return order

    def verify(self, keyed: bool = False) -> None:
        """Check structural invariants; with ``keyed`` also the key-uniformity invariants."""
        items = self.nodes.items()
        for nid, node in items:
            if len(node.operands) != ARITY[node.op]:
                raise VerifyError(f"%{nid} {node.op.value} has {len(node.operands)} operands")
            for o in node.operands:
                if o not in self.nodes:
                    raise VerifyError(f"%{nid} references missing %{o}")
            if node.op in CONST_RHS and self.nodes[node.operands[1]].op is not Op.CONST:
                raise VerifyError(f"%{nid} {node.op.value} second operand is not const")
        counted = Counter([(o, nid) for nid, node in items for o in node.operands])
        recorded = Counter([(nid, u) for nid, node in items for u in node.uses])
        if recorded != counted:
            bad = min(k[0] for k in (recorded - counted) + (counted - recorded))
            raise VerifyError(f"use-def mismatch at %{bad}")
        for nid in self.outputs:
            if self.nodes[nid].uses:
                raise VerifyError(f"output %{nid} has uses")
        for lst, op in ((self.inputs, Op.INPUT), (self.outputs, Op.OUTPUT)):
            if len(set(lst)) != len(lst) or any(self.nodes[i].op is not op for i in lst):
                raise VerifyError(f"{op.value} list inconsistent")
            if sorted(lst) != sorted(i for i, n in self.nodes.items() if n.op is op):
                raise VerifyError(f"{op.value} list out of sync with nodes")
        self.topo_order()
        if keyed:
            self.verify_keys()

    def verify_keys(self) -> None:
        for nid, node in self.nodes.items():
            if node.is_cipher and node.key is None:
                raise VerifyError(f"ciphertext %{nid} has no key")
            if node.op is Op.OUTPUT:
                src = self.nodes[node.operands[0]]
                if src.is_cipher and src.key != node.key:
                    raise VerifyError(f"output {node.name} receives key {src.key}, declared {node.key}")
                continue
            cipher_keys = {self.nodes[o].key for o in node.operands if self.nodes[o].is_cipher}
            if node.op is Op.PRE:
                continue
            if len(cipher_keys) > 1:
                raise VerifyError(f"%{nid} mixes keys {sorted(cipher_keys)}")
            if cipher_keys and node.key not in cipher_keys:
                raise VerifyError(f"%{nid} key {node.key} differs from operand key")

    def dump(self) -> str:
        """One line per node in topological order (the ``--emit heir`` format)."""
        lines = []
        for nid in self.topo_order():
            node = self.nodes[nid]
            head = f"{node.vtype}" + (f", {node.key}" if node.key is not None else "")
            text = f"%{nid} = {node.op.value}({head})"
            if node.operands:
                text += " " + " ".join(f"%{o}" for o in node.operands)
            if node.op is Op.CONST:
                text += " " + (str(list(node.value)) if isinstance(node.value, tuple) else str(node.value))
            elif node.op in (Op.INPUT, Op.OUTPUT):
                text += f" name={node.name} party={node.party}"
            elif node.op is Op.PROJECT:
                text += f" slot={node.index}"
            lines.append(text)
        return "\n".join(lines) + ("\n" if lines else "")


def multiplicative_depth(g: CompGraph, order: list[int] | None = None) -> int:
    """Longest count of ciphertext-ciphertext multiplications on any path."""
    depths = mult_depths(g, order)
    return max(depths.values(), default=0)


def mult_depths(g: CompGraph, order: list[int] | None = None) -> dict[int, int]:
    depth: dict[int, int] = {}
    for nid in order or g.topo_order():
        node = g.nodes[nid]
        d = max((depth[o] for o in node.operands), default=0)
        if node.op is Op.MUL and all(g.nodes[o].is_cipher for o in node.operands):
            d += 1
        elif node.op is Op.POW and node.is_cipher:
            e = g.nodes[node.operands[1]].value
            d += max(e - 1, 0).bit_length()  # ceil(log2 e) for e >= 1
        depth[nid] = d
    return depth


def levels(g: CompGraph) -> dict[int, int]:
    """Number of operation nodes on the longest path ending at each node."""
    level: dict[int, int] = {}
    for nid in g.topo_order():
        node = g.nodes[nid]
        base = max((level[o] for o in node.operands), default=0)
        level[nid] = base + (1 if node.op in BINARY else 0)
    return level


def fold_values(op: Op, args: list[list[int]], index: int | None = None) -> list[int]:
    """Evaluate one operation on constant payloads."""
    if op is Op.ADD:
        return arith.add(*args)
    if op is Op.SUB:
        return arith.sub(*args)
    if op is Op.MUL:
        return arith.mul(*args)
    if op is Op.ROTL:
        return arith.rotate_left(args[0], args[1][0])
    if op is Op.ROTR:
        return arith.rotate_right(args[0], args[1][0])
    if op is Op.POW:
        return arith.power(args[0], args[1][0])
    if op is Op.PROJECT:
        return [args[0][index]]
    raise ValueError(f"cannot fold {op.value}")
