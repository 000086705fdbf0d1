"""Placement of proxy re-encryption (PRE) operations."""
from __future__ import annotations

from ..elaborate import DEFAULT_OUTPUT_KEY
from ..errors import VerifyError
from ..heir import CompGraph, Op
from .keys import reachable_output_keys, resolve_target
from .report import PassReport


def insert_pre(g: CompGraph, naive: bool = False) -> PassReport:
    """Label every node with a key and insert the PRE nodes that requires.

    Nodes are visited in topological order, so all operand keys are known
    when a node is reached. A node whose ciphertext operands share one key
    inherits it. A node mixing keys is assigned the key of the output it
    feeds, and only operands under a different key are re-encrypted. Each
    output whose value arrives under another key gets a final PRE.

    With ``naive`` every ciphertext input is re-encrypted up front to one
    common key (the smallest declared output key) before the same walk.
    """
    if any(n.op is Op.PRE for n in g.nodes.values()):
        raise VerifyError("PRE insertion already ran on this graph")
    report = PassReport("pre-naive" if naive else "pre")
    cache: dict[tuple[int, str], int] = {}

    def pre(operand: int, target: str) -> int:
        if (operand, target) not in cache:
            cache[(operand, target)] = g.add_pre(operand, target)
            report.pre_inserted += 1
        return cache[(operand, target)]

    if naive:
        common = min((g[o].key for o in g.outputs), default=DEFAULT_OUTPUT_KEY)
        for nid in list(g.inputs):
            if g[nid].is_cipher:
                p = pre(nid, common)
                g.replace_uses(nid, p, exclude=frozenset({p}))

    reach = reachable_output_keys(g)
    for nid in g.topo_order():
        node = g[nid]
        if node.op in (Op.INPUT, Op.PRE):
            continue
        if node.op is Op.CONST:
            node.key = None
            continue
        if node.op is Op.OUTPUT:
            src = node.operands[0]
            if g[src].is_cipher and g[src].key != node.key:
                g.replace_operand(nid, 0, pre(src, node.key))
            continue
        found = {g[o].key for o in node.operands if g[o].is_cipher}
        if len(found) <= 1:
            node.key = next(iter(found), None)
            continue
        target = resolve_target(g, nid, reach)
        for slot, o in enumerate(node.operands):
            if g[o].is_cipher and g[o].key != target:
                g.replace_operand(nid, slot, pre(o, target))
        node.key = target
    return report
