from __future__ import annotations

from collections import deque

from ..heir import CompGraph, Op
from .report import PassReport

_KEEP = (Op.INPUT, Op.OUTPUT)


def dead_code_eliminate(g: CompGraph) -> PassReport:
    """Iteratively remove drains other than inputs and outputs.

    Inputs left without uses are kept and reported as warnings.
    """
    report = PassReport("dce")
    work = deque(d for d in g.drains() if g[d].op not in _KEEP)
    while work:
        nid = work.popleft()
        node = g.nodes.get(nid)
        if node is None or node.uses:
            continue
        operands = sorted(set(node.operands))
        g.remove_node(nid)
        report.nodes_removed += 1
        for o in operands:
            if not g[o].uses and g[o].op not in _KEEP:
                work.append(o)
    for nid in g.inputs:
        if not g[nid].uses:
            report.warnings.append(f"input {g[nid].name} unused")
    return report
