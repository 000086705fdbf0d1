from __future__ import annotations

from .. import arith
from ..errors import FoldOverflowError
from ..heir import CompGraph, Op, fold_values
from .report import PassReport

_NOT_FOLDABLE = frozenset({Op.INPUT, Op.OUTPUT, Op.CONST, Op.PRE})


def constant_fold(g: CompGraph) -> PassReport:
    """Replace every live operation whose operands are all constants by its value.

    One sweep in topological order reaches the fixpoint: a folded node's
    users are visited afterwards and see the new constant.
    """
    report = PassReport("fold")
    for nid in g.topo_order():
        node = g[nid]
        if node.op in _NOT_FOLDABLE or not node.uses:
            continue
        operands = [g[o] for o in node.operands]
        if not all(o.op is Op.CONST for o in operands):
            continue
        try:
            values = fold_values(node.op, [o.payload() for o in operands], node.index)
        except arith.Int64Overflow as exc:
            raise FoldOverflowError(f"constant folding %{nid}: {exc}") from None
        const = g.add_const(tuple(values) if node.vtype.is_vector else values[0])
        g.replace_uses(nid, const)
        report.nodes_added += 1
    return report
