"""Key-aware rebalancing of commutative chains.

Chains of the same commutative operation are merged into super nodes. Each
super node is then lowered again: operands are grouped by the key they will
be encrypted under, every group becomes a balanced tree, and the group roots
are combined in a balanced tree. Grouping first means a mixed-key sum needs
one re-encryption per key group rather than one per operand.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from ..errors import VerifyError
from ..heir import COMMUTATIVE, CompGraph, Op, fold_values
from .keys import propagate_keys
from .report import PassReport


@dataclass
class SuperNode:
    op: Op
    root: int
    operands: list[int]   # leaves, left to right
    interior: list[int]   # merged nodes including the root, parents first


def collect_super_node(g: CompGraph, root: int) -> SuperNode:
    """Merge every same-op operand whose single use is its parent."""
    op = g[root].op
    leaves, interior = [], []
    stack = [root]
    while stack:
        nid = stack.pop()
        if nid != root and not (g[nid].op is op and len(g[nid].uses) == 1):
            leaves.append(nid)
            continue
        interior.append(nid)
        stack.extend(reversed(g[nid].operands))
    return SuperNode(op, root, leaves, interior)


def is_super_root(g: CompGraph, nid: int) -> bool:
    node = g[nid]
    if node.op not in COMMUTATIVE:
        return False
    return not (len(node.uses) == 1 and g[node.uses[0]].op is node.op)


class _Builder:
    """Creates balanced trees while tracking depths of the nodes it adds."""

    def __init__(self, g: CompGraph, op: Op, mdepth: dict, level: dict, keys: dict):
        self.g, self.op = g, op
        self.mdepth, self.level, self.keys = mdepth, level, keys
        self.key: str | None = None  # eventual key of nodes created next
        self.created: list[int] = []

    def weight(self, nid: int):
        if self.op is Op.MUL:
            return (self.mdepth[nid], self.level[nid])
        return (self.level[nid],)

    def combine(self, a: int, b: int) -> int:
        g = self.g
        nid = g.add_op(self.op, [a, b])
        bump = self.op is Op.MUL and g[a].is_cipher and g[b].is_cipher
        self.mdepth[nid] = max(self.mdepth[a], self.mdepth[b]) + (1 if bump else 0)
        self.level[nid] = max(self.level[a], self.level[b]) + 1
        self.keys[nid] = self.key
        self.created.append(nid)
        return nid

    def tree(self, items: list[int]) -> int:
        """Depth-aware balanced tree: always join the two shallowest items."""
        heap = [(self.weight(n), seq, n) for seq, n in enumerate(items)]
        heapq.heapify(heap)
        seq = len(items)
        while len(heap) > 1:
            _, _, a = heapq.heappop(heap)
            _, _, b = heapq.heappop(heap)
            c = self.combine(a, b)
            heapq.heappush(heap, (self.weight(c), seq, c))
            seq += 1
        return heap[0][2]

    def fold_consts(self, items: list[int]) -> list[int]:
        consts = [n for n in items if self.g[n].op is Op.CONST]
        if len(consts) < 2:
            return items
        value = self.g[consts[0]].payload()
        for c in consts[1:]:
            value = fold_values(self.op, [value, self.g[c].payload()])
        vector = any(self.g[c].vtype.is_vector for c in consts)
        folded = self.g.add_const(tuple(value) if vector else value[0])
        self.mdepth[folded] = self.level[folded] = 0
        self.keys[folded] = None
        self.created.append(folded)
        first = items.index(consts[0])
        rest = [n for n in items if self.g[n].op is not Op.CONST]
        rest.insert(min(first, len(rest)), folded)
        return rest

    def undo(self) -> None:
        for nid in reversed(self.created):
            self.g.remove_node(nid)


def rebalance(g: CompGraph) -> PassReport:
    """Rebuild commutative chains as key-grouped balanced trees.

    Never raises the multiplicative depth: if grouping by key would make a
    product deeper than the original chain, that chain is left as it was.
    """
    if any(n.op is Op.PRE for n in g.nodes.values()):
        raise VerifyError("rebalance must run before PRE insertion")
    report = PassReport("rebalance")
    keys = propagate_keys(g)
    mdepth: dict[int, int] = {}
    level: dict[int, int] = {}
    for nid in g.topo_order():
        if nid not in g.nodes:
            continue  # merged into an earlier super node
        node = g[nid]
        ops = node.operands
        bump = node.op is Op.MUL and all(g[o].is_cipher for o in ops)
        mdepth[nid] = max((mdepth[o] for o in ops), default=0) + (1 if bump else 0)
        level[nid] = max((level[o] for o in ops), default=0) + (1 if len(ops) == 2 else 0)
        if not is_super_root(g, nid):
            continue
        sn = collect_super_node(g, nid)
        if len(sn.operands) <= 2:
            continue

        groups: dict[str | None, list[int]] = {}
        for leaf in sn.operands:
            groups.setdefault(keys[leaf] if g[leaf].is_cipher else None, []).append(leaf)
        build = _Builder(g, sn.op, mdepth, level, keys)
        roots = []
        for gkey, members in groups.items():
            build.key = gkey
            if gkey is None:
                members = build.fold_consts(members)
            roots.append(build.tree(members))
        build.key = keys[nid]
        new_root = build.tree(roots)
        if new_root == nid:
            continue
        if sn.op is Op.MUL and mdepth[new_root] > mdepth[nid]:
            build.undo()
            continue
        g.replace_uses(nid, new_root)
        for merged in sn.interior:
            g.remove_node(merged)
        mdepth[nid] = mdepth[new_root]
        report.nodes_added += len(build.created)
        report.nodes_removed += len(sn.interior)
    return report
