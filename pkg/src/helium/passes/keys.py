"""Key-label analysis shared by rebalancing and PRE insertion."""
from __future__ import annotations

from ..errors import KeyResolutionError
from ..heir import CompGraph, Op

# eventual key of a mixing node that reaches no output
UNRESOLVED = "<unresolved>"


def reachable_output_keys(g: CompGraph) -> dict[int, frozenset[str]]:
    """Declared keys of every Output reachable from each node."""
    reach: dict[int, frozenset[str]] = {}
    for nid in reversed(g.topo_order()):
        node = g[nid]
        if node.op is Op.OUTPUT:
            reach[nid] = frozenset({node.key})
        else:
            keys: frozenset[str] = frozenset()
            for user in node.uses:
                keys |= reach[user]
            reach[nid] = keys
    return reach


def resolve_target(g: CompGraph, nid: int, reach: dict[int, frozenset[str]]) -> str:
    """Key a mixing node is re-encrypted to: the smallest reachable output key."""
    keys = reach.get(nid)
    if not keys:
        raise KeyResolutionError(f"node %{nid} mixes keys but reaches no output")
    return min(keys)


def propagate_keys(g: CompGraph) -> dict[int, str | None]:
    """Key every node would carry after PRE insertion, without modifying ``g``.

    Plaintext and constant nodes map to ``None``.
    """
    reach = reachable_output_keys(g)
    key: dict[int, str | None] = {}
    for nid in g.topo_order():
        node = g[nid]
        if node.op in (Op.INPUT, Op.PRE):
            key[nid] = node.key if node.is_cipher else None
        elif node.op is Op.OUTPUT:
            key[nid] = node.key if g[node.operands[0]].is_cipher else None
        else:
            found = {key[o] for o in node.operands if key[o] is not None}
            if len(found) <= 1:
                key[nid] = next(iter(found), None)
            else:
                key[nid] = min(reach[nid]) if reach[nid] else UNRESOLVED
    return key
