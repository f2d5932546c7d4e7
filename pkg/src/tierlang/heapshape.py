"""Canonical pointer-graph shapes, used to compare evaluator results."""

from .values import NodeRef, value_token


def canonical_shape(nodes: dict, arrows: dict, roots: list):
    """Canonicalizes the subgraph reachable from `roots`.

    `nodes` maps node id -> class label, `arrows` maps (id, field) -> value,
    and `roots` is an ordered list of (name, value) pairs.  Node ids are
    renumbered in BFS discovery order so two graphs compare equal iff they
    have the same shape and the same primitive content.
    """
    order: dict[int, int] = {0: 0}
    queue = []
    for _, v in sorted(roots, key=lambda kv: kv[0]):
        if isinstance(v, NodeRef) and v.id not in order:
            order[v.id] = len(order)
            queue.append(v.id)
    out_arrows = {}
    while queue:
        nid = queue.pop(0)
        for (src, field), tgt in sorted(
            ((k, v) for k, v in arrows.items() if k[0] == nid),
            key=lambda kv: kv[0][1],
        ):
            if isinstance(tgt, NodeRef) and tgt.id not in order:
                order[tgt.id] = len(order)
                queue.append(tgt.id)
            out_arrows[(order[src], field)] = (
                ("ref", order[tgt.id]) if isinstance(tgt, NodeRef) else value_token(tgt)
            )
    canon_nodes = tuple(
        sorted((cid, nodes[nid]) for nid, cid in order.items() if nid in nodes)
    )
    canon_roots = tuple(
        (name, ("ref", order[v.id]) if isinstance(v, NodeRef) else value_token(v))
        for name, v in sorted(roots, key=lambda kv: kv[0])
    )
    return (canon_nodes, tuple(sorted(out_arrows.items())), canon_roots)
