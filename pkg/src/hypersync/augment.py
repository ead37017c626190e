"""Augmented hypernetworks and stacked augmentation towers.

Augmenting a core on chosen same-type nodes ``v_0..v_k`` adds two nodes
``w_0, w_1`` of a fresh type, a self-loop on each, and one order-``k``
hyperedge per permutation ``sigma`` of {0..k}: its source is
``(v_sigma(1), ..., v_sigma(k))`` and its target is ``w_sgn(sigma)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .network import Hyperedge, Hypernetwork, NetworkError, NodeId, validate
from .symgroup import PermutationTable, enumerate_sym, inversion_parity

MAX_TOWER_NODES = 32


class AugmentationError(ValueError):
    pass


@dataclass(frozen=True)
class AugmentationSpec:
    core: Hypernetwork
    chosen: tuple[NodeId, ...] | None = None   # defaults to every core node
    node_type: str | None = None
    edge_type: str | None = None
    loop_type: str | None = None
    w_ids: tuple[NodeId, NodeId] | None = None

    def chosen_nodes(self) -> tuple[NodeId, ...]:
        return tuple(self.chosen) if self.chosen is not None else tuple(self.core.node_ids)


@dataclass(frozen=True)
class AugmentationInfo:
    chosen: tuple[NodeId, ...]
    w0: NodeId
    w1: NodeId
    edge_type: str


def fresh_label(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def _fresh_node_ids(h: Hypernetwork, count: int, prefix: str) -> list[NodeId]:
    ids = h.node_ids
    if ids and all(isinstance(v, int) for v in ids):
        top = max(ids)
        return [top + 1 + i for i in range(count)]
    taken = {str(v) for v in ids}
    return [fresh_label(f"{prefix}{i}", taken) for i in range(count)]


def _edge_ids(h: Hypernetwork, labels: Sequence[str]) -> list:
    """Ints continuing the existing numbering when all edge ids are ints, else ``labels``."""
    ids = [e.id for e in h.edges]
    if ids and all(isinstance(i, int) for i in ids):
        top = max(ids)
        return [top + 1 + i for i in range(len(labels))]
    return list(labels)


def augment(spec: AugmentationSpec, table: PermutationTable | None = None) -> Hypernetwork:
    core = spec.core
    chosen = spec.chosen_nodes()
    if len(chosen) < 3:
        raise AugmentationError(f"augmentation needs k+1 >= 3 chosen nodes, got {len(chosen)}")
    if len(set(chosen)) != len(chosen):
        raise AugmentationError("chosen nodes must be distinct")
    try:
        types = {core.node_type(v) for v in chosen}
    except NetworkError as exc:
        raise AugmentationError(str(exc)) from exc
    if len(types) != 1:
        raise AugmentationError(f"chosen nodes span several node types: {sorted(types)}")
    table = table or enumerate_sym(len(chosen))
    if table.size != len(chosen):
        raise AugmentationError(f"permutation table is for {table.size} nodes, not {len(chosen)}")
    report = validate(core)
    if not report.ok:
        raise AugmentationError(f"core does not validate: {report.violations}")

    node_types = {t for _, t in core.nodes}
    edge_types = {e.type for e in core.edges}
    w_type = spec.node_type or fresh_label("w", node_types)
    h_type = spec.edge_type or fresh_label("h", edge_types)
    loop_type = spec.loop_type or fresh_label("loop", edge_types | {h_type})
    if w_type in node_types:
        raise AugmentationError(f"node type {w_type!r} already used by the core")
    if h_type in edge_types or loop_type in edge_types or h_type == loop_type:
        raise AugmentationError("augmentation edge types must be new and distinct")
    w0, w1 = spec.w_ids or _fresh_node_ids(core, 2, f"{w_type}_")
    if w0 in core.node_ids or w1 in core.node_ids or w0 == w1:
        raise AugmentationError(f"w ids {w0!r}, {w1!r} clash")

    perms = list(table.even) + list(table.odd)
    perms.sort(key=lambda p: p.image)
    labels = [f"{h_type}:{''.join(map(str, p.image))}" for p in perms]
    labels += [f"{loop_type}:{w0}", f"{loop_type}:{w1}"]
    ids = _edge_ids(core, labels)
    targets = (w0, w1)
    new_edges = [
        Hyperedge(eid, h_type, targets[p.sign], tuple(chosen[i] for i in p.block_indices), p.image)
        for eid, p in zip(ids, perms)
    ]
    new_edges += [
        Hyperedge(ids[-2], loop_type, w0, (w0,)),
        Hyperedge(ids[-1], loop_type, w1, (w1,)),
    ]
    out = core.extended([(w0, w_type), (w1, w_type)], new_edges)
    report = validate(out)
    if not report.ok:
        raise AugmentationError(f"augmented network does not validate: {report.violations}")
    return out


def augmentation_info(aug: Hypernetwork, edge_type: str | None = None) -> AugmentationInfo:
    """Recover chosen core nodes and (w_0, w_1) from the permutation tags on edges.

    Without ``edge_type`` the most recently added augmentation is used.
    """
    tagged = [e for e in aug.edges if e.perm is not None]
    if edge_type is None:
        if not tagged:
            raise AugmentationError("network carries no augmentation hyperedges")
        edge_type = tagged[-1].type
    tagged = [e for e in tagged if e.type == edge_type]
    if not tagged:
        raise AugmentationError(f"no augmentation hyperedges of type {edge_type!r}")
    size = len(tagged[0].perm)
    targets = {0: set(), 1: set()}
    by_image = {}
    for e in tagged:
        targets[inversion_parity(e.perm)].add(e.target)
        by_image[e.perm] = e
    if len(targets[0]) != 1 or len(targets[1]) != 1 or targets[0] == targets[1]:
        raise AugmentationError("augmentation hyperedges do not split cleanly by parity")
    identity = tuple(range(size))
    swap01 = (1, 0) + tuple(range(2, size))
    if identity not in by_image or swap01 not in by_image:
        raise AugmentationError("augmentation hyperedges are incomplete")
    chosen = (by_image[swap01].source[0],) + by_image[identity].source
    return AugmentationInfo(chosen, targets[0].pop(), targets[1].pop(), edge_type)


def w_node_ids(aug: Hypernetwork, edge_type: str | None = None) -> tuple[NodeId, NodeId]:
    info = augmentation_info(aug, edge_type)
    return info.w0, info.w1


def add_third_node(
    h: Hypernetwork, info: AugmentationInfo, node_id: NodeId | None = None
) -> tuple[Hypernetwork, NodeId]:
    """Add a node of the w-type fed by ``(c0,c1), (c1,c0), (c0,c0)`` from the chosen core.

    It gets the same edge type as the augmentation hyperedges, so one response
    function serves all three added nodes.  Only 3-node cores are supported.
    """
    if len(info.chosen) != 3:
        raise AugmentationError("the third-node construction needs a 3-node core")
    c0, c1, _ = info.chosen
    w_type = h.node_type(info.w0)
    loop_type = next(e.type for e in h.edges if e.target == info.w0 and e.source == (info.w0,))
    if node_id is None:
        if all(isinstance(v, int) for v in h.node_ids):
            node_id = max(h.node_ids) + 1
        else:
            node_id = fresh_label(f"{w_type}_2", {str(v) for v in h.node_ids})
    labels = [f"{info.edge_type}:{node_id}:{i}" for i in range(3)] + [f"{loop_type}:{node_id}"]
    ids = _edge_ids(h, labels)
    sources = [(c0, c1), (c1, c0), (c0, c0)]
    edges = [Hyperedge(ids[i], info.edge_type, node_id, src) for i, src in enumerate(sources)]
    edges.append(Hyperedge(ids[3], loop_type, node_id, (node_id,)))
    out = h.extended([(node_id, w_type)], edges)
    report = validate(out)
    if not report.ok:
        raise AugmentationError(f"third node breaks consistency: {report.violations}")
    return out, node_id


@dataclass(frozen=True)
class TowerLayer:
    node_type: str
    edge_type: str
    nodes: tuple[NodeId, NodeId, NodeId]   # (w0, w1, third)


def stack_tower(
    base_core: Hypernetwork,
    layers: int,
    table: PermutationTable | None = None,
    names: Sequence[str] = ("y", "z", "u", "s", "r", "q", "p", "o", "m"),
) -> tuple[Hypernetwork, list[TowerLayer]]:
    """Iterate augmentation plus third node, each layer using the previous three added nodes as core.

    Layer ``i`` gets node type ``names[i]`` and, for string-id cores, node ids
    ``names[i] + '0'``, ``'1'``, ``'2'``.
    """
    if layers < 1:
        raise AugmentationError("a tower needs at least one layer")
    if base_core.n + 3 * layers > MAX_TOWER_NODES:
        raise AugmentationError(f"{layers} layers exceed the node budget of {MAX_TOWER_NODES}")
    if base_core.n != 3:
        raise AugmentationError("the tower is built on a 3-node core")
    table = table or enumerate_sym(3)
    h = base_core
    chosen = tuple(base_core.node_ids)
    stack = []
    string_ids = not all(isinstance(v, int) for v in base_core.node_ids)
    for i in range(layers):
        name = names[i]
        ids = (f"{name}0", f"{name}1", f"{name}2") if string_ids else (None, None, None)
        edge_types = {e.type for e in h.edges}
        spec = AugmentationSpec(
            h, chosen, node_type=name,
            edge_type=fresh_label(f"h{name}", edge_types),
            loop_type=fresh_label(f"loop{name}", edge_types),
            w_ids=ids[:2] if string_ids else None,
        )
        h = augment(spec, table)
        info = augmentation_info(h, spec.edge_type)
        h, third = add_third_node(h, info, ids[2])
        stack.append(TowerLayer(name, spec.edge_type, (info.w0, info.w1, third)))
        chosen = stack[-1].nodes
    return h, stack
