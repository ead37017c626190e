"""Typed hypernetworks: nodes, ordered-source hyperedges, partitions.

A hyperedge has a single target node and an ordered tuple of source nodes
(repeats allowed).  Nodes and hyperedges carry type labels; two consistency
conditions tie the labels to the topology (see :func:`validate`).
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

NodeId = Union[int, str]
EdgeId = Union[int, str]

MAX_TYPE_CLASS = 12
_EDGE_KEYS = {"id", "type", "target", "source", "perm"}


def id_key(i: NodeId | EdgeId) -> tuple[bool, NodeId | EdgeId]:
    """Sort key that orders ints before strings without comparing across kinds."""
    return (isinstance(i, str), i)


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperedge:
    id: EdgeId
    type: str
    target: NodeId
    source: tuple[NodeId, ...]
    # permutation image (sigma(0), ..., sigma(k)) for edges created by augmentation
    perm: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", tuple(self.source))
        if self.perm is not None:
            object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        if len(self.source) < 1:
            raise NetworkError(f"hyperedge {self.id!r} has an empty source")

    @property
    def order(self) -> int:
        return len(self.source)


@dataclass(frozen=True)
class Hypernetwork:
    """Immutable typed hypernetwork with scalar node states."""

    nodes: tuple[tuple[NodeId, str], ...]
    edges: tuple[Hyperedge, ...]
    node_dim: int = 1
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        nodes = tuple((nid, str(t)) for nid, t in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.node_dim != 1:
            raise NetworkError("only one-dimensional node states are supported")
        index = {}
        for i, (nid, _) in enumerate(nodes):
            if nid in index:
                raise NetworkError(f"duplicate node id {nid!r}")
            index[nid] = i
        object.__setattr__(self, "_index", index)
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise NetworkError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.target not in index:
                raise NetworkError(f"edge {e.id!r} targets unknown node {e.target!r}")
            for s in e.source:
                if s not in index:
                    raise NetworkError(f"edge {e.id!r} has unknown source node {s!r}")

    @property
    def node_ids(self) -> list[NodeId]:
        return [nid for nid, _ in self.nodes]

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def order(self) -> int:
        """Maximum hyperedge order (0 for an edgeless network)."""
        return max((e.order for e in self.edges), default=0)

    def index(self, v: NodeId) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise NetworkError(f"unknown node id {v!r}") from None

    def node_type(self, v: NodeId) -> str:
        return self.nodes[self.index(v)][1]

    def type_classes(self) -> dict[str, list[NodeId]]:
        classes: dict[str, list[NodeId]] = defaultdict(list)
        for nid, t in self.nodes:
            classes[t].append(nid)
        return dict(classes)

    def edge(self, edge_id: EdgeId) -> Hyperedge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise NetworkError(f"unknown edge id {edge_id!r}")

    def extended(
        self,
        nodes: Iterable[tuple[NodeId, str]] = (),
        edges: Iterable[Hyperedge] = (),
    ) -> Hypernetwork:
        return Hypernetwork(self.nodes + tuple(nodes), self.edges + tuple(edges))

    def relabeled(self, node_map: dict, edge_map: dict | None = None) -> Hypernetwork:
        """Copy with node (and optionally edge) ids renamed."""
        edge_map = edge_map or {}
        nodes = [(node_map.get(v, v), t) for v, t in self.nodes]
        edges = [
            Hyperedge(
                edge_map.get(e.id, e.id),
                e.type,
                node_map.get(e.target, e.target),
                tuple(node_map.get(s, s) for s in e.source),
                e.perm,
            )
            for e in self.edges
        ]
        return Hypernetwork(tuple(nodes), tuple(edges))

    # serialization

    def to_dict(self) -> dict:
        edges = []
        for e in self.edges:
            d = {"id": e.id, "type": e.type, "target": e.target, "source": list(e.source)}
            if e.perm is not None:
                d["perm"] = list(e.perm)
            edges.append(d)
        return {"nodes": [{"id": v, "type": t} for v, t in self.nodes], "edges": edges}

    @classmethod
    def from_dict(cls, doc: dict) -> Hypernetwork:
        unknown = set(doc) - {"nodes", "edges"}
        if unknown:
            raise NetworkError(f"unknown top-level keys: {sorted(unknown)}")
        for d in doc.get("nodes", []):
            if isinstance(d, dict) and set(d) - {"id", "type"}:
                raise NetworkError(f"unknown node keys: {sorted(set(d) - {'id', 'type'})}")
        for d in doc.get("edges", []):
            if isinstance(d, dict) and set(d) - _EDGE_KEYS:
                raise NetworkError(f"unknown edge keys: {sorted(set(d) - _EDGE_KEYS)}")
        try:
            nodes = tuple((d["id"], d["type"]) for d in doc["nodes"])
            edges = tuple(
                Hyperedge(d["id"], d["type"], d["target"], tuple(d["source"]), d.get("perm"))
                for d in doc.get("edges", [])
            )
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed hypernetwork document: {exc}") from exc
        return cls(nodes, edges)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> Hypernetwork:
        return cls.from_dict(json.loads(text))


def load_network(path: str | Path) -> Hypernetwork:
    return Hypernetwork.from_json(Path(path).read_text())


def save_network(h: Hypernetwork, path: str | Path) -> None:
    Path(path).write_text(h.to_json() + "\n")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[int, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(h: Hypernetwork) -> ValidationReport:
    """Check the two type-consistency conditions and report every violation.

    Condition 1: same-type nodes receive the same multiset of incoming edge
    types.  Condition 2: same-type edges have equal order and componentwise
    equal source node types.
    """
    violations: list[tuple[int, str]] = []
    incoming: dict[NodeId, Counter] = {v: Counter() for v in h.node_ids}
    for e in h.edges:
        incoming[e.target][e.type] += 1
    for t, members in sorted(h.type_classes().items()):
        ref = members[0]
        for v in members[1:]:
            if incoming[v] != incoming[ref]:
                violations.append(
                    (1, f"nodes {ref!r} and {v!r} of type {t!r} have incoming edge types "
                        f"{dict(sorted(incoming[ref].items()))} vs {dict(sorted(incoming[v].items()))}")
                )
    by_type: dict[str, list[Hyperedge]] = defaultdict(list)
    for e in h.edges:
        by_type[e.type].append(e)
    for t, es in sorted(by_type.items()):
        ref = es[0]
        ref_types = tuple(h.node_type(s) for s in ref.source)
        for e in es[1:]:
            if e.order != ref.order:
                violations.append(
                    (2, f"edges {ref.id!r} and {e.id!r} of type {t!r} have orders {ref.order} and {e.order}")
                )
                continue
            types = tuple(h.node_type(s) for s in e.source)
            if types != ref_types:
                violations.append(
                    (2, f"edges {ref.id!r} and {e.id!r} of type {t!r} have source node types "
                        f"{ref_types} vs {types}")
                )
    return ValidationReport(tuple(violations))


def input_edges(h: Hypernetwork, v: NodeId) -> list[tuple[str, list[Hyperedge]]]:
    """Edges targeting ``v``, grouped by type label.

    Groups are sorted by label and edges within a group by id; this canonical
    order is what response functions see.
    """
    h.index(v)
    groups: dict[str, list[Hyperedge]] = defaultdict(list)
    for e in h.edges:
        if e.target == v:
            groups[e.type].append(e)
    return [(t, sorted(groups[t], key=lambda e: id_key(e.id))) for t in sorted(groups)]


@dataclass(frozen=True)
class Partition:
    """Disjoint, covering grouping of node ids.

    Blocks are stored canonically (each block sorted, blocks sorted by first
    member) so equal partitions compare equal.
    """

    blocks: tuple[tuple[NodeId, ...], ...]

    def __post_init__(self) -> None:
        blocks = [tuple(sorted(b, key=id_key)) for b in self.blocks]
        if any(len(b) == 0 for b in blocks):
            raise NetworkError("partition blocks must be nonempty")
        flat = [v for b in blocks for v in b]
        if len(flat) != len(set(flat)):
            raise NetworkError("partition blocks overlap")
        blocks.sort(key=lambda b: id_key(b[0]))
        object.__setattr__(self, "blocks", tuple(blocks))

    @classmethod
    def singletons(cls, h: Hypernetwork) -> Partition:
        return cls(tuple((v,) for v in h.node_ids))

    @classmethod
    def from_merges(cls, h: Hypernetwork, merges: Sequence[Sequence[NodeId]]) -> Partition:
        """Partition whose nontrivial blocks are ``merges``; other nodes stay single."""
        used = {v for m in merges for v in m}
        rest = [(v,) for v in h.node_ids if v not in used]
        return cls(tuple(tuple(m) for m in merges) + tuple(rest))

    def check(self, h: Hypernetwork) -> None:
        """Raise unless this partition covers ``h`` and respects node types."""
        flat = {v for b in self.blocks for v in b}
        if flat != set(h.node_ids):
            raise NetworkError("partition does not cover exactly the network's nodes")
        for b in self.blocks:
            if len({h.node_type(v) for v in b}) > 1:
                raise NetworkError(f"block {b!r} mixes node types")

    @property
    def nontrivial(self) -> tuple[tuple[NodeId, ...], ...]:
        return tuple(b for b in self.blocks if len(b) > 1)

    def synchronous_pairs(self) -> Iterator[tuple[NodeId, NodeId]]:
        for b in self.blocks:
            for w in b[1:]:
                yield b[0], w

    def __str__(self) -> str:
        nt = self.nontrivial
        if not nt:
            return "{}"
        return "{" + ", ".join("=".join(str(v) for v in b) for b in nt) + "}"


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of ``items`` (Bell-number many), in a fixed order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def enumerate_typed_partitions(h: Hypernetwork) -> list[Partition]:
    """Every partition refining the node-type partition."""
    classes = h.type_classes()
    for t, members in classes.items():
        if len(members) > MAX_TYPE_CLASS:
            raise NetworkError(
                f"type class {t!r} has {len(members)} nodes; limit is {MAX_TYPE_CLASS}"
            )
    per_class = [list(set_partitions(members)) for _, members in sorted(classes.items())]
    out = [[]]
    for options in per_class:
        out = [acc + opt for acc in out for opt in options]
    return [Partition(tuple(tuple(b) for b in blocks)) for blocks in out]
