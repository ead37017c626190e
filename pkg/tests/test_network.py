import json

import pytest

from hypersync import presets
from hypersync.network import (
    Hyperedge,
    Hypernetwork,
    NetworkError,
    Partition,
    enumerate_typed_partitions,
    input_edges,
    load_network,
    save_network,
    set_partitions,
    validate,
)


def two_cell(loop_source=("b",)):
    nodes = (("a", "x"), ("b", "x"))
    edges = (Hyperedge(0, "e", "a", ("b",)), Hyperedge(1, "e", "b", loop_source))
    return Hypernetwork(nodes, edges)


def test_example1_network_validates():
    h = presets.network("example1")
    assert validate(h).ok
    assert h.n == 5 and len(h.edges) == 6 + 6 + 2
    assert h.order == 2


def test_condition1_violation_reported():
    # node "a" gets an e-edge, node "b" gets none
    h = Hypernetwork((("a", "x"), ("b", "x")), (Hyperedge(0, "e", "a", ("b",)),))
    report = validate(h)
    assert not report.ok
    assert [c for c, _ in report.violations] == [1]


def test_condition2_violation_reported():
    h = Hypernetwork(
        (("a", "x"), ("b", "x"), ("c", "z")),
        (Hyperedge(0, "e", "a", ("b",)), Hyperedge(1, "e", "b", ("c",))),
    )
    report = validate(h)
    assert not report.ok
    assert [c for c, _ in report.violations] == [2]


def test_repeated_sources_allowed():
    h = Hypernetwork((("a", "x"),), (Hyperedge(0, "e", "a", ("a", "a")),))
    assert validate(h).ok


def test_duplicate_ids_rejected():
    with pytest.raises(NetworkError):
        Hypernetwork((("a", "x"), ("a", "x")), ())
    with pytest.raises(NetworkError):
        Hypernetwork((("a", "x"),), (Hyperedge(0, "e", "a", ("a",)), Hyperedge(0, "e", "a", ("a",))))


def test_unknown_endpoint_rejected():
    with pytest.raises(NetworkError):
        Hypernetwork((("a", "x"),), (Hyperedge(0, "e", "a", ("q",)),))


def test_json_round_trip(tmp_path):
    h = presets.network("example4")
    path = tmp_path / "n.json"
    save_network(h, path)
    assert load_network(path) == h


def test_unknown_document_keys_rejected():
    doc = two_cell().to_dict()
    doc["colour"] = "red"
    with pytest.raises(NetworkError):
        Hypernetwork.from_dict(doc)
    doc = two_cell().to_dict()
    doc["edges"][0]["weight"] = 2
    with pytest.raises(NetworkError):
        Hypernetwork.from_json(json.dumps(doc))


def test_input_edges_of_y0_are_the_even_blocks():
    h = presets.network("example1")
    groups = dict((label, edges) for label, edges in input_edges(h, "y0"))
    assert sorted(e.source for e in groups["h"]) == sorted([("x1", "x2"), ("x2", "x0"), ("x0", "x1")])
    assert [e.source for e in groups["s"]] == [("y0",)]
    groups = dict(input_edges(h, "y1"))
    assert sorted(e.source for e in groups["h"]) == sorted([("x2", "x1"), ("x0", "x2"), ("x1", "x0")])


def test_input_edges_of_core_node():
    h = presets.network("example1")
    groups = input_edges(h, "x2")
    assert [label for label, _ in groups] == ["a", "b"]
    assert [e.source for _, es in groups for e in es] == [("x1",), ("x2",)]


def test_set_partition_counts_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]


def test_typed_partitions_respect_types():
    h = presets.network("example1")
    parts = enumerate_typed_partitions(h)
    # Bell(3) * Bell(2)
    assert len(parts) == 10
    for p in parts:
        for b in p.blocks:
            assert len({h.node_type(v) for v in b}) == 1


def test_partition_mixing_types_rejected():
    h = presets.network("example1")
    with pytest.raises(NetworkError):
        Partition.from_merges(h, [["x0", "y0"]]).check(h)


def test_partition_canonical_form():
    h = presets.network("example1")
    assert Partition.from_merges(h, [["x1", "x0"]]) == Partition.from_merges(h, [["x0", "x1"]])
    assert str(Partition.singletons(h)) == "{}"
    assert str(Partition.from_merges(h, [["x0", "x1"], ["y1", "y0"]])) == "{x0=x1, y0=y1}"
