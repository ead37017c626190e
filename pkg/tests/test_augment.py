import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersync import presets
from hypersync.admissible import assemble, random_polynomial_field
from hypersync.augment import (
    AugmentationError,
    AugmentationSpec,
    add_third_node,
    augment,
    augmentation_info,
    stack_tower,
    w_node_ids,
)
from hypersync.network import Hyperedge, Hypernetwork, input_edges, validate
from hypersync.symgroup import inversion_parity


def ring_core(n, ids=None):
    ids = ids or [f"v{i}" for i in range(n)]
    nodes = tuple((v, "c") for v in ids)
    edges = tuple(Hyperedge(i, "e", ids[i], (ids[(i + 1) % n],)) for i in range(n))
    return Hypernetwork(nodes, edges)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_edge_counts(n):
    core = ring_core(n)
    aug = augment(AugmentationSpec(core))
    new = [e for e in aug.edges if e.perm is not None]
    assert len(new) == math.factorial(n)
    assert all(e.order == n - 1 for e in new)
    w0, w1 = w_node_ids(aug)
    counts = Counter(e.target for e in new)
    assert counts[w0] == counts[w1] == math.factorial(n) // 2
    loops = [e for e in aug.edges if e.source in ((w0,), (w1,)) and e.target in (w0, w1)]
    assert len(loops) == 2 and len({e.type for e in loops}) == 1
    assert len(aug.edges) == len(core.edges) + math.factorial(n) + 2
    assert validate(aug).ok


def test_example_network_edge_counts():
    assert sum(e.type == "h" for e in presets.network("example1").edges) == 6
    assert sum(e.type == "h" for e in presets.network("example4").edges) == 24


@pytest.mark.parametrize("n", [3, 4])
def test_source_omits_sigma0(n):
    core = ring_core(n)
    aug = augment(AugmentationSpec(core))
    chosen = core.node_ids
    w0, w1 = w_node_ids(aug)
    for e in aug.edges:
        if e.perm is None:
            continue
        missing = set(chosen) - set(e.source)
        assert missing == {chosen[e.perm[0]]}
        assert e.source == tuple(chosen[i] for i in e.perm[1:])
        assert e.target == (w1 if inversion_parity(e.perm) else w0)


def test_identity_edge_targets_w0():
    aug = presets.network("example1")
    ident = next(e for e in aug.edges if e.perm == (0, 1, 2))
    assert ident.target == "y0" == w_node_ids(aug)[0]


def test_w_nodes_survive_relabeling():
    aug = presets.network("example1")
    relabeled = aug.relabeled({"y0": "left", "y1": "right", "x0": "p"})
    assert w_node_ids(relabeled) == ("left", "right")
    assert augmentation_info(relabeled).chosen == ("p", "x1", "x2")


def test_core_only_input_is_rejected():
    with pytest.raises(AugmentationError):
        w_node_ids(presets.network("example1.core"))


def test_small_or_mixed_cores_rejected():
    with pytest.raises(AugmentationError):
        augment(AugmentationSpec(ring_core(2)))
    hn = presets.network("example1")
    with pytest.raises(AugmentationError):
        augment(AugmentationSpec(hn, ("x0", "x1", "y0")))


def test_augment_twice_is_additive():
    core = ring_core(3)
    once = augment(AugmentationSpec(core))
    twice = augment(AugmentationSpec(once, tuple(core.node_ids)))
    assert validate(twice).ok
    assert len(twice.edges) == len(core.edges) + 2 * (6 + 2)
    assert len({e.type for e in twice.edges}) == 1 + 2 * 2


def test_subset_augmentation_allows_other_types():
    core = presets.network("example1")
    aug = augment(AugmentationSpec(core, ("x0", "x1", "x2")))
    assert validate(aug).ok
    assert aug.n == 7


def test_integer_ids_continue_numbering():
    core = ring_core(3, ids=[0, 1, 2])
    aug = augment(AugmentationSpec(core))
    assert aug.node_ids == [0, 1, 2, 3, 4]
    assert [e.id for e in aug.edges] == list(range(len(aug.edges)))


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 4), st.data())
def test_w_components_coincide_on_partial_synchrony(n, data):
    core = ring_core(n)
    aug = augment(AugmentationSpec(core))
    f = random_polynomial_field(aug, 3, seed=data.draw(st.integers(0, 1000)))
    x = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n + 2, max_size=n + 2)))
    i, j = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    x[j] = x[i]
    x[n + 1] = x[n]
    out = f(x, 0.0)
    assert abs(out[n] - out[n + 1]) <= 1e-12 * (1 + abs(out[n]))


def test_tower_one_layer():
    hn, layers = stack_tower(presets.example1_core(), 1)
    assert hn.n == 6 and hn.node_ids[3:] == ["y0", "y1", "y2"]
    assert validate(hn).ok
    assert len(hn.edges) == 6 + 6 + 3 + 3
    sources = sorted(e.source for _, es in input_edges(hn, "y2") for e in es if e.order == 2)
    assert sources == sorted([("x0", "x1"), ("x1", "x0"), ("x0", "x0")])


def test_tower_two_layers_matches_displayed_system():
    hn, layers = stack_tower(presets.example1_core(), 2)
    assert [l.nodes for l in layers] == [("y0", "y1", "y2"), ("z0", "z1", "z2")]
    assert validate(hn).ok

    def blocks(v):
        return sorted(e.source for _, es in input_edges(hn, v) for e in es if e.order == 2)

    assert blocks("z0") == sorted([("y0", "y1"), ("y1", "y2"), ("y2", "y0")])
    assert blocks("z1") == sorted([("y0", "y2"), ("y1", "y0"), ("y2", "y1")])
    assert blocks("z2") == sorted([("y0", "y1"), ("y1", "y0"), ("y0", "y0")])
    # one response per layer type serves all three of its nodes
    f = assemble(hn, presets.responses(hn, {"x": "example1.G", "y": "example1.F", "z": "example1.F"}))
    assert f(np.zeros(9), 0.0).shape == (9,)


def test_tower_errors():
    with pytest.raises(AugmentationError):
        stack_tower(presets.example1_core(), 0)
    with pytest.raises(AugmentationError):
        stack_tower(presets.example1_core(), 10)


def test_third_node_needs_three_node_core():
    aug = presets.network("example4")
    with pytest.raises(AugmentationError):
        add_third_node(aug, augmentation_info(aug))
