"""Named networks, response functions and sweep protocols for the worked examples.

Response presets bind to a node type's signature positionally: ``G``-type
presets read the self state and the first (and second) input group in
canonical label order; ``F``-type presets read the self state and the group of
highest order (the augmentation hyperedges).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .admissible import ResponseFunction, Signature, assemble, type_signatures
from .augment import AugmentationSpec, augment, stack_tower
from .network import Hyperedge, Hypernetwork


def h(u):
    """sin(u) + cos(u) - 1; nonzero Taylor coefficients of every order."""
    return np.sin(u) + np.cos(u) - 1.0


# core networks; node type "x", edge types "a" (first input) and "b" (second input)


def _core(n: int, a_sources: list[int], b_sources: list[int] | None = None) -> Hypernetwork:
    nodes = tuple((f"x{i}", "x") for i in range(n))
    edges = [Hyperedge(f"a{i}", "a", f"x{i}", (f"x{s}",)) for i, s in enumerate(a_sources)]
    if b_sources is not None:
        edges += [Hyperedge(f"b{i}", "b", f"x{i}", (f"x{s}",)) for i, s in enumerate(b_sources)]
    return Hypernetwork(nodes, tuple(edges))


def example1_core() -> Hypernetwork:
    # x0' = G(x0, x0, x0), x1' = G(x1, x1, x0), x2' = G(x2, x1, x2)
    return _core(3, [0, 1, 1], [0, 0, 2])


def example2_core() -> Hypernetwork:
    # x0' = G(x0, x1), x1' = G(x1, x0), x2' = G(x2, x2)
    return _core(3, [1, 0, 2])


def example3_core() -> Hypernetwork:
    # x0' = G(x0, x1, x0), x1' = G(x1, x2, x0), x2' = G(x2, x2, x0)
    return _core(3, [1, 2, 2], [0, 0, 0])


def example4_core() -> Hypernetwork:
    # feedforward: x0' = G(x0, x1, x2), x1' = G(x1, x2, x3), x2' = G(x2, x3, x3), x3' = G(x3, x3, x3)
    return _core(4, [1, 2, 3, 3], [2, 3, 3, 3])


def symmetric_core() -> Hypernetwork:
    """Fully symmetric 3-cell core: every node hears the other two through one edge type."""
    nodes = tuple((f"x{i}", "x") for i in range(3))
    edges = []
    for i in range(3):
        for j in range(3):
            if i != j:
                edges.append(Hyperedge(f"a{i}{j}", "a", f"x{i}", (f"x{j}",)))
    return Hypernetwork(nodes, tuple(edges))


def augmented(core: Hypernetwork) -> Hypernetwork:
    """Standard augmentation with nodes y0, y1 of type "y", hyperedge type "h", self-loops "s"."""
    return augment(AugmentationSpec(core, node_type="y", edge_type="h", loop_type="s", w_ids=("y0", "y1")))


NETWORKS: dict[str, Callable[[], Hypernetwork]] = {
    "example1.core": example1_core,
    "example2.core": example2_core,
    "example3.core": example3_core,
    "example4.core": example4_core,
    "symmetric.core": symmetric_core,
    "example1": lambda: augmented(example1_core()),
    "example2": lambda: augmented(example2_core()),
    "example3": lambda: augmented(example3_core()),
    "example4": lambda: augmented(example4_core()),
    "counterexample": lambda: augmented(symmetric_core()),
}


def network(name: str) -> Hypernetwork:
    try:
        return NETWORKS[name]()
    except KeyError:
        raise KeyError(f"unknown network preset {name!r}; choose from {sorted(NETWORKS)}") from None


# response presets


def _inputs(sig: Signature, blocks, count: int):
    if len(sig) < count:
        raise ValueError(f"preset needs {count} input groups, signature has {len(sig)}")
    return [blocks[g.edge_type][..., 0, 0] for g in sig[:count]]


def _hyper(sig: Signature, order: int) -> str:
    g = max(sig, key=lambda g: g.order)
    if g.order != order:
        raise ValueError(f"preset needs hyperedges of order {order}, found order {g.order}")
    return g.edge_type


def example1_G(node_type: str, sig: Signature) -> ResponseFunction:
    def G(X0, blocks, lam):
        X1, X2 = _inputs(sig, blocks, 2)
        return -X0 + X1 - X2 + 8 * lam * X0 + 4 * X0**2
    return ResponseFunction(node_type, sig, G, True, "example1.G")


def example2_G(node_type: str, sig: Signature) -> ResponseFunction:
    def G(X0, blocks, lam):
        (X1,) = _inputs(sig, blocks, 1)
        return -X0 - X1 + lam * X0 - X0**3
    return ResponseFunction(node_type, sig, G, True, "example2.G")


def example3_G(node_type: str, sig: Signature) -> ResponseFunction:
    def G(X0, blocks, lam):
        X1, X2 = _inputs(sig, blocks, 2)
        return -0.55 * X1 + 0.25 * X2 + 1.5 * lam * X0 - 0.1 * X0**2
    return ResponseFunction(node_type, sig, G, True, "example3.G")


def example4_G(node_type: str, sig: Signature) -> ResponseFunction:
    def G(X0, blocks, lam):
        X1, X2 = _inputs(sig, blocks, 2)
        return 10 * X1 - 20 * X2 + 15 * lam * X0 - 100 * X0**2
    return ResponseFunction(node_type, sig, G, True, "example4.G")


def example1_F(node_type: str, sig: Signature) -> ResponseFunction:
    label = _hyper(sig, 2)

    def F(Y, blocks, lam):
        X = blocks[label]
        return -5 * Y + 14 * lam - h(10 * X[..., 0] - 12 * X[..., 1]).sum(axis=-1)
    return ResponseFunction(node_type, sig, F, True, "example1.F")


def example4_F(node_type: str, sig: Signature) -> ResponseFunction:
    label = _hyper(sig, 3)

    def F(Y, blocks, lam):
        X = blocks[label]
        u = 120 * X[..., 0] + 40 * X[..., 1] - 100 * X[..., 2]
        return -0.01 * h(u).sum(axis=-1) - 5 * Y - lam
    return ResponseFunction(node_type, sig, F, True, "example4.F")


def symmetric_G(node_type: str, sig: Signature) -> ResponseFunction:
    """lam*X0 - (X0 + sum of inputs) + X0**2; every input block enters symmetrically.

    On the fully symmetric core this has a branch x = (u, u, v) with
    u ~ lam, v ~ -2 lam, so one pair of core nodes stays synchronous.
    """
    def G(X0, blocks, lam):
        total = sum(b.sum(axis=(-2, -1)) for b in blocks.values())
        return lam * X0 - (X0 + total) + X0**2
    return ResponseFunction(node_type, sig, G, True, "symmetric.G")


def linear_G(A: float, B: float, C: float) -> Callable[[str, Signature], ResponseFunction]:
    def make(node_type: str, sig: Signature) -> ResponseFunction:
        def G(X0, blocks, lam):
            X1, X2 = _inputs(sig, blocks, 2)
            return A * X0 + B * X1 + C * X2
        return ResponseFunction(node_type, sig, G, True, "linear.G")
    return make


def linear_F(a: float, b: float, c: float, d: float = 0.0) -> Callable[[str, Signature], ResponseFunction]:
    def make(node_type: str, sig: Signature) -> ResponseFunction:
        label = _hyper(sig, 2)

        def F(Y, blocks, lam):
            X = blocks[label]
            return a * Y + (b * X[..., 0] + c * X[..., 1]).sum(axis=-1) + d * lam
        return ResponseFunction(node_type, sig, F, True, "linear.F")
    return make


RESPONSES: dict[str, Callable[[str, Signature], ResponseFunction]] = {
    "example1.G": example1_G,
    "example1.F": example1_F,
    "example2.G": example2_G,
    "example3.G": example3_G,
    "example4.G": example4_G,
    "example4.F": example4_F,
    "symmetric.G": symmetric_G,
}


def response(name: str, hn: Hypernetwork, node_type: str) -> ResponseFunction:
    try:
        make = RESPONSES[name]
    except KeyError:
        raise KeyError(f"unknown response preset {name!r}; choose from {sorted(RESPONSES)}") from None
    return make(node_type, type_signatures(hn)[node_type])


def responses(hn: Hypernetwork, names: dict[str, str]) -> dict[str, ResponseFunction]:
    return {t: response(name, hn, t) for t, name in names.items()}


# sweep protocols


@dataclass(frozen=True)
class Protocol:
    core: str
    G: str
    F: str
    initial: tuple[float, ...]
    uniform: tuple[float, float, int]
    uniform_horizon: float
    log: tuple[float, float, int]
    log_horizon: float
    predicted: float                 # separation exponent from the core's order of asynchrony
    rival: float | None = None       # competing slope the fit must beat

    def network(self) -> Hypernetwork:
        return network(self.core.removesuffix(".core"))

    def core_network(self) -> Hypernetwork:
        return network(self.core)


P5 = (0.1, -0.2, 0.3, 0.4, 0.5)

EXAMPLES: dict[int, Protocol] = {
    1: Protocol("example1.core", "example1.G", "example1.F", P5,
                (-0.03, 0.03, 600), 5000.0, (5e-4, 0.03, 600), 5000.0, 3.0),
    2: Protocol("example2.core", "example2.G", "example1.F", P5,
                (-0.03, 0.03, 600), 5000.0, (5e-4, 0.03, 600), 5000.0, 1.5),
    3: Protocol("example3.core", "example3.G", "example1.F", P5,
                (-0.03, 0.03, 600), 5000.0, (5e-4, 0.03, 600), 15000.0, 4.0),
    4: Protocol("example4.core", "example4.G", "example4.F",
                (-0.001, -0.002, -0.003, -0.004, 0.001, 0.002),
                (-0.03, 0.03, 600), 2000.0, (3e-5, 0.03, 100), 20000.0, 2.75, rival=2.5),
}


def example_fields(n: int):
    """(augmented network, its field, core network, core field) for example ``n``."""
    p = EXAMPLES[n]
    aug = p.network()
    core = p.core_network()
    f_aug = assemble(aug, responses(aug, {"x": p.G, "y": p.F}))
    f_core = assemble(core, responses(core, {"x": p.G}))
    return aug, f_aug, core, f_core


TOWER_LAYER_INITIAL = (0.4, 0.5, 0.45)


def tower_fields(layers: int):
    """(tower network, its field, layer records) on the Example-1 core.

    Every added node type uses the Example-1 ``F`` formula, summed over all
    of its hyperedge blocks (three for the third node of a layer).
    """
    hn, stack = stack_tower(example1_core(), layers)
    names = {"x": "example1.G", **{layer.node_type: "example1.F" for layer in stack}}
    return hn, assemble(hn, responses(hn, names)), stack


def tower_initial(layers: int) -> tuple[float, ...]:
    return P5[:3] + TOWER_LAYER_INITIAL * layers
