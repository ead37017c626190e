"""Response functions, admissible vector fields and robust synchrony.

Response functions are vectorized.  An evaluator receives

* ``self_state`` with shape ``(...)``,
* ``blocks``: a dict mapping each incoming edge-type label to an array of
  shape ``(..., mult, k)`` holding the source states of the node's edges of
  that type, in canonical edge order,
* ``lam`` broadcastable against ``self_state``,

and returns an array of shape ``(...)``.
"""
from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .network import Hypernetwork, NetworkError, Partition, enumerate_typed_partitions, input_edges

SYMMETRY_TOL = 1e-12
ROBUST_TOL = 1e-9
MAX_MONOMIALS = 200_000

Evaluator = Callable[[np.ndarray, Mapping[str, np.ndarray], np.ndarray], np.ndarray]


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class GroupSignature:
    edge_type: str
    order: int
    mult: int


Signature = tuple[GroupSignature, ...]


def node_signature(h: Hypernetwork, v) -> Signature:
    return tuple(GroupSignature(t, es[0].order, len(es)) for t, es in input_edges(h, v))


def type_signatures(h: Hypernetwork) -> dict[str, Signature]:
    """Signature per node type, taken from the first node of each type."""
    return {t: node_signature(h, members[0]) for t, members in h.type_classes().items()}


@dataclass(frozen=True)
class ResponseFunction:
    node_type: str
    signature: Signature
    evaluate: Evaluator
    symmetric: bool = True
    name: str = ""

    def __call__(self, self_state, blocks, lam):
        return self.evaluate(self_state, blocks, lam)

    def negated(self) -> ResponseFunction:
        ev = self.evaluate
        return ResponseFunction(
            self.node_type, self.signature, lambda s, b, lam: -ev(s, b, lam),
            self.symmetric, f"-{self.name}" if self.name else "",
        )


def zero_response(node_type: str, signature: Signature) -> ResponseFunction:
    return ResponseFunction(
        node_type, signature, lambda s, b, lam: np.zeros(np.broadcast(s, lam).shape), True, "zero"
    )


@dataclass
class _TypeLayout:
    node_idx: np.ndarray                         # (n_t,)
    sources: dict[str, np.ndarray]               # label -> (n_t, mult, k)


class AdmissibleField:
    """Vector field assembled node-by-node from per-type response functions.

    Call with a state array of shape ``(..., n)`` and a parameter ``lam``
    (scalar or shape ``(...)``); returns the same shape as the state.
    """

    def __init__(self, network: Hypernetwork, responses: Mapping[str, ResponseFunction]):
        self.network = network
        self.responses = dict(responses)
        self._layouts: dict[str, _TypeLayout] = {}
        problems = []
        for t, members in network.type_classes().items():
            if t not in self.responses:
                problems.append(f"no response for node type {t!r}")
                continue
            resp = self.responses[t]
            for v in members:
                sig = node_signature(network, v)
                if sig != resp.signature:
                    problems.append(
                        f"node {v!r} (type {t!r}) has signature {_fmt_sig(sig)}, "
                        f"response expects {_fmt_sig(resp.signature)}"
                    )
            if problems:
                continue
            idx = np.array([network.index(v) for v in members], dtype=np.intp)
            sources = {}
            for g in resp.signature:
                rows = []
                for v in members:
                    es = dict(input_edges(network, v))[g.edge_type]
                    rows.append([[network.index(s) for s in e.source] for e in es])
                sources[g.edge_type] = np.array(rows, dtype=np.intp).reshape(len(members), g.mult, g.order)
            self._layouts[t] = _TypeLayout(idx, sources)
        if problems:
            raise SignatureError("; ".join(problems))

    @property
    def n(self) -> int:
        return self.network.n

    def inputs(self, x, node_type: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        """Self states ``(..., n_t)`` and blocks ``(..., n_t, mult, k)`` for one node type."""
        lay = self._layouts[node_type]
        return x[..., lay.node_idx], {label: x[..., src] for label, src in lay.sources.items()}

    def __call__(self, x, lam=0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        batch = np.broadcast_shapes(x.shape[:-1], lam.shape)
        x = np.broadcast_to(x, batch + x.shape[-1:])
        lam = np.broadcast_to(lam, batch)[..., None]
        out = np.empty(x.shape)
        for t, lay in self._layouts.items():
            selfs, blocks = self.inputs(x, t)
            out[..., lay.node_idx] = self.responses[t](selfs, blocks, lam)
        return out

    def with_response(self, node_type: str, response: ResponseFunction) -> AdmissibleField:
        return AdmissibleField(self.network, {**self.responses, node_type: response})


def _fmt_sig(sig: Signature) -> str:
    return "[" + ", ".join(f"{g.edge_type}:{g.mult}x{g.order}" for g in sig) + "]"


def assemble(h: Hypernetwork, responses: Mapping[str, ResponseFunction]) -> AdmissibleField:
    return AdmissibleField(h, responses)


def verify_admissibility(field: AdmissibleField, trials: int = 32, seed=0) -> float:
    """Largest change of any component under random same-type block shuffles.

    States and ``lam`` are drawn uniformly from [-1, 1].
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-1.0, 1.0, field.n)
        lam = rng.uniform(-1.0, 1.0)
        for t in field._layouts:
            selfs, blocks = field.inputs(x, t)
            shuffled = {}
            for label, b in blocks.items():
                order = np.argsort(rng.random(b.shape[:-1]), axis=-1)
                shuffled[label] = np.take_along_axis(b, order[..., None], axis=-2)
            resp = field.responses[t]
            diff = np.abs(resp(selfs, shuffled, lam) - resp(selfs, blocks, lam))
            worst = max(worst, float(np.max(diff, initial=0.0)))
    return worst


# random symmetrized polynomial responses


@dataclass(frozen=True)
class PolynomialBasis:
    """All monomials of degree <= ``degree`` in a response's input variables.

    Variables are ordered as: self state, then the flattened blocks of each
    group in signature order.  ``orbit`` labels each monomial by its orbit
    under permutations of same-type blocks.
    """

    signature: Signature
    degree: int
    exponents: np.ndarray   # (M, nvars)
    orbit: np.ndarray       # (M,)
    n_orbits: int

    @property
    def nvars(self) -> int:
        return self.exponents.shape[1]

    def symmetrize(self, coeffs: np.ndarray) -> np.ndarray:
        """Average coefficients over all block permutations (orbit means)."""
        sums = np.bincount(self.orbit, weights=coeffs, minlength=self.n_orbits)
        counts = np.bincount(self.orbit, minlength=self.n_orbits)
        return (sums / counts)[self.orbit]


@lru_cache(maxsize=64)
def polynomial_basis(signature: Signature, degree: int) -> PolynomialBasis:
    if degree < 0:
        raise ValueError("degree must be >= 0")
    nvars = 1 + sum(g.mult * g.order for g in signature)
    count = sum(_n_monomials(nvars, d) for d in range(degree + 1))
    if count > MAX_MONOMIALS:
        raise ValueError(
            f"{count} monomials in {nvars} variables at degree {degree} exceeds {MAX_MONOMIALS}"
        )
    rows = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = np.zeros(nvars, dtype=np.int64)
            for i in combo:
                e[i] += 1
            rows.append(e)
    E = np.array(rows, dtype=np.int64).reshape(-1, nvars)
    keys = [E[:, :1]]
    col = 1
    base = degree + 1
    for g in signature:
        width = g.mult * g.order
        blk = E[:, col:col + width].reshape(-1, g.mult, g.order)
        codes = np.zeros(blk.shape[:2], dtype=np.int64)
        for j in range(g.order):
            codes = codes * base + blk[:, :, j]
        keys.append(np.sort(codes, axis=1))
        col += width
    key = np.concatenate(keys, axis=1)
    _, orbit = np.unique(key, axis=0, return_inverse=True)
    orbit = orbit.reshape(-1)
    return PolynomialBasis(signature, degree, E, orbit, int(orbit.max()) + 1 if len(orbit) else 0)


def _n_monomials(nvars: int, d: int) -> int:
    return comb(nvars + d - 1, d)


@dataclass(frozen=True)
class PolynomialResponse:
    """Polynomial in (self, blocks); independent of ``lam``."""

    basis: PolynomialBasis
    coefficients: np.ndarray = field(repr=False)

    def __call__(self, self_state, blocks, lam):
        self_state = np.asarray(self_state, dtype=float)
        parts = [self_state[..., None]]
        for g in self.basis.signature:
            b = np.asarray(blocks[g.edge_type], dtype=float)
            parts.append(b.reshape(b.shape[:-2] + (g.mult * g.order,)))
        v = np.concatenate(parts, axis=-1)
        mons = np.prod(v[..., None, :] ** self.basis.exponents, axis=-1)
        out = mons @ self.coefficients
        return np.broadcast_to(out, np.broadcast_shapes(out.shape, np.shape(lam))).copy()


def random_polynomial_response(node_type: str, signature: Signature, degree: int, rng) -> ResponseFunction:
    basis = polynomial_basis(signature, degree)
    raw = rng.uniform(-1.0, 1.0, len(basis.exponents))
    poly = PolynomialResponse(basis, basis.symmetrize(raw))
    return ResponseFunction(node_type, signature, poly, True, f"poly{degree}")


def random_polynomial_field(h: Hypernetwork, degree: int, seed=0) -> AdmissibleField:
    """Admissible field with a random block-symmetric polynomial response per type.

    Raw coefficients are uniform in [-1, 1]; each is replaced by the mean over
    its orbit under permutations of same-type blocks.
    """
    rng = np.random.default_rng(seed)
    sigs = type_signatures(h)
    return assemble(
        h, {t: random_polynomial_response(t, sigs[t], degree, rng) for t in sorted(sigs)}
    )


# robust synchrony


@dataclass(frozen=True)
class RobustnessVerdict:
    partition: Partition
    samples: int
    max_violation: float

    @property
    def robust(self) -> bool:
        return self.max_violation <= ROBUST_TOL


def robustness_degree(h: Hypernetwork) -> int:
    k = h.order
    return k * (k + 1) // 2


def _sync_point(h: Hypernetwork, p: Partition, rng, count: int) -> np.ndarray:
    x = np.empty((count, h.n))
    for b in p.blocks:
        vals = rng.uniform(-1.0, 1.0, count)
        for v in b:
            x[:, h.index(v)] = vals
    return x


def _violation(h: Hypernetwork, p: Partition, f: AdmissibleField, rng, points: int) -> float:
    pairs = [(h.index(v), h.index(w)) for v, w in p.synchronous_pairs()]
    if not pairs:
        return 0.0
    x = _sync_point(h, p, rng, points)
    fx = f(x, 0.0)
    a, b = np.array(pairs).T
    gap = np.max(np.abs(fx[:, a] - fx[:, b]), axis=1)
    return float(np.max(gap / (1.0 + np.max(np.abs(fx), axis=1))))


def _sample_fields(h: Hypernetwork, samples: int, seed, degree: int | None):
    degree = robustness_degree(h) if degree is None else degree
    streams = np.random.SeedSequence(seed).spawn(samples)
    return [random_polynomial_field(h, degree, np.random.default_rng(s)) for s in streams]


def is_robust_synchrony(
    h: Hypernetwork,
    p: Partition,
    samples: int = 64,
    seed=0,
    points: int = 16,
    degree: int | None = None,
    fields: Sequence[AdmissibleField] | None = None,
) -> RobustnessVerdict:
    """Sample random admissible polynomial fields and test invariance of Syn_P.

    ``degree`` defaults to k(k+1)/2 for the network order k.
    """
    p.check(h)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    fields = fields if fields is not None else _sample_fields(h, samples, seed, degree)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 1]))
    worst = max(_violation(h, p, f, rng, points) for f in fields)
    return RobustnessVerdict(p, len(fields), worst)


def synchrony_census(h: Hypernetwork, samples: int = 64, seed=0, points: int = 16,
                     degree: int | None = None) -> list[RobustnessVerdict]:
    """Robustness verdict for every type-compatible partition."""
    partitions = enumerate_typed_partitions(h)
    fields = _sample_fields(h, samples, seed, degree)
    return [is_robust_synchrony(h, p, seed=seed, points=points, fields=fields) for p in partitions]


def find_robust_synchronies(h: Hypernetwork, samples: int = 64, seed=0, points: int = 16) -> list[Partition]:
    return [v.partition for v in synchrony_census(h, samples, seed, points) if v.robust]


__all__ = [
    "AdmissibleField", "GroupSignature", "NetworkError", "PolynomialBasis", "PolynomialResponse",
    "ResponseFunction", "RobustnessVerdict", "SignatureError", "assemble", "find_robust_synchronies",
    "is_robust_synchrony", "node_signature", "polynomial_basis", "random_polynomial_field",
    "random_polynomial_response", "robustness_degree", "synchrony_census", "type_signatures",
    "verify_admissibility", "zero_response",
]
