"""Permutations of {0..k} split by parity, and the even/odd aggregation identities.

The block of a permutation ``sigma`` on a state ``x = (x_0, ..., x_k)`` is
``(x[sigma(1)], ..., x[sigma(k)])``.  Summing the monomial
``X_1 * X_2**2 * ... * X_k**k`` over the even blocks and subtracting the odd
sum gives exactly the Vandermonde product ``prod_{i>j} (x_i - x_j)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

MAX_SYM = 9


class DegeneratePointError(ValueError):
    pass


def inversion_parity(image: tuple[int, ...]) -> int:
    inv = sum(1 for i in range(len(image)) for j in range(i + 1, len(image)) if image[i] > image[j])
    return inv % 2


def cycle_parity(image: tuple[int, ...]) -> int:
    """Parity from the cycle decomposition: (n - #cycles) mod 2."""
    seen = [False] * len(image)
    cycles = 0
    for start in range(len(image)):
        if not seen[start]:
            cycles += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = image[j]
    return (len(image) - cycles) % 2


@dataclass(frozen=True)
class Permutation:
    image: tuple[int, ...]
    sign: int

    @property
    def block_indices(self) -> tuple[int, ...]:
        """Indices feeding the block of this permutation: sigma(1), ..., sigma(k)."""
        return self.image[1:]


@dataclass(frozen=True)
class PermutationTable:
    k: int
    even: tuple[Permutation, ...]
    odd: tuple[Permutation, ...]

    @property
    def size(self) -> int:
        return self.k + 1

    def parity_class(self, parity: int) -> tuple[Permutation, ...]:
        if parity not in (0, 1):
            raise ValueError(f"parity must be 0 or 1, got {parity!r}")
        return self.odd if parity else self.even

    def index_array(self, parity: int) -> np.ndarray:
        """Integer array of shape ((k+1)!/2, k) with the block indices of one class."""
        return _index_array(self.k, parity)

    def blocks(self, x, parity: int) -> np.ndarray:
        """Block family of ``x`` for one parity class, shape (..., (k+1)!/2, k)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.size:
            raise ValueError(f"state has length {x.shape[-1]}, table needs {self.size}")
        return x[..., self.index_array(parity)]


@lru_cache(maxsize=None)
def enumerate_sym(k_plus_1: int) -> PermutationTable:
    """All permutations of {0, ..., k}, lexicographic within each parity class."""
    if not 2 <= k_plus_1 <= MAX_SYM:
        raise ValueError(f"k+1 must lie in [2, {MAX_SYM}], got {k_plus_1}")
    even, odd = [], []
    for image in itertools.permutations(range(k_plus_1)):
        p = Permutation(image, inversion_parity(image))
        (odd if p.sign else even).append(p)
    return PermutationTable(k_plus_1 - 1, tuple(even), tuple(odd))


@lru_cache(maxsize=None)
def _index_array(k: int, parity: int) -> np.ndarray:
    table = enumerate_sym(k + 1)
    arr = np.array([p.block_indices for p in table.parity_class(parity)], dtype=np.intp)
    arr.setflags(write=False)
    return arr


def power_sum_aggregate(blocks) -> np.ndarray:
    """The aggregation polynomial: sum over blocks of ``X_1 * X_2**2 * ... * X_k**k``."""
    blocks = np.asarray(blocks, dtype=float)
    powers = np.arange(1, blocks.shape[-1] + 1)
    return np.prod(blocks ** powers, axis=-1).sum(axis=-1)


def eval_Pk(table: PermutationTable, parity: int, x) -> float:
    return float(power_sum_aggregate(table.blocks(x, parity)))


def vandermonde(x) -> float:
    x = np.asarray(x, dtype=float)
    out = 1.0
    for i in range(len(x)):
        for j in range(i):
            out *= x[i] - x[j]
    return float(out)


BlockFunction = Callable[[np.ndarray], float]


def even_odd_difference(Q: BlockFunction, table: PermutationTable, x) -> float:
    """``Q`` on the even block family minus ``Q`` on the odd one.

    ``Q`` receives an array of shape ((k+1)!/2, k) and should not depend on
    the order of its rows.
    """
    even = table.blocks(x, 0)
    odd = table.blocks(x, 1)
    return float(Q(even)) - float(Q(odd))


def check_factorization(table: PermutationTable, x, rtol: float = 1e-9) -> tuple[float, float, bool]:
    diff = eval_Pk(table, 0, x) - eval_Pk(table, 1, x)
    prod = vandermonde(x)
    return diff, prod, abs(diff - prod) <= rtol * (1.0 + abs(prod))


def factorization_quotient(Q: BlockFunction, table: PermutationTable, x, eps: float = 1e-12) -> float:
    """Even/odd difference of ``Q`` divided by the Vandermonde product."""
    prod = vandermonde(x)
    if abs(prod) <= eps:
        raise DegeneratePointError(f"Vandermonde product {prod:.3e} vanishes at {tuple(x)}")
    return even_odd_difference(Q, table, x) / prod


def half_order(k_plus_1: int) -> int:
    return math.factorial(k_plus_1) // 2
