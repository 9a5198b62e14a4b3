"""Tensor products of partitions and symbols.

The symbol of ``Op(s_1) (x) ... (x) Op(s_n)`` at the multi-index
``(j_1, ..., j_n)`` is the Kronecker product ``s_1(j_1) (x) ... (x) s_n(j_n)``
with row pairs ``(r, s)`` and column pairs ``(p, q)`` flattened row-major,
i.e. ``entry[(r, s), (p, q)] = s_1(j)[r, p] * s_2(k)[s, q]``.

Norms and traces of tensors are computed in product form from the factors.
The direct multi-index sums are kept alongside as independent checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import MatrixSymbol, Partition
from .errors import DimensionMismatchError, InvalidParameterError
from .spectral import (
    SchattenEstimate,
    TraceEstimate,
    TruncationPolicy,
    operator_norm,
    schatten_norm,
    singular_values_block,
    trace,
)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class ProductPartition:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise InvalidParameterError("a product partition needs at least two factors")

    def _check(self, index):
        if len(index) != len(self.factors):
            raise DimensionMismatchError(
                f"multi-index {index} has length {len(index)}, expected {len(self.factors)}"
            )

    def dim(self, index) -> int:
        self._check(index)
        return math.prod(p.dim(j) for p, j in zip(self.factors, index))

    def rectangle(self, l_max: int):
        """All multi-indices with every component ``<= l_max``, lexicographic."""
        return itertools.product(*(range(p.count(l_max)) for p in self.factors))


class TensorSymbol:
    """Lazily evaluated symbol of a tensor product of invariant operators."""

    def __init__(self, factors):
        factors = tuple(factors)
        if len(factors) < 2:
            raise InvalidParameterError("a tensor symbol needs at least two factors")
        self.factors = factors
        self.partition = ProductPartition(tuple(f.partition for f in factors))

    def block(self, index) -> np.ndarray:
        self.partition._check(index)
        return reduce(kron, (f.block(j) for f, j in zip(self.factors, index)))

    def multiplicity(self, index) -> int:
        self.partition._check(index)
        return math.prod(f.multiplicity(j) for f, j in zip(self.factors, index))


def tensor_symbols(factors) -> TensorSymbol:
    return TensorSymbol(factors)


def _product_flags(ests):
    return all(e.converged for e in ests)


def tensor_schatten_norm(ts: TensorSymbol, p: float,
                         t: TruncationPolicy | None = None) -> SchattenEstimate:
    ests = tuple(schatten_norm(f, p, t) for f in ts.factors)
    return SchattenEstimate(
        value=math.prod(e.value for e in ests),
        p=float(p),
        blocks_used=math.prod(e.blocks_used for e in ests),
        last_increment=max(e.last_increment for e in ests),
        converged=_product_flags(ests),
        raw_value=math.prod(e.raw_value for e in ests),
        factors=ests,
    )


def tensor_trace(ts: TensorSymbol, t: TruncationPolicy | None = None) -> TraceEstimate:
    ests = tuple(trace(f, t) for f in ts.factors)
    return TraceEstimate(
        value=reduce(lambda a, b: a * b, (e.value for e in ests)),
        blocks_used=math.prod(e.blocks_used for e in ests),
        converged=_product_flags(ests),
        raw_value=reduce(lambda a, b: a * b, (e.raw_value for e in ests)),
        factors=ests,
    )


def tensor_operator_norm(ts: TensorSymbol, t: TruncationPolicy | None = None) -> SchattenEstimate:
    ests = tuple(operator_norm(f, t) for f in ts.factors)
    return SchattenEstimate(
        value=math.prod(e.value for e in ests),
        p=math.inf,
        blocks_used=math.prod(e.blocks_used for e in ests),
        last_increment=max(e.last_increment for e in ests),
        converged=_product_flags(ests),
        note=ests[0].note,
        factors=ests,
    )


# direct multi-index sums --------------------------------------------------

def direct_schatten_norm(ts: TensorSymbol, p: float, l_max: int) -> float:
    """Sum over the multi-index rectangle of each Kronecker block's Schatten sum."""
    total = 0.0
    for idx in ts.partition.rectangle(l_max):
        sv = singular_values_block(ts.block(idx))
        total += ts.multiplicity(idx) * float(np.sum(sv ** p))
    return total ** (1.0 / p)


def direct_trace(ts: TensorSymbol, l_max: int) -> complex:
    total = 0j
    for idx in ts.partition.rectangle(l_max):
        total += ts.multiplicity(idx) * complex(np.trace(ts.block(idx)))
    return total


def direct_operator_norm(ts: TensorSymbol, l_max: int) -> float:
    return max(float(singular_values_block(ts.block(idx))[0])
               for idx in ts.partition.rectangle(l_max))


def block_norm_envelope(ts: TensorSymbol, l_max: int) -> np.ndarray:
    """Largest block norm over each shell ``max(index) == r``, ``r = 0..l_max``."""
    env = np.zeros(l_max + 1)
    for idx in ts.partition.rectangle(l_max):
        r = max(idx)
        env[r] = max(env[r], float(singular_values_block(ts.block(idx))[0]))
    return env


def product_partition(*parts: Partition) -> ProductPartition:
    return ProductPartition(parts)
