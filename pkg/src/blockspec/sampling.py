"""Random explicit symbols for self-checks and property tests."""

from __future__ import annotations

import numpy as np

from .core import MatrixSymbol


def random_block(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_explicit_symbol(rng: np.random.Generator, max_blocks: int = 20, max_dim: int = 6,
                           max_multiplicity: int = 1) -> MatrixSymbol:
    """Finite explicit symbol with a random block count, dimensions and entries."""
    n = int(rng.integers(1, max_blocks + 1))
    dims = rng.integers(1, max_dim + 1, size=n)
    blocks = [random_block(rng, int(d)) for d in dims]
    mult = None
    if max_multiplicity > 1:
        mult = [int(m) for m in rng.integers(1, max_multiplicity + 1, size=n)]
    return MatrixSymbol.explicit(blocks, multiplicity=mult)
