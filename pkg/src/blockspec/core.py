"""Partitions of a Hilbert space into finite blocks and invariant operators.

Everything lives in coefficient space: a vector is a sparse map from block
index ``l`` to its coefficient column in ``C^{d_l}``, and an invariant
operator is its matrix symbol ``l -> sigma(l)``.  Inner products are
antilinear in the first argument, so ``sigma(l)[m, k] = (T e_l^k, e_l^m)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NonInvarianceError,
    NotUnitaryError,
)

LEAK_TOL = 1e-10
UNITARY_TOL = 1e-12


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class Partition:
    """Block dimensions ``d_l`` of ``H = (+)_l H_l``.

    Dimensions are produced lazily by ``dim_fn`` and memoized, so an infinite
    partition costs nothing until it is queried.  ``size`` is the number of
    blocks, or ``None`` for an infinite partition.
    """

    def __init__(self, dim_fn: Callable[[int], int], size: int | None = None,
                 label_fn: Callable[[int], str] | None = None):
        if size is not None and size < 1:
            raise InvalidParameterError("a partition needs at least one block")
        self._dim_fn = dim_fn
        self.size = size
        self._label_fn = label_fn
        self._dims: dict[int, int] = {}

    @classmethod
    def finite(cls, dims: Iterable[int], labels: Iterable[str] | None = None):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise InvalidParameterError("a partition needs at least one block")
        for i, d in enumerate(dims):
            if d < 1:
                raise InvalidParameterError(f"block {i} has dimension {d} < 1")
        label_fn = None
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            label_fn = labels.__getitem__
        part = cls(dims.__getitem__, size=len(dims), label_fn=label_fn)
        part._dims.update(enumerate(dims))
        return part

    @classmethod
    def constant(cls, d: int = 1, size: int | None = None, label_fn=None):
        if d < 1:
            raise InvalidParameterError(f"block dimension {d} < 1")
        return cls(lambda _l: d, size=size, label_fn=label_fn)

    @property
    def is_finite(self):
        return self.size is not None

    def _check_index(self, l):
        if l < 0 or (self.size is not None and l >= self.size):
            raise IndexError(f"block index {l} outside partition of size {self.size}")

    def dim(self, l: int) -> int:
        d = self._dims.get(l)
        if d is None:
            self._check_index(l)
            d = int(self._dim_fn(l))
            if d < 1:
                raise InvalidParameterError(f"block {l} has dimension {d} < 1")
            self._dims[l] = d
        return d

    def label(self, l: int) -> str:
        self._check_index(l)
        return self._label_fn(l) if self._label_fn else str(l)

    def has(self, l: int) -> bool:
        return l >= 0 and (self.size is None or l < self.size)

    def count(self, l_max: int) -> int:
        """Number of blocks with index ``<= l_max``."""
        n = l_max + 1
        return n if self.size is None else min(n, self.size)

    def __repr__(self):
        shown = [self.dim(l) for l in range(self.count(4))]
        tail = "" if self.size is not None and self.size <= 5 else ", ..."
        return f"Partition(dims=[{', '.join(map(str, shown))}{tail}], size={self.size})"


def check_compatible(a: Partition, b: Partition, indices: Iterable[int]):
    """Raise unless both partitions agree on every index in ``indices``."""
    if a is b:
        return
    for l in indices:
        if not (a.has(l) and b.has(l)) or a.dim(l) != b.dim(l):
            raise DimensionMismatchError(f"partitions disagree at block {l}")


@dataclass(frozen=True)
class FourierCoefficients:
    """Sparse coefficient vector; absent blocks are zero."""

    partition: Partition
    blocks: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for l in sorted(self.blocks):
            v = _readonly(self.blocks[l]).reshape(-1)
            if not self.partition.has(l):
                raise DimensionMismatchError(f"block {l} is not in the partition")
            if v.shape[0] != self.partition.dim(l):
                raise DimensionMismatchError(
                    f"block {l} has length {v.shape[0]}, expected {self.partition.dim(l)}"
                )
            clean[l] = v
        object.__setattr__(self, "blocks", clean)

    @classmethod
    def basis(cls, partition: Partition, l: int, k: int):
        v = np.zeros(partition.dim(l), dtype=complex)
        v[k] = 1.0
        return cls(partition, {l: v})

    def block(self, l: int) -> np.ndarray:
        v = self.blocks.get(l)
        if v is None:
            return np.zeros(self.partition.dim(l), dtype=complex)
        return v

    def flat(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0, dtype=complex)
        return np.concatenate([self.blocks[l] for l in sorted(self.blocks)])


class Structure(str, enum.Enum):
    GENERAL = "general"
    DIAGONAL = "diagonal"
    SCALAR = "scalar"


class MatrixSymbol:
    """Matrix symbol ``l -> sigma(l)`` of an invariant operator.

    For ``DIAGONAL`` and ``SCALAR`` symbols only the diagonal is generated;
    :meth:`block` materializes the dense matrix on demand.  ``multiplicity(l)``
    counts identical copies of block ``l`` inside the full operator and only
    enters Schatten functionals and traces.
    """

    def __init__(self, partition: Partition, block_fn=None, *,
                 structure: Structure = Structure.GENERAL, diag_fn=None,
                 multiplicity_fn: Callable[[int], int] | None = None):
        structure = Structure(structure)
        if structure is Structure.GENERAL and block_fn is None:
            raise InvalidParameterError("general symbols need a block generator")
        if structure is not Structure.GENERAL and diag_fn is None:
            raise InvalidParameterError(f"{structure.value} symbols need a diagonal generator")
        self.partition = partition
        self.structure = structure
        self._block_fn = block_fn
        self._diag_fn = diag_fn
        self._mult_fn = multiplicity_fn

    # constructors -------------------------------------------------------

    @classmethod
    def explicit(cls, blocks, multiplicity=None, labels=None):
        mats = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
        for i, m in enumerate(mats):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatchError(f"block {i} is not square: shape {m.shape}")
        part = Partition.finite([m.shape[0] for m in mats], labels)
        mats = [_readonly(m) for m in mats]
        mult_fn = None
        if multiplicity is not None:
            mult = tuple(int(x) for x in multiplicity)
            if len(mult) != len(mats):
                raise DimensionMismatchError("multiplicity length differs from block count")
            mult_fn = mult.__getitem__
        return cls(part, mats.__getitem__, multiplicity_fn=mult_fn)

    @classmethod
    def from_function(cls, partition, block_fn, multiplicity_fn=None):
        return cls(partition, block_fn, multiplicity_fn=multiplicity_fn)

    @classmethod
    def diagonal(cls, partition, diag_fn, multiplicity_fn=None):
        return cls(partition, structure=Structure.DIAGONAL, diag_fn=diag_fn,
                   multiplicity_fn=multiplicity_fn)

    @classmethod
    def scalar(cls, partition, value_fn, multiplicity_fn=None):
        def diag(l):
            return np.full(partition.dim(l), value_fn(l), dtype=complex)

        sym = cls(partition, structure=Structure.SCALAR, diag_fn=diag,
                  multiplicity_fn=multiplicity_fn)
        sym._value_fn = value_fn
        return sym

    @classmethod
    def identity(cls, partition):
        return cls.scalar(partition, lambda _l: 1.0)

    # evaluation ---------------------------------------------------------

    def multiplicity(self, l: int) -> int:
        if self._mult_fn is None:
            return 1
        m = int(self._mult_fn(l))
        if m < 1:
            raise InvalidParameterError(f"multiplicity {m} < 1 at block {l}")
        return m

    def diag(self, l: int) -> np.ndarray | None:
        """Diagonal of block ``l`` for diagonal/scalar symbols, else ``None``."""
        if self._diag_fn is None:
            return None
        d = np.asarray(self._diag_fn(l), dtype=complex).reshape(-1)
        if d.shape[0] != self.partition.dim(l):
            raise DimensionMismatchError(
                f"diagonal of block {l} has length {d.shape[0]}, "
                f"expected {self.partition.dim(l)}"
            )
        return d

    def block(self, l: int) -> np.ndarray:
        if self._diag_fn is not None:
            return np.diag(self.diag(l))
        m = np.asarray(self._block_fn(l), dtype=complex)
        d = self.partition.dim(l)
        if m.shape != (d, d):
            raise DimensionMismatchError(f"block {l} has shape {m.shape}, expected ({d}, {d})")
        return m

    def __repr__(self):
        return f"MatrixSymbol({self.partition!r}, structure={self.structure.value})"


class BlockUnitary:
    """Per-block unitary change of basis ``l -> U(l)``."""

    def __init__(self, partition: Partition, block_fn, tol: float = UNITARY_TOL):
        self.partition = partition
        self._block_fn = block_fn
        self.tol = tol

    @classmethod
    def explicit(cls, blocks, tol=UNITARY_TOL):
        mats = [_readonly(np.atleast_2d(b)) for b in blocks]
        return cls(Partition.finite([m.shape[0] for m in mats]), mats.__getitem__, tol)

    def block(self, l: int) -> np.ndarray:
        u = np.asarray(self._block_fn(l), dtype=complex)
        d = self.partition.dim(l)
        if u.shape != (d, d):
            raise DimensionMismatchError(f"unitary block {l} has shape {u.shape}")
        res = np.max(np.abs(u @ u.conj().T - np.eye(d)), initial=0.0)
        if res > self.tol:
            raise NotUnitaryError(l, res)
        return u


def plancherel_norm(f: FourierCoefficients) -> float:
    total = 0.0
    for l in sorted(f.blocks):
        v = f.blocks[l]
        total += float(np.vdot(v, v).real)
    return math.sqrt(total)


def apply_symbol(s: MatrixSymbol, f: FourierCoefficients) -> FourierCoefficients:
    """Coefficient-space action ``g(l) = sigma(l) f(l)`` on the stored blocks."""
    check_compatible(s.partition, f.partition, f.blocks)
    out = {}
    for l, v in f.blocks.items():
        d = s.diag(l)
        out[l] = d * v if d is not None else s.block(l) @ v
    return FourierCoefficients(f.partition, out)


def project_block(f: FourierCoefficients, l: int) -> FourierCoefficients:
    if l in f.blocks:
        return FourierCoefficients(f.partition, {l: f.blocks[l]})
    return FourierCoefficients(f.partition, {})


def symbol_of_operator(action: Callable[[FourierCoefficients], FourierCoefficients],
                       partition: Partition, l_max: int,
                       tol: float = LEAK_TOL) -> MatrixSymbol:
    """Recover the symbol of a black-box invariant operator on blocks ``<= l_max``.

    Column ``k`` of ``sigma(l)`` is the ``l``-block of ``action(e_l^k)``.
    Mass landing in any other block beyond ``tol`` raises
    :class:`NonInvarianceError`.
    """
    n = partition.count(l_max)
    blocks = []
    for l in range(n):
        d = partition.dim(l)
        sigma = np.zeros((d, d), dtype=complex)
        for k in range(d):
            g = action(FourierCoefficients.basis(partition, l, k))
            leak2 = sum(float(np.vdot(v, v).real) for j, v in g.blocks.items() if j != l)
            if math.sqrt(leak2) > tol:
                raise NonInvarianceError(l, math.sqrt(leak2))
            sigma[:, k] = g.block(l)
        blocks.append(sigma)
    labels = [partition.label(l) for l in range(n)]
    return MatrixSymbol.explicit(blocks, labels=labels)


def conjugate_by_unitary(s: MatrixSymbol, u: BlockUnitary) -> MatrixSymbol:
    """Symbol in the rotated basis, ``l -> U(l) sigma(l) U(l)^*``.

    Unitarity of ``U(l)`` is verified whenever a block is evaluated.
    """

    def block(l):
        ul = u.block(l)
        return ul @ s.block(l) @ ul.conj().T

    if s.partition.is_finite:
        check_compatible(s.partition, u.partition, range(s.partition.size))
        for l in range(s.partition.size):
            u.block(l)
    mult = s._mult_fn
    return MatrixSymbol(s.partition, block, multiplicity_fn=mult)
