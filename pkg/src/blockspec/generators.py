"""Built-in symbols: SU(2) Laplacian powers, the SO(3) Schroedinger family and
torus Fourier multipliers."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import MatrixSymbol, Partition, Structure
from .errors import InvalidParameterError
from .spectral import SchattenEstimate, TruncationPolicy, schatten_norm


def _positive(name, value):
    if not (value > 0) or math.isinf(value):
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")


def half_integer_label(t: int) -> str:
    return str(Fraction(t, 2))


def su2_laplacian_power_symbol(alpha: float) -> MatrixSymbol:
    """Scalar symbol of ``(I - L_SU2)^(-alpha/2)``.

    Block ``t`` stands for the representation of spin ``l = t/2``; its value
    is ``(1 + l(l+1))^(-alpha/2)`` and its multiplicity ``(2l+1)^2``.
    """
    _positive("alpha", alpha)

    def value(t):
        l = t / 2.0
        return (1.0 + l * (l + 1.0)) ** (-alpha / 2.0)

    part = Partition.constant(1, label_fn=half_integer_label)
    return MatrixSymbol.scalar(part, value, multiplicity_fn=lambda t: (t + 1) ** 2)


def su2_tensor_norm(alpha: float, beta: float, p: float,
                    t: TruncationPolicy | None = None) -> SchattenEstimate:
    """Schatten norm of ``(I-L)^(-alpha/2) (x) (I-L)^(-beta/2)`` on SU(2) x SU(2)."""
    for name, v in (("alpha", alpha), ("beta", beta), ("p", p)):
        _positive(name, v)
    a = schatten_norm(su2_laplacian_power_symbol(alpha), p, t)
    b = schatten_norm(su2_laplacian_power_symbol(beta), p, t)
    note = None
    if alpha * p <= 3 or beta * p <= 3:
        note = "summability requires alpha*p > 3 and beta*p > 3; series diverges"
    return SchattenEstimate(
        value=a.value * b.value,
        p=float(p),
        blocks_used=a.blocks_used * b.blocks_used,
        last_increment=max(a.last_increment, b.last_increment),
        converged=a.converged and b.converged,
        raw_value=a.raw_value * b.raw_value,
        note=note,
        factors=(a, b),
    )


def so3_schrodinger_symbol(gamma: float) -> MatrixSymbol:
    """Diagonal symbol of ``I + H_gamma`` on SO(3).

    Block ``l`` has dimension ``2l+1`` with entries
    ``1 + m - gamma m^2 + gamma l(l+1)`` for ``m = -l..l``.
    """
    _positive("gamma", gamma)

    def diag(l):
        m = np.arange(-l, l + 1, dtype=float)
        return 1.0 + m - gamma * m * m + gamma * l * (l + 1.0)

    return MatrixSymbol.diagonal(Partition(lambda l: 2 * l + 1), diag)


def map_diagonal(s: MatrixSymbol, fn) -> MatrixSymbol:
    """Apply ``fn`` entrywise to the diagonal of a diagonal or scalar symbol.

    This is how functions of diagonal operators are formed, e.g.
    ``map_diagonal(so3_schrodinger_symbol(g), lambda d: d ** -2.0)``.
    """
    if s.structure is Structure.GENERAL:
        raise InvalidParameterError("map_diagonal needs a diagonal or scalar symbol")
    return MatrixSymbol.diagonal(s.partition, lambda l: fn(s.diag(l)),
                                 multiplicity_fn=s._mult_fn)


# torus lattice ------------------------------------------------------------

@lru_cache(maxsize=128)
def _shell(r: int, n: int) -> tuple:
    if r == 0:
        return ((0,) * n,)
    return tuple(p for p in itertools.product(range(-r, r + 1), repeat=n)
                 if max(abs(c) for c in p) == r)


def lattice_point(index: int, n: int) -> tuple:
    """``index``-th point of Z^n ordered by sup-norm shell, lexicographic within."""
    if index < 0:
        raise IndexError(index)
    if n == 1:
        r = (index + 1) // 2
        return (0,) if index == 0 else ((-r,) if index % 2 else (r,))
    r = 0
    while (2 * r + 1) ** n <= index:
        r += 1
    start = 0 if r == 0 else (2 * r - 1) ** n
    return _shell(r, n)[index - start]


def torus_multiplier_symbol(beta, n: int = 1, radius: int = 0) -> MatrixSymbol:
    """Scalar symbol ``beta(j)`` over lattice points ``|j|_inf <= radius``.

    ``beta`` receives an ``int`` when ``n == 1`` and a tuple otherwise.
    """
    if n < 1 or radius < 0:
        raise InvalidParameterError("need n >= 1 and radius >= 0")

    def point(l):
        j = lattice_point(l, n)
        return j[0] if n == 1 else j

    part = Partition.constant(1, size=(2 * radius + 1) ** n,
                              label_fn=lambda l: str(point(l)))
    return MatrixSymbol.scalar(part, lambda l: complex(beta(point(l))))


def beta_family(spec: str):
    """Named Fourier multipliers on Z, vectorized over integer arrays.

    ``inv-sqrt-quadratic``: ``(1+j^2)^(-1/2)``; ``inv-power:s``:
    ``(1+j^2)^(-s/2)``; ``delta:c``: ``c`` at ``j = 0`` and zero elsewhere.
    """
    name, _, arg = spec.partition(":")
    if name == "inv-sqrt-quadratic" and not arg:
        return lambda j: (1.0 + np.asarray(j, dtype=float) ** 2) ** -0.5
    if name == "inv-power" and arg:
        s = float(arg)
        _positive("s", s)
        return lambda j: (1.0 + np.asarray(j, dtype=float) ** 2) ** (-s / 2.0)
    if name == "delta" and arg:
        c = float(arg)
        if c < 0:
            raise InvalidParameterError("delta weight must be nonnegative")
        return lambda j: np.where(np.asarray(j) == 0, c, 0.0)
    raise InvalidParameterError(f"unknown beta family {spec!r}")
