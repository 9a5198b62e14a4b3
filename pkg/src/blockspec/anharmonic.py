"""Spectra of 1-D anharmonic oscillators ``(-d^2/dx^2)^l + |x|^(2k)``.

The operator is discretized on ``[-extent, extent]`` with Dirichlet walls in
the discrete sine basis.  The kinetic power is diagonal there, with
eigenvalues ``(pi q / (2 extent))^(2l)``.  The potential is diagonal on the
interior grid, so ``H = S diag(kq^(2l)) S^T + diag(V(x_i))``, where ``S`` is
the orthonormal DST-I matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import MatrixSymbol, Partition
from .errors import BlockSpecError, InvalidParameterError
from .spectral import DecayFit, decay_exponent_fit

HERMITIAN_TOL = 1e-8
# levels whose classical turning point passes this fraction of the box feel the walls
TURNING_FRACTION = 0.8


@dataclass(frozen=True)
class AnharmonicSpec:
    k: int = 1
    l: int = 1
    mu: float = 1.0
    points: int = 2000
    extent: float = 12.0
    n: int = 1

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise InvalidParameterError("k and l must be integers >= 1")
        if self.n != 1:
            raise InvalidParameterError("only the one-dimensional solver is available")
        if self.points < 100:
            raise InvalidParameterError("points must be >= 100")
        if not self.extent > 0:
            raise InvalidParameterError("extent must be positive")
        if not self.mu >= 0:
            raise InvalidParameterError("mu must be nonnegative")


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    count: int
    points: int
    extent: float
    spacing: float
    hermitian_residual: float
    turning_point: float = 0.0
    boundary_warning: bool = False

    def rows(self):
        return [(m, float(e)) for m, e in enumerate(self.eigenvalues)]


@dataclass(frozen=True)
class DecayCheck:
    fitted_slope: float
    half_width: float
    threshold_slope: float
    mu_threshold: float
    passed: bool

    def to_dict(self):
        return {
            "fitted_slope": self.fitted_slope,
            "half_width": self.half_width,
            "threshold_slope": self.threshold_slope,
            "mu_threshold": self.mu_threshold,
            "pass": self.passed,
        }


def anharmonic_schatten_threshold(k: int, l: int, n: int, p: float) -> float:
    """Smallest ``mu`` (exclusive) for which ``(A_{k,l} + 1)^(-mu)`` is in ``S_p``."""
    for name, v in (("k", k), ("l", l), ("n", n)):
        if int(v) != v or v < 1:
            raise InvalidParameterError(f"{name} must be an integer >= 1, got {v}")
    if not p > 0:
        raise InvalidParameterError("p must be positive")
    return (k + l) * n / (2.0 * k * l * p)


def sine_basis(points: int) -> np.ndarray:
    i = np.arange(1, points + 1)
    return math.sqrt(2.0 / (points + 1)) * np.sin(np.pi * np.outer(i, i) / (points + 1))


def anharmonic_galerkin_spectrum(spec: AnharmonicSpec, count: int) -> SpectrumResult:
    """Lowest ``count`` levels.

    ``boundary_warning`` is set when the classical turning point
    ``E_max^(1/(2k))`` of the top level lies beyond ``TURNING_FRACTION`` of
    the extent; those levels are then pushed up by the walls.
    """
    if count < 1 or count > spec.points // 10:
        raise InvalidParameterError(
            f"count must be between 1 and points/10 = {spec.points // 10}, got {count}"
        )
    n = spec.points
    h = 2.0 * spec.extent / (n + 1)
    x = -spec.extent + h * np.arange(1, n + 1)
    wave = np.pi * np.arange(1, n + 1) / (2.0 * spec.extent)
    S = sine_basis(n)
    H = (S * wave ** (2 * spec.l)) @ S.T
    H[np.diag_indices(n)] += np.abs(x) ** (2 * spec.k)
    scale = float(np.max(np.abs(H)))
    residual = float(np.max(np.abs(H - H.T))) / scale
    if residual > HERMITIAN_TOL:
        raise BlockSpecError(f"assembled operator is not symmetric (residual {residual:.2e})")
    H = 0.5 * (H + H.T)
    evals = linalg.eigh(H, eigvals_only=True, subset_by_index=[0, count - 1],
                        driver="evr")
    evals = np.sort(evals)
    turning = float(max(evals[-1], 0.0) ** (1.0 / (2 * spec.k)))
    return SpectrumResult(evals, count, n, spec.extent, h, residual, turning,
                          turning > TURNING_FRACTION * spec.extent)


def anharmonic_symbol(spec: AnharmonicSpec, count: int) -> MatrixSymbol:
    """Scalar symbol of ``(A_{k,l} + 1)^(-mu)`` in its eigenbasis, first ``count`` levels."""
    e = anharmonic_galerkin_spectrum(spec, count).eigenvalues
    values = (1.0 + e) ** (-spec.mu)
    return MatrixSymbol.scalar(Partition.constant(1, size=count), lambda m: values[m])


def anharmonic_decay_check(spec: AnharmonicSpec, p: float, count: int,
                           margin: float = 1e-6) -> DecayCheck:
    """Fit the decay of ``(1 + E_m)^(-mu)`` against the ``S_p`` borderline ``m^(-1/p)``.

    Passing needs ``slope + half_width < -1/p - margin``.  ``margin`` keeps a
    slope that equals the borderline up to discretization error from passing.
    """
    spectrum = anharmonic_galerkin_spectrum(spec, count)
    lam = (1.0 + spectrum.eigenvalues) ** (-spec.mu)
    fit: DecayFit = decay_exponent_fit(lam)
    threshold = -1.0 / p
    passed = fit.slope + fit.half_width < threshold - margin
    return DecayCheck(fit.slope, fit.half_width, threshold,
                      anharmonic_schatten_threshold(spec.k, spec.l, spec.n, p), passed)
