"""Summation of block series with a stopping rule and a fitted tail.

The infinite sums behind Schatten norms and traces converge algebraically
for the operators of interest (block terms ``~ C l^{-s}``), far too slowly
for a plain partial sum to be useful.  Once enough blocks are available the
last half of the terms is fitted by

    log a(x) = log C - s log x + d_1/x + ... + d_q/x^q,     x = l + 1,

and the remainder is summed in closed form through Hurwitz zeta values.
The stopping rule watches the tail-corrected estimate; when no trustworthy
fit exists (too few blocks, sign changes, ``s`` too close to 1, poor fit)
the raw partial sum is used instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import InvalidParameterError
from .parallel import ordered_map, thread_count

FIT_START = 96
FIT_POINTS = 48
N_CORR = 4
EXPONENT_MARGIN = 0.05
FIT_RMS_TOL = 1e-6


@dataclass(frozen=True)
class TruncationPolicy:
    """How far to scan an infinite block series and when to stop.

    ``min_blocks`` consecutive relative increments at or below ``tail_tol``
    declare convergence.  ``extrapolate`` enables the fitted tail for
    infinite partitions; convergence is then only declared once at least
    ``FIT_START`` blocks are in, so that the increments include the tail.
    """

    l_max: int = 400
    tail_tol: float = 1e-8
    min_blocks: int = 4
    extrapolate: bool = True

    def __post_init__(self):
        if self.min_blocks < 1:
            raise InvalidParameterError("min_blocks must be >= 1")
        if self.l_max < self.min_blocks:
            raise InvalidParameterError("l_max must be >= min_blocks")
        if not self.tail_tol >= 0:
            raise InvalidParameterError("tail_tol must be >= 0")


@dataclass(frozen=True)
class PowerTail:
    log_c: float
    exponent: float
    corr: tuple
    rms: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g = sum(d * x ** -(i + 1) for i, d in enumerate(self.corr))
        return np.exp(self.log_c - self.exponent * np.log(x) + g)

    def powered(self, p: float) -> "PowerTail":
        """Model of ``a(x)**p``."""
        return PowerTail(p * self.log_c, p * self.exponent,
                         tuple(p * d for d in self.corr), p * self.rms)

    def _exp_coeffs(self):
        # exp(sum_k d_k t^k) = sum_n e_n t^n via n e_n = sum_k k d_k e_{n-k}
        order = len(self.corr) + 3
        d = np.zeros(order + 1)
        d[1:len(self.corr) + 1] = self.corr
        e = np.zeros(order + 1)
        e[0] = 1.0
        for n in range(1, order + 1):
            e[n] = sum(k * d[k] * e[n - k] for k in range(1, n + 1)) / n
        return e

    def sum_from(self, x0: float) -> float:
        """``sum_{x = x0, x0 + 1, ...}`` of the model."""
        if self.exponent <= 1.0:
            return float("inf")
        e = self._exp_coeffs()
        total = 0.0
        for i, ei in enumerate(e):
            total += ei * zeta(self.exponent + i, x0)
        return float(np.exp(self.log_c) * total)


def fit_power_tail(x, y, n_corr: int = N_CORR) -> PowerTail | None:
    """Least-squares fit of the asymptotic power-law model, or ``None``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < n_corr + 6 or not np.all(np.isfinite(y)) or np.any(y <= 0):
        return None
    ly = np.log(y)
    cols = [np.ones_like(x), -np.log(x)] + [x ** -(i + 1) for i in range(n_corr)]
    X = np.column_stack(cols)
    # column scaling keeps the normal equations well conditioned
    scale = np.abs(X).max(axis=0)
    coef, *_ = np.linalg.lstsq(X / scale, ly, rcond=None)
    coef = coef / scale
    rms = float(np.sqrt(np.mean((X @ coef - ly) ** 2)))
    return PowerTail(float(coef[0]), float(coef[1]), tuple(float(c) for c in coef[2:]), rms)


def window_indices(last: int, points: int = FIT_POINTS):
    lo = max(1, last // 2)
    idx = np.unique(np.round(np.geomspace(lo, last, points)).astype(int))
    return idx


def tail_estimate(terms: np.ndarray, last: int):
    """Fitted remainder ``sum_{l > last}`` for a series with terms ``terms[:last+1]``.

    Returns ``(tail, exponent)``; ``(0.0, None)`` when no trustworthy fit
    exists.  Sequences of constant negative sign are handled by symmetry.
    """
    if last + 1 < FIT_START:
        return 0.0, None
    idx = window_indices(last)
    w = terms[idx]
    sign = 1.0
    if np.all(w < 0):
        sign, w = -1.0, -w
    fit = fit_power_tail(idx + 1.0, w)
    if fit is None or fit.rms > FIT_RMS_TOL or fit.exponent <= 1.0 + EXPONENT_MARGIN:
        return 0.0, None
    tail = fit.sum_from(last + 2.0)
    if not np.isfinite(tail):
        return 0.0, None
    return sign * tail, fit.exponent


@dataclass(frozen=True)
class SeriesResult:
    value: float
    partial: float
    tail: float
    blocks_used: int
    last_increment: float
    converged: bool
    exhausted: bool
    exponent: float | None
    terms: np.ndarray = field(repr=False, compare=False)

    @property
    def partial_sums(self):
        return np.cumsum(self.terms)


def _rel_increment(new, old):
    if new != 0:
        return abs(new - old) / abs(new)
    return 0.0 if old == 0 else float("inf")


def sum_series(term_fn, size: int | None, policy: TruncationPolicy) -> SeriesResult:
    """Sum ``term_fn(l)`` for ``l = 0, 1, ...`` under ``policy``.

    ``size`` is the number of blocks of a finite partition (``None`` when
    infinite).  Terms are evaluated in parallel chunks but consumed strictly
    in ascending order, so the result does not depend on the thread count.
    """
    count = policy.l_max + 1 if size is None else min(policy.l_max + 1, size)
    infinite_rest = size is None or size > count
    extrapolate = policy.extrapolate and size is None
    terms = np.zeros(count)
    chunk = max(16, 4 * thread_count())
    partial = 0.0
    est_prev = 0.0
    small = 0
    inc = float("inf")
    tail, exponent = 0.0, None
    converged = False
    used = 0
    for start in range(0, count, chunk):
        block_terms = ordered_map(term_fn, range(start, min(count, start + chunk)))
        for offset, a in enumerate(block_terms):
            l = start + offset
            a = float(a)
            terms[l] = a
            partial += a
            used = l + 1
            if extrapolate:
                tail, exponent = tail_estimate(terms, l)
            est = partial + tail
            inc = _rel_increment(est, est_prev)
            est_prev = est
            small = small + 1 if inc <= policy.tail_tol else 0
            # with a tail enabled, small raw increments alone are not trusted
            if small >= policy.min_blocks and (not extrapolate or used >= FIT_START):
                converged = True
                break
        if converged:
            break
    exhausted = not infinite_rest and used == count
    if exhausted and not converged:
        converged = True
        inc = 0.0
    return SeriesResult(
        value=partial + tail,
        partial=partial,
        tail=tail,
        blocks_used=used,
        last_increment=float(inc),
        converged=converged,
        exhausted=exhausted,
        exponent=exponent,
        terms=terms[:used].copy(),
    )
