"""Singular values, Schatten functionals, traces and decay fits for symbols."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import MatrixSymbol
from .errors import DimensionMismatchError, InvalidParameterError
from .parallel import ordered_map, thread_count
from .series import TruncationPolicy, sum_series, tail_estimate

DEFAULT_POLICY = TruncationPolicy()

OPERATOR_NORM_NOTE = (
    "heuristic: convergence means block norms stopped increasing the running "
    "supremum and were non-increasing over the last min_blocks blocks"
)


def _fmt_p(p):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class SchattenEstimate:
    """Truncated (and possibly tail-corrected) Schatten functional.

    ``value`` includes the fitted tail when one was used; ``raw_value`` is the
    plain partial sum over the ``blocks_used`` blocks.
    """

    value: float
    p: float
    blocks_used: int
    last_increment: float
    converged: bool
    raw_value: float | None = None
    tail_exponent: float | None = None
    note: str | None = None
    factors: tuple = ()
    partial_sums: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self):
        out = {
            "value": self.value,
            "p": _fmt_p(self.p),
            "blocks_used": self.blocks_used,
            "last_increment": self.last_increment,
            "converged": self.converged,
        }
        if self.raw_value is not None:
            out["raw_value"] = self.raw_value
        if self.tail_exponent is not None:
            out["tail_exponent"] = self.tail_exponent
        if self.note:
            out["note"] = self.note
        if self.factors:
            out["factors"] = [f.to_dict() for f in self.factors]
        return out


@dataclass(frozen=True)
class TraceEstimate:
    value: complex
    blocks_used: int
    converged: bool
    raw_value: complex
    absolute: SchattenEstimate | None = None
    factors: tuple = ()

    def to_dict(self):
        out = {
            "value": [self.value.real, self.value.imag],
            "blocks_used": self.blocks_used,
            "converged": self.converged,
            "raw_value": [self.raw_value.real, self.raw_value.imag],
        }
        if self.absolute is not None:
            out["absolute"] = self.absolute.to_dict()
        if self.factors:
            out["factors"] = [f.to_dict() for f in self.factors]
        return out


@dataclass(frozen=True)
class SingularSpectrum:
    """Per-block descending singular values with block multiplicities."""

    blocks: tuple
    multiplicities: tuple

    def flat(self) -> np.ndarray:
        parts = [np.repeat(sv, m) for sv, m in zip(self.blocks, self.multiplicities)]
        if not parts:
            return np.zeros(0)
        return np.sort(np.concatenate(parts))[::-1]


@dataclass(frozen=True)
class DecayFit:
    slope: float
    half_width: float
    intercept: float
    n_used: int

    def to_dict(self):
        return {"slope": self.slope, "half_width": self.half_width,
                "intercept": self.intercept, "n_used": self.n_used}


def singular_values_block(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def _checked(values, l):
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError(f"block {l} contains NaN or infinite entries")
    return values


def block_singular_values(s: MatrixSymbol, l: int) -> np.ndarray:
    d = s.diag(l)
    if d is not None:
        return np.sort(np.abs(_checked(d, l)))[::-1]
    return singular_values_block(_checked(s.block(l), l))


def singular_spectrum(s: MatrixSymbol, l_max: int) -> SingularSpectrum:
    idx = range(s.partition.count(l_max))
    blocks = ordered_map(lambda l: block_singular_values(s, l), idx)
    return SingularSpectrum(tuple(blocks), tuple(s.multiplicity(l) for l in idx))


def _check_p(p):
    if not (p > 0) or math.isinf(p) or math.isnan(p):
        raise InvalidParameterError(f"p must be a positive finite real, got {p}")


def schatten_norm(s: MatrixSymbol, p: float,
                  t: TruncationPolicy | None = None) -> SchattenEstimate:
    """``(sum_l mult(l) sum_k s_k(sigma(l))^p)^(1/p)``; a quasi-norm for ``p < 1``."""
    _check_p(p)
    t = t or DEFAULT_POLICY

    def term(l):
        sv = block_singular_values(s, l)
        return s.multiplicity(l) * float(np.sum(sv ** p))

    r = sum_series(term, s.partition.size, t)
    return SchattenEstimate(
        value=r.value ** (1.0 / p),
        p=float(p),
        blocks_used=r.blocks_used,
        last_increment=r.last_increment,
        converged=r.converged,
        raw_value=r.partial ** (1.0 / p),
        tail_exponent=r.exponent,
        partial_sums=r.partial_sums,
    )


def trace(s: MatrixSymbol, t: TruncationPolicy | None = None) -> TraceEstimate:
    """``sum_l mult(l) Tr sigma(l)``, flagged by the absolute (p = 1) series.

    The trace is summed over the same blocks the p = 1 series needed; when
    the real or imaginary trace terms keep a constant sign a fitted tail is
    added exactly as for the norm.
    """
    t = t or DEFAULT_POLICY
    absolute = schatten_norm(s, 1.0, t)
    n = absolute.blocks_used

    def term(l):
        d = s.diag(l)
        tr = complex(np.sum(d)) if d is not None else complex(np.trace(s.block(l)))
        return s.multiplicity(l) * tr

    terms = np.array(ordered_map(term, range(n)), dtype=complex)
    raw = complex(sum(terms.tolist(), 0j))
    value = raw
    if t.extrapolate and s.partition.size is None:
        re_tail, _ = tail_estimate(terms.real, n - 1)
        im_tail, _ = tail_estimate(terms.imag, n - 1)
        value = raw + complex(re_tail, im_tail)
    return TraceEstimate(value=value, blocks_used=n, converged=absolute.converged,
                         raw_value=raw, absolute=absolute)


def operator_norm(s: MatrixSymbol, t: TruncationPolicy | None = None) -> SchattenEstimate:
    """Supremum of the largest block singular value over the scanned blocks."""
    t = t or DEFAULT_POLICY
    size = s.partition.size
    count = s.partition.count(t.l_max)
    chunk = max(16, 4 * thread_count())
    sup, prev, small, used = 0.0, math.inf, 0, 0
    inc = math.inf
    converged = False
    for start in range(0, count, chunk):
        norms = ordered_map(lambda l: float(block_singular_values(s, l)[0]),
                            range(start, min(count, start + chunk)))
        for offset, b in enumerate(norms):
            used = start + offset + 1
            new_sup = max(sup, b)
            inc = (new_sup - sup) / new_sup if new_sup > 0 else 0.0
            sup = new_sup
            ok = inc <= t.tail_tol and b <= prev
            prev = b
            small = small + 1 if ok else 0
            if small >= t.min_blocks:
                converged = True
                break
        if converged:
            break
    if size is not None and used == size and not converged:
        converged, inc = True, 0.0
    return SchattenEstimate(value=sup, p=math.inf, blocks_used=used,
                            last_increment=float(inc), converged=converged,
                            note=OPERATOR_NORM_NOTE)


def decay_exponent_fit(values) -> DecayFit:
    """Slope of ``log v_m`` against ``log m`` over the tail half of the data.

    ``half_width`` is 1.96 standard errors of the slope.
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size < 10:
        raise InvalidParameterError(f"need at least 10 values, got {v.size}")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise InvalidParameterError("decay fit needs finite positive values")
    if np.any(np.diff(v) > 0):
        raise InvalidParameterError("values must be sorted in descending order")
    m = np.arange(1, v.size + 1, dtype=float)
    start = v.size // 2
    x, y = np.log(m[start:]), np.log(v[start:])
    if np.ptp(y) == 0.0:
        return DecayFit(0.0, 0.0, float(y[0]), int(x.size))
    r = stats.linregress(x, y)
    return DecayFit(float(r.slope), 1.96 * float(r.stderr), float(r.intercept), int(x.size))
