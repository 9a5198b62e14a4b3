import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import zeta

from blockspec.parallel import ENV_THREADS, ordered_map, thread_count
from blockspec.series import (
    TruncationPolicy,
    fit_power_tail,
    sum_series,
    tail_estimate,
    window_indices,
)


def test_ordered_map_keeps_order():
    assert ordered_map(lambda x: x * x, range(100), threads=8) == [x * x for x in range(100)]
    assert ordered_map(str, [], threads=4) == []


@pytest.mark.parametrize("raw,expected", [("3", 3), ("0", 1), ("junk", None)])
def test_thread_count_env(monkeypatch, raw, expected):
    monkeypatch.setenv(ENV_THREADS, raw)
    n = thread_count()
    assert n == expected if expected is not None else 1 <= n <= 8


@given(st.floats(1.2, 6.0), st.floats(0.01, 100.0))
def test_fit_recovers_power_law(s, c):
    x = np.arange(50.0, 200.0)
    fit = fit_power_tail(x, c * x ** -s)
    assert fit.exponent == pytest.approx(s, rel=1e-8)
    assert fit.sum_from(200.0) == pytest.approx(c * zeta(s, 200.0), rel=1e-8)


def test_fit_rejects_bad_data():
    x = np.arange(1.0, 30.0)
    assert fit_power_tail(x, -np.ones_like(x)) is None
    assert fit_power_tail(x[:5], x[:5]) is None


def test_window():
    idx = window_indices(400)
    assert idx[0] == 200 and idx[-1] == 400 and np.all(np.diff(idx) > 0)


def test_tail_refuses_geometric_and_slow():
    l = np.arange(300.0)
    assert tail_estimate(0.5 ** l, 299) == (0.0, None)
    assert tail_estimate(1.0 / (l + 1), 299) == (0.0, None)
    tail, exponent = tail_estimate(-(l + 1) ** -3.0, 299)
    assert exponent == pytest.approx(3.0, rel=1e-6) and tail < 0


def test_finite_exhausted():
    r = sum_series(lambda l: 1.0, 5, TruncationPolicy())
    assert r.value == 5.0 and r.converged and r.exhausted and r.last_increment == 0.0


def test_finite_truncated_not_exhausted():
    r = sum_series(lambda l: 1.0, 500, TruncationPolicy(l_max=10))
    assert r.blocks_used == 11 and not r.converged and not r.exhausted


@given(st.floats(2.2, 5.0))
def test_power_series_matches_zeta(s):
    r = sum_series(lambda l: (l + 1.0) ** -s, None, TruncationPolicy())
    assert r.converged
    assert r.value == pytest.approx(zeta(s), rel=1e-8)
