import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockspec import (
    DimensionMismatchError,
    InvalidParameterError,
    MatrixSymbol,
    Partition,
    TensorSymbol,
    TruncationPolicy,
    direct_operator_norm,
    direct_schatten_norm,
    direct_trace,
    kron,
    schatten_norm,
    so3_schrodinger_symbol,
    su2_laplacian_power_symbol,
    tensor_operator_norm,
    tensor_schatten_norm,
    tensor_trace,
    trace,
)
from blockspec.generators import map_diagonal
from blockspec.spectral import singular_values_block
from blockspec.tensor import block_norm_envelope, product_partition

from conftest import random_symbol, seeds


def test_kron_index_convention(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    k = kron(a, b)
    for r, s, p, q in itertools.product(range(2), range(3), range(2), range(3)):
        assert k[r * 3 + s, p * 3 + q] == a[r, p] * b[s, q]


def test_partition_and_block_shapes():
    a = MatrixSymbol.explicit([np.eye(1), 2 * np.eye(3)])
    b = MatrixSymbol.explicit([np.eye(2), np.eye(2), np.eye(4)], multiplicity=[1, 2, 3])
    ts = TensorSymbol([a, b])
    assert ts.partition.dim((1, 2)) == 12
    assert ts.block((1, 2)).shape == (12, 12)
    assert ts.multiplicity((1, 2)) == 3
    assert list(ts.partition.rectangle(5)) == list(itertools.product(range(2), range(3)))
    with pytest.raises(DimensionMismatchError):
        ts.block((0,))
    with pytest.raises(InvalidParameterError):
        TensorSymbol([a])
    with pytest.raises(InvalidParameterError):
        product_partition(a.partition)


@given(seeds, seeds, st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_multiplicativity(seed_a, seed_b, p):
    a = random_symbol(seed_a, max_mult=2)
    b = random_symbol(seed_b, max_mult=2)
    ts = TensorSymbol([a, b])
    prod = tensor_schatten_norm(ts, p)
    assert prod.value == pytest.approx(schatten_norm(a, p).value * schatten_norm(b, p).value,
                                       rel=1e-12)
    assert prod.value == pytest.approx(direct_schatten_norm(ts, p, 100), rel=1e-10)
    assert prod.converged and len(prod.factors) == 2


@given(seeds, seeds, seeds)
def test_trace_of_triple(sa, sb, sc):
    ts = TensorSymbol([random_symbol(sa), random_symbol(sb), random_symbol(sc, max_mult=2)])
    got = tensor_trace(ts).value
    expected = direct_trace(ts, 100)
    assert abs(got - expected) <= 1e-10 * max(abs(expected), 1e-300)
    assert got == pytest.approx(math.prod(trace(f).value for f in ts.factors), rel=1e-12)


@given(seeds, seeds)
def test_operator_norm_product(sa, sb):
    ts = TensorSymbol([random_symbol(sa), random_symbol(sb)])
    assert tensor_operator_norm(ts).value == pytest.approx(direct_operator_norm(ts, 100),
                                                           rel=1e-12)


@given(seeds)
def test_kron_singular_value_multiset(seed):
    rng = np.random.default_rng(seed)
    da, db = rng.integers(1, 7, size=2)
    a = rng.standard_normal((da, da)) + 1j * rng.standard_normal((da, da))
    b = rng.standard_normal((db, db)) + 1j * rng.standard_normal((db, db))
    expected = np.sort(np.outer(singular_values_block(a), singular_values_block(b)).ravel())
    got = np.sort(singular_values_block(kron(a, b)))
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-10 * expected[-1])


def test_infinite_factors_truncated_rectangle():
    a = map_diagonal(so3_schrodinger_symbol(1.0), lambda d: d ** -2.0)
    b = su2_laplacian_power_symbol(4.0)
    t = TruncationPolicy(l_max=10, tail_tol=0.0, extrapolate=False)
    ts = TensorSymbol([a, b])
    for p in (1.0, 2.0):
        est = tensor_schatten_norm(ts, p, t)
        assert not est.converged and est.blocks_used == 121
        assert est.value == pytest.approx(direct_schatten_norm(ts, p, 10), rel=1e-12)


def test_envelope_decays():
    ts = TensorSymbol([su2_laplacian_power_symbol(2.0), su2_laplacian_power_symbol(3.0)])
    env = block_norm_envelope(ts, 12)
    assert env[0] == 1.0
    assert np.all(np.diff(env) < 0)


def test_three_factor_block_is_left_fold(rng):
    mats = [rng.standard_normal((d, d)) for d in (2, 3, 2)]
    ts = TensorSymbol([MatrixSymbol.explicit([m]) for m in mats])
    np.testing.assert_array_equal(ts.block((0, 0, 0)), np.kron(np.kron(mats[0], mats[1]), mats[2]))


def test_identity_factor():
    s = su2_laplacian_power_symbol(4.0)
    one = MatrixSymbol.identity(Partition.finite([1]))
    est = tensor_schatten_norm(TensorSymbol([s, one]), 1.0)
    assert est.value == schatten_norm(s, 1.0).value
