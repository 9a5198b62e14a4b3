import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockspec import (
    DimensionMismatchError,
    InvalidParameterError,
    MatrixSymbol,
    Partition,
    TruncationPolicy,
    block_singular_values,
    decay_exponent_fit,
    operator_norm,
    schatten_norm,
    singular_spectrum,
    trace,
)
from blockspec.parallel import ENV_THREADS
from blockspec.spectral import singular_values_block

from conftest import dense, random_symbol, seeds

P_VALUES = [0.5, 1.0, 1.5, 2.0, 3.0]


def power_law_symbol(exponent, size=None):
    return MatrixSymbol.scalar(Partition.constant(1, size=size), lambda l: (l + 1.0) ** -exponent)


class TestSingularValues:
    def test_diagonal_moduli(self):
        np.testing.assert_array_equal(singular_values_block(np.diag([3.0, -4.0])), [4.0, 3.0])

    def test_gram_oracle(self, rng):
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        gram = np.sqrt(np.clip(np.linalg.eigvalsh(m.conj().T @ m), 0, None))[::-1]
        np.testing.assert_allclose(singular_values_block(m), gram, rtol=0, atol=1e-10)

    def test_non_square(self):
        with pytest.raises(DimensionMismatchError):
            singular_values_block(np.ones((2, 3)))

    def test_nan_names_block(self):
        s = MatrixSymbol.explicit([np.eye(2), np.array([[np.nan]])])
        with pytest.raises(InvalidParameterError, match="1"):
            block_singular_values(s, 1)
        with pytest.raises(InvalidParameterError):
            schatten_norm(s, 2)

    def test_spectrum_layout(self):
        s = MatrixSymbol.explicit([np.diag([1.0, 5.0]), np.eye(1)], multiplicity=[2, 3])
        sp = singular_spectrum(s, 10)
        assert len(sp.blocks) == 2
        np.testing.assert_array_equal(sp.flat(), [5.0, 5.0, 1.0, 1.0, 1.0, 1.0, 1.0])


class TestSchatten:
    def test_identity(self):
        s = MatrixSymbol.identity(Partition.finite([4]))
        assert schatten_norm(s, 2).value == pytest.approx(2.0, rel=1e-15)

    def test_geometric(self):
        s = MatrixSymbol.scalar(Partition.constant(1), lambda l: 2.0 ** -l)
        est = schatten_norm(s, 1)
        assert est.converged
        assert est.value == pytest.approx(2.0, rel=1e-8)

    def test_frobenius_oracle(self, rng):
        from blockspec.sampling import random_explicit_symbol
        s = random_explicit_symbol(rng, 20, 6)
        while s.partition.size < 20:
            s = random_explicit_symbol(rng, 20, 6)
        assert schatten_norm(s, 2).value == pytest.approx(np.linalg.norm(dense(s)), rel=1e-10)

    @given(seeds, st.sampled_from(P_VALUES))
    def test_dense_oracle_with_multiplicity(self, seed, p):
        s = random_symbol(seed, max_mult=3)
        sv = np.linalg.svd(dense(s), compute_uv=False)
        expected = float(np.sum(sv ** p)) ** (1 / p)
        est = schatten_norm(s, p)
        assert est.converged and est.last_increment == 0.0
        assert est.value == pytest.approx(expected, rel=1e-10)

    @given(seeds, st.floats(0.3, 4.0), st.floats(0.1, 10.0))
    def test_homogeneous(self, seed, p, c):
        s = random_symbol(seed)
        scaled = MatrixSymbol.explicit([c * s.block(l) for l in range(s.partition.size)])
        assert schatten_norm(scaled, p).value == pytest.approx(c * schatten_norm(s, p).value,
                                                               rel=1e-12)

    @given(seeds)
    def test_monotone_in_p(self, seed):
        s = random_symbol(seed)
        vals = [schatten_norm(s, p).value for p in (0.5, 1, 2, 4)]
        assert all(a >= b * (1 - 1e-12) for a, b in zip(vals, vals[1:]))
        assert operator_norm(s).value <= vals[-1] * (1 + 1e-12)

    @pytest.mark.parametrize("p", [0, -1, math.inf, math.nan])
    def test_bad_p(self, p):
        with pytest.raises(InvalidParameterError):
            schatten_norm(MatrixSymbol.identity(Partition.finite([1])), p)

    def test_power_law_tail_matches_zeta(self):
        est = schatten_norm(power_law_symbol(3.0), 1)
        zeta3 = float(mpmath.zeta(3))
        assert est.converged
        assert est.value == pytest.approx(zeta3, rel=1e-9)
        assert est.raw_value < est.value
        assert est.tail_exponent == pytest.approx(3.0, rel=1e-4)

    def test_without_extrapolation(self):
        t = TruncationPolicy(l_max=400, extrapolate=False)
        est = schatten_norm(power_law_symbol(3.0), 1, t)
        assert est.value == est.raw_value
        assert est.tail_exponent is None
        zeta3 = float(mpmath.zeta(3))
        assert abs(est.value - zeta3) > 1e-6

    def test_divergent_series(self):
        est = schatten_norm(power_law_symbol(1.0), 1)
        assert not est.converged
        assert est.blocks_used == 401
        assert np.all(np.diff(est.partial_sums) > 0)
        assert est.value == est.raw_value

    def test_partial_sums_are_raw(self):
        est = schatten_norm(power_law_symbol(2.0), 1)
        assert est.partial_sums[-1] == pytest.approx(est.raw_value, rel=1e-14)

    def test_thread_count_does_not_change_result(self, monkeypatch):
        s = MatrixSymbol.from_function(
            Partition(lambda l: 1 + l % 4),
            lambda l: np.diag(np.arange(1.0, 2 + l % 4)) * (l + 1.0) ** -2,
        )
        results = []
        for n in ("1", "3", "8"):
            monkeypatch.setenv(ENV_THREADS, n)
            results.append(schatten_norm(s, 1.5).to_dict())
        assert results[0] == results[1] == results[2]

    def test_policy_validation(self):
        with pytest.raises(InvalidParameterError):
            TruncationPolicy(min_blocks=0)
        with pytest.raises(InvalidParameterError):
            TruncationPolicy(l_max=2, min_blocks=4)
        with pytest.raises(InvalidParameterError):
            TruncationPolicy(tail_tol=-1)


class TestTrace:
    @given(seeds)
    def test_dense_oracle(self, seed):
        s = random_symbol(seed, max_mult=3)
        est = trace(s)
        assert est.converged
        expected = complex(np.trace(dense(s)))
        assert abs(est.value - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_infinite_positive(self):
        s = power_law_symbol(2.5)
        est = trace(s)
        assert est.value.real == pytest.approx(float(mpmath.zeta(2.5)), rel=1e-8)
        assert est.value.imag == 0
        assert est.converged

    def test_negative_terms(self):
        s = MatrixSymbol.scalar(Partition.constant(1), lambda l: -(l + 1.0) ** -3 * 1j)
        est = trace(s)
        assert est.value.imag == pytest.approx(-float(mpmath.zeta(3)), rel=1e-8)


class TestOperatorNorm:
    @given(seeds)
    def test_dense_oracle(self, seed):
        s = random_symbol(seed)
        est = operator_norm(s)
        assert est.converged and math.isinf(est.p)
        assert est.value == pytest.approx(np.linalg.norm(dense(s), 2), rel=1e-12)
        assert est.to_dict()["p"] == "inf"

    def test_decaying(self):
        est = operator_norm(power_law_symbol(1.0))
        assert est.value == 1.0 and est.converged
        assert est.blocks_used < 10
        assert "heuristic" in est.note

    def test_growing_does_not_converge(self):
        s = MatrixSymbol.scalar(Partition.constant(1), lambda l: 1.0 + l)
        est = operator_norm(s, TruncationPolicy(l_max=50))
        assert not est.converged and est.value == 51.0


class TestDecayFit:
    @given(st.floats(0.2, 4.0), st.floats(0.1, 100.0))
    def test_exact_power_law(self, exponent, c):
        m = np.arange(1, 201, dtype=float)
        fit = decay_exponent_fit(c * m ** -exponent)
        assert abs(fit.slope + exponent) <= max(fit.half_width, 1e-9)

    def test_log_corrected(self):
        m = np.arange(1, 1001, dtype=float)
        fit = decay_exponent_fit(np.log(m + 1) / m)
        # local slope d log v / d log m over the fitted half
        tail = m[500:]
        local = -1 + tail / ((tail + 1) * np.log(tail + 1))
        assert local.min() - fit.half_width <= fit.slope <= local.max() + fit.half_width
        assert -1.0 < fit.slope < -0.8

    def test_constant(self):
        fit = decay_exponent_fit(np.ones(20))
        assert fit.slope == 0.0 and fit.half_width == 0.0

    @pytest.mark.parametrize("values", [np.ones(5), -np.ones(20), np.arange(20.0)])
    def test_rejects(self, values):
        with pytest.raises(InvalidParameterError):
            decay_exponent_fit(values)
