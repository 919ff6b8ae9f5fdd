import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarimeter import NoOscillationError, PreconditionError
from polarimeter.fitting import FitResult, extract_period, fit_sinusoid, linear_fit, poisson_weights

X = np.linspace(0.0, 0.08, 81)


def synthetic(c=0.5, a=0.45, k=198.8, phi=0.3, x=X):
    return c + a * np.cos(k * x + phi)


def _fake_fit(k, k_err):
    return FitResult(0.5, 0.4, k, 0.0, 0.0, 0.0, k_err, 0.0, 1.0, 81, np.eye(4))


class TestSinusoid:
    def test_noiseless_recovery(self):
        fit = fit_sinusoid(X, synthetic())
        for got, want in ((fit.offset, 0.5), (fit.amplitude, 0.45), (fit.k, 198.8), (fit.phase, 0.3)):
            assert got == pytest.approx(want, rel=1e-9)

    @settings(max_examples=40)
    @given(st.floats(60.0, 1500.0), st.floats(-math.pi + 1e-3, math.pi - 1e-3), st.floats(0.05, 0.5))
    def test_recovery_over_parameter_range(self, k, phi, a):
        fit = fit_sinusoid(X, synthetic(0.5, a, k, phi))
        assert fit.k == pytest.approx(k, rel=1e-8)
        assert math.remainder(fit.phase - phi, 2 * math.pi) == pytest.approx(0.0, abs=1e-7)

    def test_constant_data(self):
        with pytest.raises(NoOscillationError, match="no oscillation"):
            fit_sinusoid(X, np.full_like(X, 0.7))

    def test_span_too_short(self):
        with pytest.raises(PreconditionError, match="periods"):
            fit_sinusoid(X, synthetic(), k_range=(10.0, 300.0))

    def test_too_few_points(self):
        with pytest.raises(PreconditionError):
            fit_sinusoid(X[:5], synthetic(x=X[:5]))

    @given(st.floats(1e-3, 1e4))
    def test_scaling(self, c):
        base = fit_sinusoid(X, synthetic())
        scaled = fit_sinusoid(X, c * synthetic())
        assert scaled.offset == pytest.approx(c * base.offset, rel=1e-10)
        assert scaled.amplitude == pytest.approx(c * base.amplitude, rel=1e-10)
        assert scaled.k == pytest.approx(base.k, rel=1e-10)
        assert scaled.phase == pytest.approx(base.phase, abs=1e-10)

    @given(st.floats(-0.5, 0.5))
    def test_shift_covariance(self, s):
        y = synthetic()
        base = fit_sinusoid(X, y)
        moved = fit_sinusoid(X + s, y)
        assert moved.k == pytest.approx(base.k, rel=1e-9)
        assert math.remainder(moved.phase - (base.phase - base.k * s), 2 * math.pi) == pytest.approx(0.0, abs=1e-9)
        assert moved.offset == pytest.approx(base.offset, rel=1e-9)
        assert moved.amplitude == pytest.approx(base.amplitude, rel=1e-9)

    def test_weighted_errors_absolute(self):
        rng = np.random.default_rng(4)
        lam = 1000 * synthetic()
        counts = rng.poisson(lam)
        w = poisson_weights(counts)
        fit = fit_sinusoid(X, counts, w)
        assert fit.reduced_chi2 == pytest.approx(1.0, abs=0.4)
        assert 0.05 < fit.k_err < 1.0
        assert fit.phase_at(0.0) == pytest.approx((fit.phase, fit.phase_err), rel=1e-12)

    def test_zero_counts_guarded(self):
        assert np.array_equal(poisson_weights([0, 1, 4]), [1.0, 1.0, 0.25])


class TestPeriod:
    @pytest.mark.parametrize("period", [0.03162, 0.06633])
    def test_examples(self, period):
        assert extract_period(_fake_fit(2 * math.pi / period, 0.0))[0] == pytest.approx(period, rel=1e-12)

    def test_relative_error_propagates(self):
        p, e = extract_period(_fake_fit(200.0, 2.0))
        assert e / p == pytest.approx(0.01, rel=1e-12)

    def test_nonpositive_k(self):
        with pytest.raises(PreconditionError):
            extract_period(_fake_fit(0.0, 0.0))


class TestLinear:
    def test_exact(self):
        x = np.arange(5.0)
        fit = linear_fit(x, 2 * x + 1)
        assert fit.slope == pytest.approx(2.0) and fit.intercept == pytest.approx(1.0)
        assert fit.residual_norm < 1e-12

    def test_identical_abscissae(self):
        with pytest.raises(PreconditionError):
            linear_fit([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_few(self):
        with pytest.raises(PreconditionError):
            linear_fit([1.0, 2.0], [1.0, 2.0])

    def test_weighted_errors(self):
        x = np.linspace(0, 1, 7)
        sig = np.full(7, 0.1)
        fit = linear_fit(x, 3 * x, sig)
        expected = 0.1 / math.sqrt(np.sum((x - x.mean()) ** 2))
        assert fit.slope_err == pytest.approx(expected, rel=1e-12)
