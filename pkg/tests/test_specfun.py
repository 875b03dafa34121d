import math

import mpmath
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from cogrelay.specfun import reg_lower_gamma, scaled_upper_gamma_term

mpmath.mp.dps = 50


def erlang_cdf_quadrature(k: int, x: float) -> float:
    """Independent oracle: adaptive quadrature of int_0^x t^{k-1} e^{-t}/(k-1)! dt."""
    val, _ = integrate.quad(
        lambda t: t ** (k - 1) * math.exp(-t) / math.factorial(k - 1), 0.0, x, limit=200
    )
    return val


def scaled_term_mpmath(k: int, a: float, c: float) -> float:
    """Independent oracle: e^c * Q(k, a+c) in 50-digit arithmetic, with the
    upper tail Q computed natively (1 - P would cancel to zero at large c)."""
    z = mpmath.mpf(a) + mpmath.mpf(c)
    upper = mpmath.gammainc(k, z, mpmath.inf, regularized=True)
    return float(mpmath.e ** mpmath.mpf(c) * upper)


class TestRegLowerGamma:
    def test_exponential_cdf_at_mean(self):
        assert reg_lower_gamma(1, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)

    def test_empty_integral(self):
        assert reg_lower_gamma(3, 0.0) == 0.0

    def test_k2_value(self):
        # frozen from the quadrature oracle; equals 1 - 3 e^{-2}
        assert reg_lower_gamma(2, 2.0) == pytest.approx(0.5939941502901619, rel=1e-12)

    @pytest.mark.parametrize("k", range(1, 11))
    @pytest.mark.parametrize("x", [0.01, 0.1, 1.0, 10.0, 50.0])
    def test_matches_quadrature(self, k, x):
        oracle = erlang_cdf_quadrature(k, x)
        assert reg_lower_gamma(k, x) == pytest.approx(oracle, rel=1e-10)

    @pytest.mark.parametrize("k", range(1, 11))
    def test_saturates_at_large_x(self, k):
        x = k + 50.0 * math.sqrt(k)
        assert reg_lower_gamma(k, x) >= 1.0 - 1e-12

    @pytest.mark.parametrize("k", range(1, 11))
    @pytest.mark.parametrize("x", [0.05, 0.5, 1.0, 5.0, 20.0, 100.0])
    def test_recurrence(self, k, x):
        # P(k+1, x) = P(k, x) - e^{-x} x^k / k!
        step = math.exp(-x + k * math.log(x) - math.lgamma(k + 1))
        assert reg_lower_gamma(k + 1, x) == pytest.approx(
            reg_lower_gamma(k, x) - step, abs=1e-12
        )

    @pytest.mark.parametrize("bad_x", [-1.0, -1e-9, math.nan])
    def test_rejects_negative_x(self, bad_x):
        with pytest.raises(ValueError):
            reg_lower_gamma(2, bad_x)

    @pytest.mark.parametrize("bad_k", [0, -3, 1.5, "2"])
    def test_rejects_bad_shape(self, bad_k):
        with pytest.raises(ValueError):
            reg_lower_gamma(bad_k, 1.0)

    @given(
        k=st.integers(min_value=1, max_value=40),
        x=st.floats(min_value=0.0, max_value=1e4, allow_nan=False),
    )
    def test_is_probability(self, k, x):
        p = reg_lower_gamma(k, x)
        assert 0.0 <= p <= 1.0

    @given(
        k=st.integers(min_value=1, max_value=30),
        x1=st.floats(min_value=0.0, max_value=200.0),
        x2=st.floats(min_value=0.0, max_value=200.0),
    )
    def test_monotone_in_x(self, k, x1, x2):
        lo, hi = sorted((x1, x2))
        assert reg_lower_gamma(k, lo) <= reg_lower_gamma(k, hi) + 1e-15

    @given(
        k=st.integers(min_value=1, max_value=30),
        x=st.floats(min_value=0.0, max_value=200.0),
    )
    def test_monotone_in_shape(self, k, x):
        # adding one more summand can only make the sum exceed x less often
        assert reg_lower_gamma(k + 1, x) <= reg_lower_gamma(k, x) + 1e-15


class TestScaledUpperGammaTerm:
    def test_unit_at_zero_a_k1(self):
        assert scaled_upper_gamma_term(1, 0.0, 5.0) == 1.0

    def test_k1_is_exp_minus_a(self):
        # frozen from the 50-digit direct-product oracle at moderate c
        assert scaled_upper_gamma_term(1, 0.3, 2.0) == pytest.approx(
            0.7408182206817179, rel=1e-12
        )

    def test_huge_c_stays_finite(self):
        # the naive e^c (1 - P) route overflows at c=1000; the cancelled form
        # must match 50-digit arithmetic instead
        with pytest.raises(OverflowError):
            math.exp(1000.0)
        got = scaled_upper_gamma_term(2, 0.3, 1000.0)
        assert math.isfinite(got)
        assert got == pytest.approx(741.7812843686041, rel=1e-12)
        assert got == pytest.approx(scaled_term_mpmath(2, 0.3, 1000.0), rel=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 5, 10])
    @pytest.mark.parametrize("a", [0.0, 0.3, 2.0])
    @pytest.mark.parametrize("c", [0.1, 1.0, 10.0, 30.0])
    def test_cancellation_identity(self, k, a, c):
        # e^c (1 - P(k, a+c)) in doubles only carries ~1e-16/Q relative error,
        # so the double-precision identity is asserted where the upper tail Q
        # keeps 1e-9 headroom; the high-precision oracle covers every point
        assert scaled_upper_gamma_term(k, a, c) == pytest.approx(
            scaled_term_mpmath(k, a, c), rel=1e-12
        )
        q = 1.0 - reg_lower_gamma(k, a + c)
        if q >= 1e-7:
            naive = math.exp(c) * q
            assert scaled_upper_gamma_term(k, a, c) == pytest.approx(naive, rel=1e-9)

    @pytest.mark.parametrize("bad", [(1, -0.1, 1.0), (1, 0.0, 0.0), (1, 0.0, -2.0), (0, 0.0, 1.0)])
    def test_domain_errors(self, bad):
        k, a, c = bad
        with pytest.raises(ValueError):
            scaled_upper_gamma_term(k, a, c)

    @given(
        k=st.integers(min_value=1, max_value=20),
        a=st.floats(min_value=0.0, max_value=50.0),
        c=st.floats(min_value=1e-6, max_value=1e6),
    )
    def test_nonnegative(self, k, a, c):
        assert scaled_upper_gamma_term(k, a, c) >= 0.0
