import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaplab.errors import UsageError
from gaplab.exponents import alpha_of, ball_beta, gradient_exponent, report_for


def test_alpha_examples():
    assert alpha_of(0.0, 3) == 0.0
    assert alpha_of(1.0, 3) == pytest.approx(np.sqrt(2) - 1, abs=1e-15)
    a = alpha_of(2.0, 4)
    assert a == pytest.approx((-3 + np.sqrt(17)) / 2, abs=1e-15)
    assert a ** 2 + 3 * a - 2 == pytest.approx(0, abs=1e-14)


def test_beta_examples():
    assert ball_beta(3) == pytest.approx((np.sqrt(2) - 1) / 2, abs=1e-15)
    assert ball_beta(4) == pytest.approx((-3 + np.sqrt(17)) / 4, abs=1e-15)


@pytest.mark.parametrize("n", range(3, 11))
def test_beta_alpha_identity(n):
    assert abs(-0.5 + ball_beta(n) - gradient_exponent(alpha_of(n - 2, n))) <= 1e-14
    assert abs(ball_beta(n) - alpha_of(n - 2, n) / 2) <= 1e-14


def test_errors():
    with pytest.raises(UsageError):
        alpha_of(-1e-3, 3)
    with pytest.raises(UsageError):
        alpha_of(1.0, 2)
    with pytest.raises(UsageError):
        ball_beta(2)


@pytest.mark.parametrize("n", [3, 4, 7])
def test_monotone(n):
    lam = np.linspace(0, n - 2, 100)
    assert np.all(np.diff(alpha_of(lam, n)) > 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 12), st.floats(1e-9, 1.0))
def test_range_and_roundtrip(n, frac):
    lam = frac * (n - 2)
    a = alpha_of(lam, n)
    assert 0 < a <= 1
    if frac < 1:
        assert a < 1
    assert a * a + (n - 1) * a == pytest.approx(lam, rel=1e-12, abs=1e-15)
    assert -0.5 < gradient_exponent(a) < 0


def test_small_lambda_limit():
    assert gradient_exponent(alpha_of(1e-14, 3)) == pytest.approx(-0.5, abs=1e-13)
    assert alpha_of(1e-300, 3) > 0


def test_report_intervals():
    rep = report_for(3, 1.0)
    assert rep.predicted_gradient_exponent == pytest.approx((np.sqrt(2) - 2) / 2, abs=1e-15)
    assert rep.ball_beta == pytest.approx(ball_beta(3))
    rep = report_for(3, 0.48, 1e-3)
    lo, hi = rep.exponent_interval
    assert lo < rep.predicted_gradient_exponent < hi
    d = rep.to_dict()
    assert isinstance(d["alpha_interval"], list) and d["n"] == 3
