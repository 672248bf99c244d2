"""Shrinkage functions: hand-checked values, closed-form vs FD derivatives."""

import numpy as np
import pytest

from ellshrink import (
    InvalidParameterError,
    ShrinkageFunction,
    alam_thompson_shrinkage,
    constant_shrinkage,
)

P, N, C = 5, 20, 1.0
B = 1.0 / (N * (N - P + 2))  # 1/340


def test_constant_value_and_derivative():
    r = constant_shrinkage(2.5)
    x = np.array([0.1, 1.0, 50.0])
    np.testing.assert_array_equal(r(x), np.full(3, 2.5))
    np.testing.assert_array_equal(r.deriv(x), np.zeros(3))
    assert r.name == "const,k=2.5"


def test_constant_rejects_negative():
    with pytest.raises(InvalidParameterError):
        constant_shrinkage(-0.5)


def test_bounded_family_hand_values():
    r = alam_thompson_shrinkage(P, N, C)
    # r(x) = (p-2) b x / (x + c); double-entry transcription at three points
    assert r(1.0) == pytest.approx(3.0 / 680.0, rel=1e-14)
    assert r(0.0) == 0.0
    assert r(339.0) == pytest.approx(3.0 * B * 339.0 / 340.0, rel=1e-14)
    assert r.name == "at,c=1"
    assert r.params["b"] == pytest.approx(B, rel=1e-15)


def test_bounded_family_limit_and_monotonicity():
    r = alam_thompson_shrinkage(P, N, C)
    x = np.geomspace(1e-6, 1e9, 200)
    vals = r(x)
    assert np.all(np.diff(vals) > 0)
    assert np.all(vals < (P - 2) * B)
    assert r(1e12) == pytest.approx((P - 2) * B, rel=1e-10)


def test_bounded_family_derivative_closed_form_vs_fd():
    r = alam_thompson_shrinkage(P, N, C)
    x = np.array([0.01, 0.5, 1.0, 7.0, 123.0])
    expected = (P - 2) * B * C / (x + C) ** 2
    np.testing.assert_allclose(r.deriv(x), expected, rtol=1e-13)
    h = 1e-6
    fd = (r(x + h) - r(x - h)) / (2 * h)
    np.testing.assert_allclose(r.deriv(x), fd, rtol=1e-5)


def test_bounded_family_parameter_validation():
    with pytest.raises(InvalidParameterError):
        alam_thompson_shrinkage(2, N, C)  # p < 3
    with pytest.raises(InvalidParameterError):
        alam_thompson_shrinkage(P, P, C)  # N too small
    with pytest.raises(InvalidParameterError):
        alam_thompson_shrinkage(P, N, 0.0)


def test_fd_fallback_when_no_derivative_given():
    r = ShrinkageFunction("square", lambda x: np.asarray(x) ** 2)
    x = np.array([0.3, 2.0, 10.0])
    np.testing.assert_allclose(r.deriv(x), 2 * x, rtol=1e-6)


def test_call_preserves_shape_and_scalars():
    r = alam_thompson_shrinkage(P, N, C)
    out = r(np.ones((2, 3)))
    assert out.shape == (2, 3)
    assert float(r(1.0)) == pytest.approx(3.0 / 680.0, rel=1e-14)
