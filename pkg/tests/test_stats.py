"""Sufficient statistics checked against direct per-row summation."""

import numpy as np
import pytest

from ellshrink import (
    DegenerateScatterError,
    InvalidParameterError,
    sufficient_stats,
    validate_dataset,
)


def test_mean_and_scatter_match_direct_sums():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((12, 4))
    st = sufficient_stats(x)
    np.testing.assert_allclose(st.ybar, x.sum(axis=0) / 12.0, rtol=1e-14)
    # scatter is the *uncorrected* sum of outer products, no 1/(N-1)
    expected = np.zeros((4, 4))
    for row in x:
        d = row - x.mean(axis=0)
        expected += np.outer(d, d)
    np.testing.assert_allclose(st.scatter.values, expected, rtol=1e-10)
    assert st.n_obs == 12
    assert st.dim == 4


def test_mean_quad_form_matches_explicit_inverse():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((10, 3))
    st = sufficient_stats(x)
    expected = st.ybar @ np.linalg.inv(st.scatter.values) @ st.ybar
    assert st.mean_quad_form() == pytest.approx(expected, rel=1e-10)


def test_ybar_read_only():
    st = sufficient_stats(np.random.default_rng(9).standard_normal((8, 2)))
    with pytest.raises(ValueError):
        st.ybar[0] = 1.0


def test_validate_returns_float_array():
    out = validate_dataset([[1, 2], [3, 4], [5, 6]])
    assert out.dtype == np.float64
    assert out.shape == (3, 2)


def test_requires_more_rows_than_columns():
    with pytest.raises(InvalidParameterError):
        sufficient_stats(np.eye(3))  # N == p
    with pytest.raises(InvalidParameterError):
        sufficient_stats(np.ones((2, 4)))


def test_rejects_non_2d_and_non_finite():
    with pytest.raises(InvalidParameterError):
        validate_dataset(np.ones(5))
    bad = np.random.default_rng(0).standard_normal((6, 2))
    bad[3, 1] = np.inf
    with pytest.raises(InvalidParameterError):
        validate_dataset(bad)


def test_degenerate_rows_raise():
    # all rows identical: scatter is exactly zero, no Cholesky factor
    x = np.tile([1.0, 2.0, 3.0], (7, 1))
    with pytest.raises(DegenerateScatterError):
        sufficient_stats(x)


def test_rank_deficient_rows_raise():
    rng = np.random.default_rng(10)
    base = rng.standard_normal((8, 1))
    x = np.hstack([base, 2.0 * base, base - 1.0])  # columns linearly dependent
    with pytest.raises(DegenerateScatterError):
        sufficient_stats(x)
