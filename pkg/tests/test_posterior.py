"""Posterior density of the mean: scipy oracles, quadrature normalization."""

import numpy as np
import pytest
from scipy import stats as sps

from ellshrink import (
    DimensionMismatchError,
    DimensionTooLargeError,
    MeanPosterior,
    normalization_check,
    sufficient_stats,
)


def posterior_from(seed, n, p, scale=1.0):
    rng = np.random.default_rng(seed)
    data = scale * rng.standard_normal((n, p)) + rng.standard_normal(p)
    return MeanPosterior.from_data(data), data


def test_from_data_equals_from_stats():
    post, data = posterior_from(1, 15, 2)
    other = MeanPosterior.from_stats(sufficient_stats(data))
    np.testing.assert_array_equal(post.center, other.center)
    np.testing.assert_array_equal(post.scatter.values, other.scatter.values)


def test_univariate_matches_scipy_t():
    """p = 1: the density is Student t with N-1 dof, scale sqrt(S/(N(N-1)))."""
    post, data = posterior_from(2, 12, 1)
    n = 12
    s = float(post.scatter.values[0, 0])
    oracle = sps.t(df=n - 1, loc=post.center[0], scale=np.sqrt(s / (n * (n - 1))))
    pts = post.center[0] + np.array([-2.0, -0.3, 0.0, 0.7, 3.1])
    got = post.logpdf(pts.reshape(-1, 1))
    np.testing.assert_allclose(got, oracle.logpdf(pts), rtol=1e-12)


def test_bivariate_matches_scipy_multivariate_t():
    post, _ = posterior_from(3, 14, 2)
    n, p = 14, 2
    dof = n - p
    shape = post.scatter.values / (n * dof)
    oracle = sps.multivariate_t(loc=post.center, shape=shape, df=dof)
    rng = np.random.default_rng(4)
    pts = post.center + rng.standard_normal((6, 2))
    np.testing.assert_allclose(post.logpdf(pts), oracle.logpdf(pts), rtol=1e-12)


def test_trivariate_matches_scipy_multivariate_t():
    post, _ = posterior_from(5, 11, 3)
    n, p = 11, 3
    shape = post.scatter.values / (n * (n - p))
    oracle = sps.multivariate_t(loc=post.center, shape=shape, df=n - p)
    pts = post.center + np.random.default_rng(6).standard_normal((5, 3)) * 0.5
    np.testing.assert_allclose(post.logpdf(pts), oracle.logpdf(pts), rtol=1e-12)


def test_logpdf_accepts_single_point():
    post, _ = posterior_from(7, 10, 2)
    single = post.logpdf(post.center)
    batch = post.logpdf(post.center.reshape(1, 2))
    assert np.asarray(single).shape == ()
    assert batch.shape == (1,)
    assert float(single) == float(batch[0])


def test_pdf_is_exp_of_logpdf():
    post, _ = posterior_from(8, 10, 2)
    pt = post.center + 0.1
    assert post.pdf(pt) == pytest.approx(np.exp(post.logpdf(pt)), rel=1e-14)


def test_symmetry_is_exact():
    # dyadic center/offsets make center +/- d exactly representable, so the
    # two arguments are perfect mirror images and the densities match bitwise
    scatter = posterior_from(9, 13, 2)[0].scatter
    post = MeanPosterior(np.array([0.5, -0.25]), scatter, 13)
    d = np.array([0.3125, -0.875])
    assert float(post.logpdf(post.center + d)) == float(post.logpdf(post.center - d))


def test_mode_is_at_center():
    post, _ = posterior_from(10, 13, 3)
    peak = float(post.logpdf(post.center))
    rng = np.random.default_rng(11)
    for _ in range(20):
        assert float(post.logpdf(post.center + 0.1 * rng.standard_normal(3))) < peak


def test_normalization_univariate():
    post, _ = posterior_from(12, 9, 1)
    assert abs(normalization_check(post) - 1.0) < 1e-4


def test_normalization_bivariate():
    post, _ = posterior_from(13, 12, 2, scale=2.0)
    assert abs(normalization_check(post) - 1.0) < 1e-2


def test_normalization_trivariate():
    post, _ = posterior_from(14, 10, 3)
    assert abs(normalization_check(post, nodes=101) - 1.0) < 1e-2


def test_normalization_dimension_cap():
    post, _ = posterior_from(15, 12, 4)
    with pytest.raises(DimensionTooLargeError):
        normalization_check(post)


def test_center_dimension_validated():
    post, data = posterior_from(16, 10, 2)
    with pytest.raises(DimensionMismatchError):
        MeanPosterior(np.zeros(3), post.scatter, 10)
    with pytest.raises(DimensionMismatchError):
        post.logpdf(np.zeros(3))
