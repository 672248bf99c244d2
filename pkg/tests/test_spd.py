"""Tests for the SPD matrix wrapper against dense linear-algebra oracles."""

import numpy as np
import pytest

from ellshrink import (
    BadSpecError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    SpdMatrix,
    quad_form_inv,
    spd_from_spec,
)


def random_spd(p, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((p, p))
    m = a @ a.T + p * np.eye(p)
    return 0.5 * (m + m.T)


def test_cholesky_reconstructs_matrix():
    m = SpdMatrix(random_spd(6, 0))
    lower = m.chol_lower
    assert np.allclose(np.triu(lower, 1), 0.0)
    assert np.all(np.diag(lower) > 0)
    np.testing.assert_allclose(lower @ lower.T, m.values, rtol=1e-12)


def test_solve_matches_dense_solve():
    vals = random_spd(5, 1)
    m = SpdMatrix(vals)
    rng = np.random.default_rng(2)
    b = rng.standard_normal(5)
    np.testing.assert_allclose(m.solve(b), np.linalg.solve(vals, b), rtol=1e-10)
    bmat = rng.standard_normal((5, 3))
    np.testing.assert_allclose(m.solve(bmat), np.linalg.solve(vals, bmat), rtol=1e-10)


def test_quad_form_against_explicit_inverse():
    vals = random_spd(4, 3)
    m = SpdMatrix(vals)
    v = np.random.default_rng(4).standard_normal(4)
    expected = v @ np.linalg.inv(vals) @ v
    assert m.quad_form_inv(v) == pytest.approx(expected, rel=1e-10)
    assert quad_form_inv(v, m) == pytest.approx(expected, rel=1e-10)
    assert m.quad_form_inv(v) >= 0.0


def test_logdet_matches_slogdet():
    vals = random_spd(7, 5)
    sign, ld = np.linalg.slogdet(vals)
    assert sign == 1.0
    assert SpdMatrix(vals).logdet() == pytest.approx(ld, rel=1e-12)


def test_values_are_read_only():
    m = SpdMatrix(np.eye(3))
    with pytest.raises(ValueError):
        m.values[0, 0] = 2.0
    with pytest.raises(ValueError):
        m.chol_lower[0, 0] = 2.0


def test_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        SpdMatrix(np.ones((2, 3)))


def test_rejects_asymmetric():
    a = np.eye(3)
    a[0, 1] = 0.5
    with pytest.raises(NotPositiveDefiniteError):
        SpdMatrix(a)


def test_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        SpdMatrix(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefiniteError):
        SpdMatrix(np.zeros((2, 2)))


def test_rejects_non_finite():
    a = np.eye(2)
    a[1, 1] = np.nan
    with pytest.raises(NotPositiveDefiniteError):
        SpdMatrix(a)


def test_error_types_are_value_errors():
    # callers that only know ValueError still catch validation failures
    assert issubclass(NotPositiveDefiniteError, ValueError)
    assert issubclass(DimensionMismatchError, ValueError)


def test_dimension_mismatch_in_solve_and_quad_form():
    m = SpdMatrix(np.eye(3))
    with pytest.raises(DimensionMismatchError):
        m.solve(np.ones(4))
    with pytest.raises(DimensionMismatchError):
        m.quad_form_inv(np.ones(2))


# --- scale-matrix spec grammar ---


def test_spec_identity():
    m = spd_from_spec("identity", 4)
    np.testing.assert_array_equal(m.values, np.eye(4))


def test_spec_diagonal():
    m = spd_from_spec("diagonal:1,2,0.5", 3)
    np.testing.assert_array_equal(m.values, np.diag([1.0, 2.0, 0.5]))


def test_spec_ar1_entries():
    rho = 0.6
    m = spd_from_spec("ar1:0.6", 4)
    expected = np.array([[rho ** abs(i - j) for j in range(4)] for i in range(4)])
    np.testing.assert_allclose(m.values, expected, rtol=1e-15)


def test_spec_file_round_trip(tmp_path):
    vals = random_spd(3, 11)
    path = tmp_path / "sigma.csv"
    np.savetxt(path, vals, delimiter=",")
    m = spd_from_spec(f"file:{path}", 3)
    np.testing.assert_allclose(m.values, vals, rtol=1e-12)


@pytest.mark.parametrize(
    "spec",
    [
        "sparse",
        "diagonal:",
        "diagonal:1,zz",
        "diagonal:1,-2",
        "ar1:",
        "ar1:1.5",
        "ar1:-1.0",
    ],
)
def test_spec_rejects_malformed(spec):
    with pytest.raises(ValueError):
        spd_from_spec(spec, 2)


def test_spec_dimension_mismatch():
    with pytest.raises(BadSpecError):
        spd_from_spec("diagonal:1,2,3", 2)
