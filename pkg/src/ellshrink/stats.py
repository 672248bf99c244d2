"""Observations and their sufficient statistics.

A dataset is an (N, p) array of rows Y_i = theta + eps_i with N > p.  The
sufficient pair is the sample mean and the uncorrected scatter matrix

    ybar = (1/N) sum_i Y_i,      S = sum_i (Y_i - ybar)(Y_i - ybar)'.

No Bessel-style correction is applied anywhere: every downstream constant
(N - p, N - p + 2) assumes the raw scatter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateScatterError, InvalidParameterError
from .spd import NotPositiveDefiniteError, SpdMatrix


def validate_dataset(rows) -> np.ndarray:
    """Validate an (N, p) data matrix and return it as a float array.

    Requires finite entries and N > p (the scatter matrix is singular
    otherwise).
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2:
        raise InvalidParameterError(
            f"dataset must be a 2-d array of rows, got ndim={x.ndim}"
        )
    n, p = x.shape
    if p < 1:
        raise InvalidParameterError("dataset needs at least one column")
    if n <= p:
        raise InvalidParameterError(
            f"dataset needs more rows than columns, got N={n}, p={p}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("dataset contains non-finite entries")
    return x


@dataclass(frozen=True)
class SufficientStats:
    """Sample mean and scatter of a dataset, with the factorization cached.

    Attributes
    ----------
    ybar : (p,) ndarray
        Sample mean.
    scatter : SpdMatrix
        Uncorrected scatter matrix S (sum of centered outer products).
    n_obs : int
        Number of rows N.
    dim : int
        Number of columns p.
    """

    ybar: np.ndarray
    scatter: SpdMatrix
    n_obs: int
    dim: int

    def __post_init__(self):
        self.ybar.flags.writeable = False

    def mean_quad_form(self) -> float:
        """The statistic F = ybar' S^{-1} ybar driving every shrinkage rule."""
        return self.scatter.quad_form_inv(self.ybar)


def sufficient_stats(rows) -> SufficientStats:
    """Compute the sufficient statistics of a dataset.

    Parameters
    ----------
    rows : (N, p) array_like
        Observations, one per row; N > p required.

    Returns
    -------
    SufficientStats

    Raises
    ------
    DegenerateScatterError
        If the rows lie in a lower-dimensional affine subspace, i.e. the
        scatter matrix has no Cholesky factorization.  This happens with
        probability zero for continuous data and is surfaced, not repaired.
    """
    x = validate_dataset(rows)
    n, p = x.shape
    ybar = x.mean(axis=0)
    centered = x - ybar
    s = centered.T @ centered
    s = 0.5 * (s + s.T)
    try:
        scatter = SpdMatrix(s)
    except NotPositiveDefiniteError as err:
        raise DegenerateScatterError(
            f"scatter matrix is singular (rows span a subspace): {err}"
        ) from err
    return SufficientStats(ybar=ybar, scatter=scatter, n_obs=n, dim=p)
