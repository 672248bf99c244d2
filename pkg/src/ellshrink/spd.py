"""Symmetric positive definite matrices with a cached Cholesky factor.

Every quadratic form in the package goes through triangular solves against
the cached factor; no explicit inverse is ever formed.  A matrix that fails
the factorization is rejected, never repaired.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import (
    BadSpecError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
)

_SYMMETRY_RTOL = 1e-12


class SpdMatrix:
    """A validated symmetric positive definite matrix.

    Parameters
    ----------
    values : (p, p) array_like
        Symmetric positive definite matrix.  Symmetry is checked to a
        relative tolerance of 1e-12; positive definiteness is checked by
        attempting a Cholesky factorization.

    Attributes
    ----------
    dim : int
        Matrix dimension p.
    values : (p, p) ndarray
        Read-only view of the entries.
    chol_lower : (p, p) ndarray
        Read-only lower-triangular Cholesky factor L with values = L L'.
    """

    __slots__ = ("_values", "_chol", "_dim")

    def __init__(self, values):
        a = np.array(values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(
                f"expected a square matrix, got shape {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise NotPositiveDefiniteError("matrix contains non-finite entries")
        scale = np.abs(a).max()
        asym = np.abs(a - a.T).max()
        if scale > 0 and asym > _SYMMETRY_RTOL * scale:
            raise NotPositiveDefiniteError(
                f"matrix is not symmetric: max asymmetry {asym:.3e} "
                f"exceeds {_SYMMETRY_RTOL:.0e} * max entry"
            )
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as err:
            raise NotPositiveDefiniteError(
                f"Cholesky factorization failed: {err}"
            ) from err
        self._values = a
        self._chol = chol
        self._dim = a.shape[0]
        self._values.flags.writeable = False
        self._chol.flags.writeable = False

    @classmethod
    def _from_factor(cls, lower: np.ndarray) -> "SpdMatrix":
        """Build from a lower-triangular factor with positive diagonal.

        Skips re-factorization; used where positive definiteness holds by
        construction (e.g. Wishart draws).
        """
        obj = cls.__new__(cls)
        lower = np.array(lower, dtype=float)
        values = lower @ lower.T
        values = 0.5 * (values + values.T)
        obj._values = values
        obj._chol = lower
        obj._dim = lower.shape[0]
        obj._values.flags.writeable = False
        obj._chol.flags.writeable = False
        return obj

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def chol_lower(self) -> np.ndarray:
        return self._chol

    def solve(self, b):
        """Return ``M^{-1} b`` via two triangular solves."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self._dim:
            raise DimensionMismatchError(
                f"rhs has leading dimension {b.shape[0]}, expected {self._dim}"
            )
        y = solve_triangular(self._chol, b, lower=True)
        return solve_triangular(self._chol, y, lower=True, trans="T")

    def quad_form_inv(self, v) -> float:
        """Return ``v' M^{-1} v`` (nonnegative) without forming the inverse.

        Computed as ``||L^{-1} v||^2`` from the cached factor.
        """
        v = np.asarray(v, dtype=float)
        if v.shape != (self._dim,):
            raise DimensionMismatchError(
                f"vector has shape {v.shape}, expected ({self._dim},)"
            )
        y = solve_triangular(self._chol, v, lower=True)
        return float(y @ y)

    def logdet(self) -> float:
        """Log-determinant from the factor diagonal."""
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def __repr__(self):
        return f"SpdMatrix(dim={self._dim})"


def quad_form_inv(v, m: SpdMatrix) -> float:
    """Quadratic form ``v' M^{-1} v`` against an SPD matrix."""
    return m.quad_form_inv(v)


def spd_from_spec(spec: str, p: int | None = None) -> SpdMatrix:
    """Build a covariance matrix from a textual spec.

    Grammar::

        identity                 identity matrix (needs p)
        diagonal:<d1>,<d2>,...   diagonal entries, all positive
        ar1:<rho>                entries rho^|i-j|, |rho| < 1 (needs p)
        file:<path>              CSV matrix: p lines of p comma-separated
                                 decimal fields, no header

    Parameters
    ----------
    spec : str
        One of the forms above.
    p : int, optional
        Dimension, required for ``identity`` and ``ar1``; checked against
        the others when given.
    """
    spec = spec.strip()
    head, _, arg = spec.partition(":")
    head = head.strip().lower()
    if head == "identity":
        if p is None:
            raise BadSpecError("identity covariance needs an explicit dimension")
        return SpdMatrix(np.eye(p))
    if head == "diagonal":
        try:
            diag = np.array([float(tok) for tok in arg.split(",")], dtype=float)
        except ValueError as err:
            raise BadSpecError(f"bad diagonal entries in {spec!r}") from err
        if diag.size == 0 or np.any(diag <= 0):
            raise BadSpecError("diagonal covariance needs positive entries")
        if p is not None and diag.size != p:
            raise BadSpecError(
                f"diagonal spec has {diag.size} entries but p={p}"
            )
        return SpdMatrix(np.diag(diag))
    if head == "ar1":
        if p is None:
            raise BadSpecError("ar1 covariance needs an explicit dimension")
        try:
            rho = float(arg)
        except ValueError as err:
            raise BadSpecError(f"bad ar1 correlation in {spec!r}") from err
        if not abs(rho) < 1:
            raise BadSpecError(f"ar1 needs |rho| < 1, got {rho}")
        idx = np.arange(p)
        return SpdMatrix(rho ** np.abs(idx[:, None] - idx[None, :]))
    if head == "file":
        try:
            mat = np.loadtxt(arg, delimiter=",", ndmin=2)
        except OSError as err:
            raise BadSpecError(f"cannot read covariance file {arg!r}") from err
        except ValueError as err:
            raise BadSpecError(f"malformed covariance file {arg!r}") from err
        if p is not None and mat.shape != (p, p):
            raise BadSpecError(
                f"covariance file has shape {mat.shape} but p={p}"
            )
        return SpdMatrix(mat)
    raise BadSpecError(f"unknown covariance spec {spec!r}")
