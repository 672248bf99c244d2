"""Scale-mixture representation of elliptically contoured errors.

An error vector follows the two-stage law: draw a positive scale t from a
mixing measure W, then draw a normal vector with covariance t^{-1} Sigma.
Point masses give the Gaussian family, a Gamma mixing law gives the
multivariate t, and finite atom lists cover discrete mixtures, including
signed ones.

Signed measures (some atom weights negative) are representable but never
sampled: every functional of such a law is obtained by combining the
per-atom conditional values with the signed weights.  Sampling entry
points reject them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    BadSpecError,
    DivergentMomentError,
    DofTooSmallError,
    InvalidParameterError,
    SignedMeasureSamplingError,
)
from .spd import SpdMatrix

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MixingMeasure:
    """A (possibly signed) mixing measure on the positive half-line.

    Attributes
    ----------
    kind : str
        One of ``"point"``, ``"gamma"``, ``"atoms"``.
    params : tuple
        ``(t0,)`` for a point mass, ``(shape, rate)`` for the gamma
        family, ``((t_1, w_1), ...)`` for an atom list.
    is_probability : bool
        True iff all weights are nonnegative and total mass is one.
        Sampling requires this; risk evaluation does not.
    """

    kind: str
    params: tuple
    is_probability: bool

    # -- constructors -----------------------------------------------------

    @staticmethod
    def point_mass(t0: float) -> "MixingMeasure":
        """All mass at a single scale t0 > 0; t0 = 1 is the Gaussian model."""
        t0 = float(t0)
        if not t0 > 0:
            raise InvalidParameterError(f"point mass location must be > 0, got {t0}")
        return MixingMeasure("point", (t0,), True)

    @staticmethod
    def gamma_rate(shape: float, rate: float) -> "MixingMeasure":
        """Gamma(shape, rate) mixing; shape nu/2, rate nu/2 gives the t(nu) family.

        Requires shape > 1 so that E[1/t] = rate / (shape - 1) is finite:
        the error covariance does not exist otherwise.
        """
        shape = float(shape)
        rate = float(rate)
        if not rate > 0:
            raise InvalidParameterError(f"gamma rate must be > 0, got {rate}")
        if not shape > 1:
            raise InvalidParameterError(
                f"gamma shape must be > 1 for a finite inverse-scale mean, got {shape}"
            )
        return MixingMeasure("gamma", (shape, rate), True)

    @staticmethod
    def atoms(pairs) -> "MixingMeasure":
        """Finite atom list [(t_k, w_k)]; weights must sum to one.

        All locations must be positive and distinct.  Negative weights are
        allowed and mark the measure as signed (is_probability False).
        """
        cleaned = tuple((float(t), float(w)) for t, w in pairs)
        if not cleaned:
            raise InvalidParameterError("atom list is empty")
        locations = [t for t, _ in cleaned]
        if any(t <= 0 for t in locations):
            raise InvalidParameterError("atom locations must be > 0")
        if len(set(locations)) != len(locations):
            raise InvalidParameterError("atom locations must be distinct")
        total = sum(w for _, w in cleaned)
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise InvalidParameterError(
                f"atom weights must sum to 1, got {total!r}"
            )
        is_probability = all(w >= 0 for _, w in cleaned)
        return MixingMeasure("atoms", cleaned, is_probability)

    # -- spec grammar -----------------------------------------------------

    @property
    def label(self) -> str:
        """Grammar string for this measure (round-trips via parse_mixing)."""
        if self.kind == "point":
            (t0,) = self.params
            if t0 == 1.0:
                return "gaussian"
            return f"atoms:{t0:g}=1"
        if self.kind == "gamma":
            shape, rate = self.params
            if shape == rate:
                return f"t:{2 * shape:g}"
            return f"gamma:{shape:g},{rate:g}"
        parts = ",".join(f"{t:g}={w:g}" for t, w in self.params)
        return f"atoms:{parts}"

    # -- moments ----------------------------------------------------------

    def inverse_scale_mean(self) -> float:
        """The mixture moment m1 = integral of 1/t dW(t).

        The error covariance is m1 * Sigma.
        """
        if self.kind == "point":
            return 1.0 / self.params[0]
        if self.kind == "gamma":
            shape, rate = self.params
            if not shape > 1:
                raise DivergentMomentError(
                    f"E[1/t] diverges for gamma shape {shape} <= 1"
                )
            return rate / (shape - 1.0)
        return float(sum(w / t for t, w in self.params))

    # -- sampling ---------------------------------------------------------

    def sample_scale(self, rng: np.random.Generator) -> float:
        """Draw one scale t from the measure.

        Point masses consume no randomness; the gamma family consumes one
        gamma variate; probability atom lists consume one uniform.
        """
        if not self.is_probability:
            raise SignedMeasureSamplingError(
                "cannot sample a signed mixing measure; use the per-atom "
                "conditional path instead"
            )
        if self.kind == "point":
            return self.params[0]
        if self.kind == "gamma":
            shape, rate = self.params
            return float(rng.gamma(shape, 1.0 / rate))
        locations = np.array([t for t, _ in self.params])
        cumw = np.cumsum([w for _, w in self.params])
        u = rng.random()
        return float(locations[min(np.searchsorted(cumw, u), len(locations) - 1)])

    def sample_errors(
        self, sigma: SpdMatrix, n_rows: int, rng: np.random.Generator
    ) -> np.ndarray:
        """Draw an (n_rows, p) block of error vectors sharing one scale draw.

        A single t is drawn and all rows are conditionally Gaussian with
        covariance t^{-1} Sigma: the joint elliptical model ties every row
        of a dataset to a common scale.  Unconditional row covariance is
        inverse_scale_mean() * Sigma.
        """
        if n_rows < 1:
            raise InvalidParameterError(f"need at least one row, got {n_rows}")
        t = self.sample_scale(rng)
        z = rng.standard_normal((n_rows, sigma.dim))
        return (z @ sigma.chol_lower.T) / np.sqrt(t)

    def __repr__(self):
        return f"MixingMeasure({self.label!r})"


def parse_mixing(spec: str) -> MixingMeasure:
    """Parse the mixing-measure grammar.

    Grammar::

        gaussian                        point mass at t = 1
        t:<nu>                          multivariate t with nu > 2
        atoms:<t1>=<w1>,<t2>=<w2>,...   finite (possibly signed) atom list
    """
    spec = spec.strip()
    head, _, arg = spec.partition(":")
    head = head.strip().lower()
    if head == "gaussian":
        if arg:
            raise BadSpecError(f"gaussian takes no parameters, got {spec!r}")
        return MixingMeasure.point_mass(1.0)
    if head == "t":
        try:
            nu = float(arg)
        except ValueError as err:
            raise BadSpecError(f"bad t degrees of freedom in {spec!r}") from err
        if not nu > 2:
            raise BadSpecError(f"t mixing needs nu > 2, got {nu}")
        return MixingMeasure.gamma_rate(nu / 2.0, nu / 2.0)
    if head == "gamma":
        try:
            shape_s, rate_s = arg.split(",")
            return MixingMeasure.gamma_rate(float(shape_s), float(rate_s))
        except (ValueError, InvalidParameterError) as err:
            if isinstance(err, InvalidParameterError):
                raise
            raise BadSpecError(f"bad gamma parameters in {spec!r}") from err
    if head == "atoms":
        pairs = []
        for tok in arg.split(","):
            loc_s, eq, w_s = tok.partition("=")
            if not eq:
                raise BadSpecError(f"atom {tok!r} is not of the form t=w")
            try:
                pairs.append((float(loc_s), float(w_s)))
            except ValueError as err:
                raise BadSpecError(f"bad atom {tok!r}") from err
        return MixingMeasure.atoms(pairs)
    raise BadSpecError(f"unknown mixing spec {spec!r}")


def sample_wishart(scale: SpdMatrix, dof: int, rng: np.random.Generator) -> SpdMatrix:
    """Draw a Wishart matrix W_p(scale, dof) by the triangular construction.

    The draw is L A A' L' where L is the Cholesky factor of the scale and A
    is lower triangular with chi-distributed diagonal entries (dof, dof-1,
    ..., dof-p+1 degrees of freedom) and standard normal subdiagonal
    entries.  Positive definite by construction whenever dof >= p.

    Stream consumption order: the p diagonal chi-squares first (one call),
    then the p(p-1)/2 subdiagonal normals (one call).
    """
    p = scale.dim
    if dof < p:
        raise DofTooSmallError(f"Wishart needs dof >= dim, got dof={dof}, dim={p}")
    a = _wishart_factor(p, dof, rng)
    return SpdMatrix._from_factor(scale.chol_lower @ a)


def _wishart_factor(p: int, dof: int, rng: np.random.Generator) -> np.ndarray:
    """Lower-triangular A with A A' ~ W_p(I, dof)."""
    a = np.zeros((p, p))
    df = dof - np.arange(p)
    a[np.diag_indices(p)] = np.sqrt(rng.chisquare(df))
    if p > 1:
        tril = np.tril_indices(p, k=-1)
        a[tril] = rng.standard_normal(p * (p - 1) // 2)
    return a
