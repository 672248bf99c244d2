"""Location estimators with a scikit-learn style fit API.

Each estimator consumes an (N, p) data matrix and produces ``location_``,
the estimate of the mean vector.  The shrinkage members scale the sample
mean by 1 - r(F)/F where F = ybar' S^{-1} ybar and S is the uncorrected
scatter, so they compose with pipelines exactly like the covariance
estimators in scikit-learn do.

The Monte Carlo risk engine applies the same rules to many replicated
datasets at once; ``bind`` exposes the vectorized core it needs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import BadSpecError, InvalidParameterError
from .shrinkage import ShrinkageFunction, alam_thompson_shrinkage, constant_shrinkage
from .stats import SufficientStats, sufficient_stats

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundLocationRule:
    """An estimator bound to a fixed (p, N): the pure per-dataset rule.

    ``factor`` maps an array of F statistics to the scalar multipliers of
    the sample mean.  The zero vector (F = 0) is a fixed point: the factor
    is defined as 1 there, so the estimate stays at zero.
    """

    label: str
    shrinkage: Optional[ShrinkageFunction]
    positive_part: bool

    def factor(self, f_values) -> np.ndarray:
        f = np.atleast_1d(np.asarray(f_values, dtype=float))
        if self.shrinkage is None:
            return np.ones_like(f)
        out = np.ones_like(f)
        pos = f > 0
        n_zero = f.size - int(pos.sum())
        if n_zero:
            logger.debug(
                "%d dataset(s) with ybar = 0; leaving the estimate at zero",
                n_zero,
            )
        fp = f[pos]
        out[pos] = 1.0 - self.shrinkage(fp) / fp
        if self.positive_part:
            np.maximum(out, 0.0, out=out)
        return out

    def location(self, stats: SufficientStats) -> np.ndarray:
        """Apply the rule to one set of sufficient statistics."""
        f = stats.mean_quad_form()
        return float(self.factor(f)[0]) * stats.ybar


class BaseLocationEstimator(BaseEstimator):
    """Common fit machinery: validate, reduce to sufficient stats, shrink.

    Attributes set by ``fit``
    -------------------------
    location_ : (p,) ndarray
        Estimated mean vector.
    shrinkage_factor_ : float
        Multiplier applied to the sample mean (1.0 for the plain mean).
    mean_quad_form_ : float
        The statistic F = ybar' S^{-1} ybar of the fitted data.
    n_features_in_ : int
        Number of columns p.
    n_samples_ : int
        Number of rows N.
    """

    def bind(self, p: int, n_obs: int) -> BoundLocationRule:
        raise NotImplementedError

    @property
    def label(self) -> str:
        """Grammar string for this estimator."""
        raise NotImplementedError

    def fit(self, X, y=None):
        stats = sufficient_stats(X)
        rule = self.bind(stats.dim, stats.n_obs)
        f = stats.mean_quad_form()
        factor = float(rule.factor(f)[0])
        self.location_ = factor * stats.ybar
        self.shrinkage_factor_ = factor
        self.mean_quad_form_ = f
        self.n_features_in_ = stats.dim
        self.n_samples_ = stats.n_obs
        return self


class SampleMean(BaseLocationEstimator):
    """The sample mean: no shrinkage, valid in any dimension."""

    def bind(self, p, n_obs):
        return BoundLocationRule("mean", None, False)

    @property
    def label(self):
        return "mean"


class JamesStein(BaseLocationEstimator):
    """Constant shrinkage by p - 2: scales the mean by 1 - (p-2)/F.

    Parameters
    ----------
    positive_part : bool, default False
        Clamp the factor at zero from below.  Off by default: the plain
        rule has no truncation and its factor may go negative for small F.
    """

    def __init__(self, positive_part=False):
        self.positive_part = positive_part

    def bind(self, p, n_obs):
        if p < 3:
            raise InvalidParameterError(f"shrinkage needs p >= 3, got p={p}")
        return BoundLocationRule(
            self.label, constant_shrinkage(p - 2), self.positive_part
        )

    @property
    def label(self):
        return "js+" if self.positive_part else "js"


class Baranchik(BaseLocationEstimator):
    """General shrinkage rule (1 - r(F)/F) ybar for a supplied r.

    Parameters
    ----------
    shrinkage : ShrinkageFunction
        Nonnegative shrinkage function.
    positive_part : bool, default False
        Clamp the factor at zero from below.
    """

    def __init__(self, shrinkage, positive_part=False):
        self.shrinkage = shrinkage
        self.positive_part = positive_part

    def bind(self, p, n_obs):
        if p < 3:
            raise InvalidParameterError(f"shrinkage needs p >= 3, got p={p}")
        return BoundLocationRule(
            self.label, self.shrinkage, self.positive_part
        )

    @property
    def label(self):
        return f"baranchik:{self.shrinkage.name}"


class AlamThompson(BaseLocationEstimator):
    """Shrinkage by the bounded increasing family r(x) = (p-2) b x / (x+c).

    The family parameters depend on the data shape, so the shrinkage
    function is constructed at bind time from (p, N, c).

    Parameters
    ----------
    c : float, default 1.0
        Positive half-rise point of the family.
    positive_part : bool, default False
        Clamp the factor at zero from below.
    """

    def __init__(self, c=1.0, positive_part=False):
        self.c = c
        self.positive_part = positive_part

    def bind(self, p, n_obs):
        r = alam_thompson_shrinkage(p, n_obs, self.c)
        return BoundLocationRule(self.label, r, self.positive_part)

    @property
    def label(self):
        return f"baranchik:at,c={float(self.c):g}"


def estimate_mean(stats: SufficientStats) -> np.ndarray:
    """The sample mean from precomputed statistics (scatter is ignored)."""
    return stats.ybar.copy()


def estimate_james_stein(stats: SufficientStats, positive_part=False) -> np.ndarray:
    """Constant-(p-2) shrinkage from precomputed statistics."""
    return JamesStein(positive_part).bind(stats.dim, stats.n_obs).location(stats)


def estimate_baranchik(
    stats: SufficientStats, r: ShrinkageFunction, positive_part=False
) -> np.ndarray:
    """General shrinkage (1 - r(F)/F) ybar from precomputed statistics."""
    return Baranchik(r, positive_part).bind(stats.dim, stats.n_obs).location(stats)


def parse_estimator(spec: str) -> BaseLocationEstimator:
    """Parse the estimator grammar.

    Grammar::

        mean                   sample mean
        js                     constant p-2 shrinkage
        js+                    same, with the factor clamped at zero
        baranchik:at,c=<c>     bounded increasing family, half-rise at c
        baranchik:const,k=<k>  constant shrinkage by k
    """
    spec = spec.strip()
    if spec == "mean":
        return SampleMean()
    if spec == "js":
        return JamesStein()
    if spec == "js+":
        return JamesStein(positive_part=True)
    head, _, arg = spec.partition(":")
    if head == "baranchik" and arg:
        family, _, param = arg.partition(",")
        key, eq, raw = param.partition("=")
        if family == "at" and key == "c" and eq:
            try:
                c = float(raw)
            except ValueError as err:
                raise BadSpecError(f"bad c in {spec!r}") from err
            if not c > 0:
                raise BadSpecError(f"need c > 0 in {spec!r}")
            return AlamThompson(c=c)
        if family == "const" and key == "k" and eq:
            try:
                k = float(raw)
            except ValueError as err:
                raise BadSpecError(f"bad k in {spec!r}") from err
            try:
                return Baranchik(constant_shrinkage(k))
            except InvalidParameterError as err:
                raise BadSpecError(str(err)) from err
    raise BadSpecError(f"unknown estimator spec {spec!r}")
