"""Shrinkage functions r(.) with derivative access.

A shrinkage function maps the quadratic statistic F = ybar' S^{-1} ybar to
a nonnegative amount r(F); the estimator scales the sample mean by
1 - r(F)/F.  Functions carry an optional closed-form derivative; when none
is supplied, a centered finite difference with relative step 1e-6 is used,
which is what the dominance condition checks need from black-box r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import InvalidParameterError

_FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class ShrinkageFunction:
    """An evaluable r(.) >= 0 with derivative access.

    Parameters
    ----------
    name : str
        Label used in reports and CSV output.
    value : callable
        Vectorized map x >= 0 -> r(x) >= 0.
    derivative : callable, optional
        Vectorized closed-form derivative; finite differences otherwise.
    params : dict
        Family parameters, kept for condition checking.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.value(x), dtype=float)

    def deriv(self, x):
        """r'(x), closed-form when available, else centered finite difference.

        The fallback step is max(1e-6, 1e-6 * x), so it stays relative for
        large arguments without collapsing near zero.
        """
        x = np.asarray(x, dtype=float)
        if self.derivative is not None:
            return np.asarray(self.derivative(x), dtype=float)
        h = np.maximum(_FD_REL_STEP, _FD_REL_STEP * np.abs(x))
        return (self(x + h) - self(x - h)) / (2.0 * h)

    def __repr__(self):
        return f"ShrinkageFunction({self.name!r})"


def constant_shrinkage(k: float) -> ShrinkageFunction:
    """The constant function r(x) = k >= 0; k = p - 2 gives the James-Stein rule."""
    k = float(k)
    if k < 0:
        raise InvalidParameterError(f"constant shrinkage must be >= 0, got {k}")
    return ShrinkageFunction(
        name=f"const,k={k:g}",
        value=lambda x: np.full_like(np.asarray(x, dtype=float), k),
        derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        params={"k": k},
    )


def alam_thompson_shrinkage(p: int, n_obs: int, c: float) -> ShrinkageFunction:
    """The bounded increasing family r(x) = (p-2) b x / (x + c).

    Here b = 1 / (N (N - p + 2)) with N the sample size.  The function
    rises from r(0) = 0 to the asymptote b (p - 2), reaching half of it at
    x = c, and its derivative is (p-2) b c / (x + c)^2.

    Requires p >= 3, N > p and c > 0.
    """
    p = int(p)
    n_obs = int(n_obs)
    c = float(c)
    if p < 3:
        raise InvalidParameterError(f"need p >= 3, got p={p}")
    if n_obs <= p:
        raise InvalidParameterError(f"need N > p, got N={n_obs}, p={p}")
    if not c > 0:
        raise InvalidParameterError(f"need c > 0, got c={c}")
    b = 1.0 / (n_obs * (n_obs - p + 2))
    top = (p - 2) * b

    def value(x):
        x = np.asarray(x, dtype=float)
        return top * x / (x + c)

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return top * c / (x + c) ** 2

    return ShrinkageFunction(
        name=f"at,c={c:g}",
        value=value,
        derivative=derivative,
        params={"p": p, "N": n_obs, "c": c, "b": b},
    )
