"""Numeric condition checks for shrinkage functions.

Three independent batteries:

- sufficient conditions for minimaxity relative to the sample mean
  (r non-decreasing, r bounded by 2(p-2)/(N(N-p+2)));
- necessary conditions for dominating the constant p-2 rule, phrased as
  tail limits (r' eventually nonnegative, x r'(x) -> 0, and r tending to
  (p-2)/(N(N-p+2)));
- integrability of r' and r^2 against an empirical reference measure
  (samples of F from the Gaussian model at the origin).

All verdicts are grid- or sample-based: a fail carries a concrete witness
and is conclusive, a pass means "not refuted" at the resolution used, and
inconclusive is reserved for limit estimates whose tail has not
stabilized.  Every tolerance lives in the single ``Tolerances`` record
below.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import BadGridError, InvalidParameterError, TooFewSamplesError
from .shrinkage import ShrinkageFunction

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Tolerances:
    """Numerical slack used by every verdict, collected in one place."""

    monotone_abs: float = 1e-12   # allowed decrease between adjacent grid values
    deriv_slack: float = 1e-10    # how negative a "nonnegative" derivative may be
    bound_slack: float = 1e-12    # slack on the minimaxity upper bound
    limit_band: float = 1e-8      # limit checks must land within this of target
    converge_rel: float = 1e-3    # relative spread defining a stabilized tail
    stability_rel: float = 0.10   # half-sample agreement for empirical integrals


TOLERANCES = Tolerances()


@dataclass(frozen=True)
class ConditionEntry:
    """One checked condition: verdict plus the witness that justifies it."""

    condition: str
    verdict: str
    witness_x: Optional[float]
    witness_value: Optional[float]
    detail: str

    def __post_init__(self):
        if self.verdict not in (PASS, FAIL, INCONCLUSIVE):
            raise InvalidParameterError(f"bad verdict {self.verdict!r}")
        if self.verdict == FAIL and self.witness_value is None:
            raise InvalidParameterError(
                f"fail verdict for {self.condition!r} must carry a witness"
            )


@dataclass(frozen=True)
class ConditionReport:
    title: str
    entries: tuple

    @property
    def has_fail(self) -> bool:
        return any(e.verdict == FAIL for e in self.entries)

    def entry(self, condition: str) -> ConditionEntry:
        for e in self.entries:
            if e.condition == condition:
                return e
        raise KeyError(condition)

    def as_text(self) -> str:
        width = max(len(e.condition) for e in self.entries)
        lines = [self.title]
        for e in self.entries:
            where = ""
            if e.witness_x is not None:
                where = f" [x={e.witness_x:g}"
                if e.witness_value is not None:
                    where += f", value={e.witness_value:.9g}"
                where += "]"
            elif e.witness_value is not None:
                where = f" [value={e.witness_value:.9g}]"
            lines.append(
                f"  {e.condition:<{width}}  {e.verdict:<12}  {e.detail}{where}"
            )
        return "\n".join(lines)

    def as_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["condition", "verdict", "witness_x", "witness_value", "detail"])
        for e in self.entries:
            writer.writerow(
                [
                    e.condition,
                    e.verdict,
                    "" if e.witness_x is None else f"{e.witness_x:.17g}",
                    "" if e.witness_value is None else f"{e.witness_value:.17g}",
                    e.detail,
                ]
            )
        return buf.getvalue()


def default_grid() -> np.ndarray:
    """81 log-uniform points on [1e-4, 1e4]."""
    return np.geomspace(1e-4, 1e4, 81)


def default_tail() -> np.ndarray:
    """The geometric sequence 10 * 2^j, j = 0..40."""
    return 10.0 * np.exp2(np.arange(41, dtype=float))


def _validate_pn(p: int, n_obs: int):
    if p < 3:
        raise InvalidParameterError(f"need p >= 3, got p={p}")
    if n_obs <= p:
        raise InvalidParameterError(f"need N > p, got N={n_obs}, p={p}")


def _validate_grid(grid: np.ndarray):
    if grid.ndim != 1 or grid.size < 50:
        raise BadGridError(f"grid needs >= 50 points, got {grid.size}")
    if not np.all(np.isfinite(grid)) or grid[0] <= 0:
        raise BadGridError("grid points must be finite and positive")
    if not np.all(np.diff(grid) > 0):
        raise BadGridError("grid must be strictly increasing")


def _validate_tail(tail: np.ndarray):
    if tail.ndim != 1 or tail.size < 8:
        raise BadGridError(f"tail needs >= 8 points, got {tail.size}")
    if not np.all(np.isfinite(tail)) or tail[0] <= 0:
        raise BadGridError("tail points must be finite and positive")
    ratios = tail[1:] / tail[:-1]
    if not np.all(ratios > 1):
        raise BadGridError("tail must be strictly increasing")
    if np.max(np.abs(ratios / ratios[0] - 1.0)) > 1e-6:
        raise BadGridError("tail must be geometric (constant ratio)")


def check_minimax_conditions(
    r: ShrinkageFunction, p: int, n_obs: int, grid=None
) -> ConditionReport:
    """Sufficient conditions for beating-or-matching the sample mean.

    On the grid: (nondecreasing) adjacent values may not drop by more than
    ``monotone_abs`` and the derivative may not dip below ``-deriv_slack``;
    (bounded) sup r must stay within ``bound_slack`` of
    2(p-2)/(N(N-p+2)).  Grid passes are "not refuted", not proofs.
    """
    _validate_pn(p, n_obs)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    _validate_grid(grid)
    tol = TOLERANCES
    values = r(grid)
    derivs = r.deriv(grid)

    entries = []
    drop = np.nonzero(values[1:] < values[:-1] - tol.monotone_abs)[0]
    dip = np.nonzero(derivs < -tol.deriv_slack)[0]
    if drop.size:
        j = int(drop[0])
        entries.append(
            ConditionEntry(
                "nondecreasing",
                FAIL,
                float(grid[j + 1]),
                float(values[j + 1] - values[j]),
                f"r drops between x={grid[j]:g} and x={grid[j + 1]:g}",
            )
        )
    elif dip.size:
        j = int(dip[0])
        entries.append(
            ConditionEntry(
                "nondecreasing",
                FAIL,
                float(grid[j]),
                float(derivs[j]),
                "negative derivative",
            )
        )
    else:
        entries.append(
            ConditionEntry(
                "nondecreasing",
                PASS,
                None,
                None,
                f"not refuted on {grid.size}-point grid "
                f"[{grid[0]:g}, {grid[-1]:g}]",
            )
        )

    bound = 2.0 * (p - 2) / (n_obs * (n_obs - p + 2))
    j = int(np.argmax(values))
    sup = float(values[j])
    if sup <= bound + tol.bound_slack:
        verdict, detail = PASS, f"sup r = {sup:.9g} <= bound {bound:.9g}"
    else:
        verdict, detail = FAIL, f"sup r = {sup:.9g} exceeds bound {bound:.9g}"
    entries.append(ConditionEntry("bounded", verdict, float(grid[j]), sup, detail))

    return ConditionReport(
        f"sufficient conditions (minimaxity), r={r.name}, p={p}, N={n_obs}",
        tuple(entries),
    )


def check_necessary_conditions(
    r: ShrinkageFunction, p: int, n_obs: int, tail=None
) -> ConditionReport:
    """Necessary tail conditions for dominating the constant p-2 rule.

    Checks, along a geometric tail sequence: (eventually_nondecreasing)
    beyond every tail point there is a later one with derivative above
    ``-deriv_slack``; (slope_decay) x r'(x) tends to 0 — the last five
    values must sit within ``limit_band`` of 0, a stabilized nonzero
    limit fails, an unstabilized tail is inconclusive; (limit_value) r
    tends to (p-2)/(N(N-p+2)), skipped while slope_decay is unresolved.
    """
    _validate_pn(p, n_obs)
    tail = default_tail() if tail is None else np.asarray(tail, dtype=float)
    _validate_tail(tail)
    tol = TOLERANCES
    values = r(tail)
    derivs = r.deriv(tail)

    entries = []
    suffix_best = np.maximum.accumulate(derivs[::-1])[::-1]
    bad = np.nonzero(suffix_best < -tol.deriv_slack)[0]
    if bad.size:
        j = int(bad[0])
        entries.append(
            ConditionEntry(
                "eventually_nondecreasing",
                FAIL,
                float(tail[j]),
                float(suffix_best[j]),
                f"every derivative beyond x={tail[j]:g} is negative",
            )
        )
    else:
        entries.append(
            ConditionEntry(
                "eventually_nondecreasing",
                PASS,
                None,
                None,
                f"not refuted along {tail.size}-point tail up to x={tail[-1]:g}",
            )
        )

    scaled = tail * derivs
    last = scaled[-5:]
    anchor = float(np.median(last))
    spread = float(np.max(np.abs(last - anchor)))
    stabilized = spread <= max(tol.limit_band, tol.converge_rel * abs(anchor))
    if np.all(np.abs(last) <= tol.limit_band):
        slope_verdict = PASS
        entries.append(
            ConditionEntry(
                "slope_decay",
                PASS,
                float(tail[-1]),
                float(scaled[-1]),
                "x r'(x) within limit band of 0 over the last 5 tail points",
            )
        )
    elif stabilized:
        slope_verdict = FAIL
        entries.append(
            ConditionEntry(
                "slope_decay",
                FAIL,
                float(tail[-1]),
                anchor,
                f"x r'(x) stabilizes at {anchor:.9g}, not 0",
            )
        )
    else:
        slope_verdict = INCONCLUSIVE
        entries.append(
            ConditionEntry(
                "slope_decay",
                INCONCLUSIVE,
                float(tail[-1]),
                float(scaled[-1]),
                f"tail of x r'(x) not stabilized (spread {spread:.3g})",
            )
        )

    target = (p - 2) / (n_obs * (n_obs - p + 2))
    if slope_verdict != PASS:
        entries.append(
            ConditionEntry(
                "limit_value",
                INCONCLUSIVE,
                None,
                None,
                "skipped: slope_decay unresolved",
            )
        )
    else:
        est = float(values[-1])
        if abs(est - target) <= tol.limit_band:
            entries.append(
                ConditionEntry(
                    "limit_value",
                    PASS,
                    float(tail[-1]),
                    est,
                    f"tail value {est:.9g} matches target {target:.9g}",
                )
            )
        else:
            entries.append(
                ConditionEntry(
                    "limit_value",
                    FAIL,
                    float(tail[-1]),
                    est,
                    f"tail value {est:.9g} != target {target:.9g}",
                )
            )

    return ConditionReport(
        f"necessary conditions (dominance), r={r.name}, p={p}, N={n_obs}",
        tuple(entries),
    )


def check_schwartz_integrability(
    r: ShrinkageFunction, weight_samples, cap: float = 1e12
) -> ConditionReport:
    """Empirical finiteness of the integrals of r' and r^2.

    The samples should be draws of F from the reference model (Gaussian
    errors, zero mean); at least 1e4 are required.  An integral is flagged
    finite (pass) when its sample mean is below ``cap`` and the first and
    second half-sample means agree within ``stability_rel``; a mean at or
    above cap (or non-finite) fails; an unstable split is inconclusive.
    """
    samples = np.asarray(weight_samples, dtype=float)
    if samples.ndim != 1 or samples.size < 10_000:
        raise TooFewSamplesError(
            f"need >= 10000 reference samples, got {samples.size}"
        )
    if not np.all(np.isfinite(samples)) or np.any(samples < 0):
        raise InvalidParameterError("reference samples must be finite and >= 0")
    tol = TOLERANCES
    half = samples.size // 2
    entries = []
    for name, vals in (
        ("deriv_integral", r.deriv(samples)),
        ("square_integral", r(samples) ** 2),
    ):
        mean = float(np.mean(vals))
        first = float(np.mean(vals[:half]))
        second = float(np.mean(vals[half:]))
        scale = max(abs(first), abs(second), 1e-12)
        if not math.isfinite(mean) or abs(mean) >= cap:
            entries.append(
                ConditionEntry(
                    name, FAIL, None, mean, f"empirical mean {mean:.6g} at or above cap {cap:g}"
                )
            )
        elif abs(first - second) > tol.stability_rel * scale:
            entries.append(
                ConditionEntry(
                    name,
                    INCONCLUSIVE,
                    None,
                    mean,
                    f"half-sample means {first:.6g} / {second:.6g} disagree",
                )
            )
        else:
            entries.append(
                ConditionEntry(
                    name,
                    PASS,
                    None,
                    mean,
                    f"empirical mean {mean:.6g} over {samples.size} samples",
                )
            )
    return ConditionReport(
        f"integrability (empirical reference measure), r={r.name}",
        tuple(entries),
    )


def reference_f_samples(
    p: int, n_obs: int, n_samples: int = 20_000, seed: int = 0
) -> np.ndarray:
    """Draws of F = ybar' S^{-1} ybar under Gaussian errors with zero mean.

    The distribution of F is invariant to the scale matrix, so the
    identity is used.  This is the reference measure the integrability
    check integrates against.
    """
    _validate_pn(p, n_obs)
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    out = np.empty(n_samples)
    done = 0
    while done < n_samples:
        m = min(4096, n_samples - done)
        z = rng.standard_normal((m, n_obs, p))
        ybar = z.mean(axis=1)
        centered = z - ybar[:, None, :]
        scatter = centered.swapaxes(1, 2) @ centered
        sol = np.linalg.solve(scatter, ybar[:, :, None])[:, :, 0]
        out[done : done + m] = np.einsum("kp,kp->k", ybar, sol)
        done += m
    return out
