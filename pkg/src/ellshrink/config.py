"""Flat ``key = value`` experiment configuration files.

Recognized keys::

    p           dimension (int)
    N           rows per dataset (int)
    sigma       identity | diagonal:<d1>,<d2>,... | ar1:<rho> | file:<path>
    theta       zero | ray:<dir>,norms=<n1>,<n2>,... | file:<path>
    mixing      gaussian | t:<nu> | atoms:<t1>=<w1>,...
    estimators  comma-separated list under the estimator grammar
    reps        Monte Carlo replicates (int, >= 100)
    seed        base seed (nonnegative int)
    compare     true | false — append paired-difference rows
    out         CSV output path (default: stdout)

``#`` starts a comment; blank lines are ignored.  List values are split
on commas, except that a fragment beginning with ``c=`` or ``k=`` is a
parameter of the preceding item (so ``baranchik:at,c=1`` survives the
split).  Ray directions are ``e<k>`` (a coordinate axis, 1-based) or
``ones`` (the diagonal direction, normalized to unit length).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimators import parse_estimator
from .exceptions import BadSpecError, ConfigError, InvalidParameterError
from .mixing import parse_mixing
from .spd import spd_from_spec

_KEYS = ("p", "N", "sigma", "theta", "mixing", "estimators", "reps", "seed",
         "compare", "out")
_REQUIRED = ("p", "N", "reps", "seed")
_PARAM_FRAGMENT = re.compile(r"^[ck]\s*=")


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    n_obs: int
    reps: int
    seed: int
    sigma_spec: str = "identity"
    theta_spec: str = "zero"
    mixing_spec: str = "gaussian"
    estimator_specs: tuple = ("mean",)
    compare: bool = False
    out: Optional[str] = None


def split_list(value: str) -> list:
    """Split a comma list, re-attaching ``c=``/``k=`` parameter fragments."""
    items = []
    for frag in value.split(","):
        frag = frag.strip()
        if items and _PARAM_FRAGMENT.match(frag):
            items[-1] += "," + frag
        elif frag:
            items.append(frag)
    return items


def _parse_int(raw, key, line, minimum, what):
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}", line=line)
    if value < minimum:
        raise ConfigError(f"{key} must be {what}, got {value}", line=line)
    return value


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; errors carry the offending line number."""
    seen = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not eq:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}",
                              line=lineno)
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in seen:
            raise ConfigError(
                f"duplicate key {key!r} (first set on line {lines[key]})",
                line=lineno,
            )
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno)
        seen[key] = value
        lines[key] = lineno

    missing = [k for k in _REQUIRED if k not in seen]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    dim = _parse_int(seen["p"], "p", lines["p"], 1, ">= 1")
    n_obs = _parse_int(seen["N"], "N", lines["N"], 2, ">= 2")
    reps = _parse_int(seen["reps"], "reps", lines["reps"], 100, ">= 100")
    seed = _parse_int(seen["seed"], "seed", lines["seed"], 0, "nonnegative")

    kwargs = {"dim": dim, "n_obs": n_obs, "reps": reps, "seed": seed}

    if "sigma" in seen:
        spec = seen["sigma"]
        if not spec.startswith("file:"):
            try:
                spd_from_spec(spec, dim)
            except (BadSpecError, InvalidParameterError) as err:
                raise ConfigError(str(err), line=lines["sigma"]) from err
        kwargs["sigma_spec"] = spec
    if "theta" in seen:
        spec = seen["theta"]
        if not spec.startswith("file:"):
            try:
                theta_points(spec, dim)
            except (BadSpecError, InvalidParameterError) as err:
                raise ConfigError(str(err), line=lines["theta"]) from err
        kwargs["theta_spec"] = spec
    if "mixing" in seen:
        try:
            parse_mixing(seen["mixing"])
        except (BadSpecError, InvalidParameterError) as err:
            raise ConfigError(str(err), line=lines["mixing"]) from err
        kwargs["mixing_spec"] = seen["mixing"]
    if "estimators" in seen:
        specs = tuple(split_list(seen["estimators"]))
        if not specs:
            raise ConfigError("estimators list is empty", line=lines["estimators"])
        for spec in specs:
            try:
                parse_estimator(spec)
            except (BadSpecError, InvalidParameterError) as err:
                raise ConfigError(str(err), line=lines["estimators"]) from err
        kwargs["estimator_specs"] = specs
    if "compare" in seen:
        flag = seen["compare"].lower()
        if flag not in ("true", "false"):
            raise ConfigError(
                f"compare must be true or false, got {seen['compare']!r}",
                line=lines["compare"],
            )
        kwargs["compare"] = flag == "true"
    if "out" in seen:
        kwargs["out"] = seen["out"]

    return ExperimentConfig(**kwargs)


def _unit_direction(token: str, dim: int) -> np.ndarray:
    token = token.strip()
    if token == "ones":
        return np.full(dim, 1.0 / np.sqrt(dim))
    m = re.fullmatch(r"e(\d+)", token)
    if not m:
        raise BadSpecError(f"unknown ray direction {token!r} (want e<k> or ones)")
    k = int(m.group(1))
    if not 1 <= k <= dim:
        raise BadSpecError(f"direction e{k} out of range for p={dim}")
    unit = np.zeros(dim)
    unit[k - 1] = 1.0
    return unit


def theta_points(spec: str, dim: int) -> list:
    """Expand a theta spec into the list of mean vectors it denotes."""
    spec = spec.strip()
    if spec == "zero":
        return [np.zeros(dim)]
    if spec.startswith("ray:"):
        body = spec[len("ray:"):]
        head, sep, norm_list = body.partition(",norms=")
        if not sep:
            raise BadSpecError(f"ray spec needs ,norms=<list>: {spec!r}")
        unit = _unit_direction(head, dim)
        points = []
        for tok in norm_list.split(","):
            try:
                norm = float(tok)
            except ValueError as err:
                raise BadSpecError(f"bad norm {tok!r} in {spec!r}") from err
            if norm < 0:
                raise BadSpecError(f"norms must be nonnegative, got {norm}")
            points.append(norm * unit)
        if not points:
            raise BadSpecError(f"empty norm list in {spec!r}")
        return points
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        try:
            theta = np.loadtxt(path, delimiter=",", ndmin=1)
        except OSError as err:
            raise BadSpecError(f"cannot read theta file {path!r}: {err}") from err
        except ValueError as err:
            raise BadSpecError(f"bad theta file {path!r}: {err}") from err
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != dim:
            raise BadSpecError(
                f"theta file has {theta.shape[0]} entries, expected {dim}"
            )
        return [theta]
    raise BadSpecError(f"unknown theta spec {spec!r}")


def canonical_text(cfg: ExperimentConfig) -> str:
    """Normalized rendering of the scientific content (excludes ``out``)."""
    pairs = [
        ("p", cfg.dim),
        ("N", cfg.n_obs),
        ("sigma", cfg.sigma_spec),
        ("theta", cfg.theta_spec),
        ("mixing", cfg.mixing_spec),
        ("estimators", ",".join(cfg.estimator_specs)),
        ("reps", cfg.reps),
        ("seed", cfg.seed),
        ("compare", "true" if cfg.compare else "false"),
    ]
    return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"


def config_sha256(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_text(cfg).encode()).hexdigest()
