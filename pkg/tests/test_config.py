"""Config file parsing, the theta grammar, and the canonical hash."""

import numpy as np
import pytest

from ellshrink import (
    BadSpecError,
    ConfigError,
    canonical_text,
    config_sha256,
    parse_config,
    split_list,
    theta_points,
)

FULL = """\
# risk experiment
p = 5
N = 20            # rows per dataset
sigma = ar1:0.5
theta = ray:e1,norms=0,2,5
mixing = t:6

estimators = mean, baranchik:at,c=1, baranchik:const,k=2
reps = 1000
seed = 42
compare = true
out = results.csv
"""


def test_parse_full_config():
    cfg = parse_config(FULL)
    assert cfg.dim == 5
    assert cfg.n_obs == 20
    assert cfg.sigma_spec == "ar1:0.5"
    assert cfg.theta_spec == "ray:e1,norms=0,2,5"
    assert cfg.mixing_spec == "t:6"
    assert cfg.estimator_specs == ("mean", "baranchik:at,c=1", "baranchik:const,k=2")
    assert cfg.reps == 1000
    assert cfg.seed == 42
    assert cfg.compare is True
    assert cfg.out == "results.csv"


def test_defaults():
    cfg = parse_config("p = 4\nN = 10\nreps = 200\nseed = 0\n")
    assert cfg.sigma_spec == "identity"
    assert cfg.theta_spec == "zero"
    assert cfg.mixing_spec == "gaussian"
    assert cfg.estimator_specs == ("mean",)
    assert cfg.compare is False
    assert cfg.out is None


def test_missing_required_keys():
    with pytest.raises(ConfigError, match="missing required"):
        parse_config("p = 4\nN = 10\n")


def test_duplicate_key_reports_both_lines():
    text = "p = 4\nN = 10\np = 5\nreps = 200\nseed = 0\n"
    with pytest.raises(ConfigError, match="duplicate") as exc:
        parse_config(text)
    assert exc.value.line == 3
    assert "line 1" in str(exc.value)


def test_unknown_key_line_number():
    with pytest.raises(ConfigError) as exc:
        parse_config("p = 4\nN = 10\nreps = 200\nseed = 0\nsgima = identity\n")
    assert exc.value.line == 5


def test_malformed_line():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("p = 4\nN 10\nreps = 200\nseed = 0\n")


def test_value_validation_happens_at_parse_time():
    base = "p = 5\nN = 20\nreps = 200\nseed = 0\n"
    with pytest.raises(ConfigError):
        parse_config(base + "mixing = t:1\n")  # nu must exceed 2
    with pytest.raises(ConfigError):
        parse_config(base + "estimators = median\n")
    with pytest.raises(ConfigError):
        parse_config(base + "sigma = ar1:2\n")
    with pytest.raises(ConfigError):
        parse_config(base + "theta = ray:e9,norms=1\n")
    with pytest.raises(ConfigError):
        parse_config(base + "compare = yes\n")
    with pytest.raises(ConfigError, match="reps"):
        parse_config("p = 5\nN = 20\nreps = 99\nseed = 0\n")
    with pytest.raises(ConfigError, match="seed"):
        parse_config("p = 5\nN = 20\nreps = 200\nseed = -1\n")


def test_file_specs_are_deferred():
    # file-backed sigma/theta are resolved at run time, not parse time
    cfg = parse_config(
        "p = 3\nN = 8\nreps = 200\nseed = 0\n"
        "sigma = file:/no/such/sigma.csv\ntheta = file:/no/such/theta.csv\n"
    )
    assert cfg.sigma_spec.startswith("file:")


def test_split_list_reassembles_parameter_fragments():
    assert split_list("mean, baranchik:at,c=1, js+") == [
        "mean", "baranchik:at,c=1", "js+",
    ]
    assert split_list("baranchik:const,k=0.5,baranchik:at,c=2") == [
        "baranchik:const,k=0.5", "baranchik:at,c=2",
    ]
    assert split_list("mean") == ["mean"]


# --- theta grammar ---


def test_theta_zero():
    (pt,) = theta_points("zero", 4)
    np.testing.assert_array_equal(pt, np.zeros(4))


def test_theta_ray_basis_vector():
    pts = theta_points("ray:e2,norms=0,1,2.5", 3)
    assert len(pts) == 3
    np.testing.assert_array_equal(pts[0], np.zeros(3))
    np.testing.assert_array_equal(pts[1], [0, 1, 0])
    np.testing.assert_array_equal(pts[2], [0, 2.5, 0])


def test_theta_ray_ones_direction_is_unit():
    (pt,) = theta_points("ray:ones,norms=3", 4)
    assert np.linalg.norm(pt) == pytest.approx(3.0, rel=1e-14)
    assert np.all(pt == pt[0])


def test_theta_file(tmp_path):
    path = tmp_path / "theta.csv"
    np.savetxt(path, np.array([[1.0, 2.0, 3.0]]), delimiter=",")
    (pt,) = theta_points(f"file:{path}", 3)
    np.testing.assert_array_equal(pt, [1.0, 2.0, 3.0])


@pytest.mark.parametrize(
    "spec",
    [
        "ray:e0,norms=1",
        "ray:e5,norms=1",
        "ray:diag,norms=1",
        "ray:e1",
        "ray:e1,norms=",
        "ray:e1,norms=-1",
        "ray:e1,norms=x",
        "file:/no/such/file.csv",
        "origin",
    ],
)
def test_theta_rejects(spec):
    with pytest.raises(BadSpecError):
        theta_points(spec, 4)


# --- canonicalization ---


def test_canonical_text_is_stable_and_excludes_out():
    cfg = parse_config(FULL)
    text = canonical_text(cfg)
    assert "out" not in text
    assert text.splitlines()[0] == "p = 5"
    # reparsing the canonical text gives the same canonical text
    assert canonical_text(parse_config(text)) == text


def test_hash_ignores_formatting_but_not_values():
    cfg = parse_config(FULL)
    reordered = parse_config(
        "seed=42\nreps=1000\ncompare = TRUE\n# moved things around\n"
        "estimators = mean,baranchik:at,c=1,baranchik:const,k=2\n"
        "mixing = t:6\ntheta = ray:e1,norms=0,2,5\nsigma = ar1:0.5\n"
        "N = 20\np = 5\nout = elsewhere.csv\n".replace("TRUE", "true")
    )
    assert config_sha256(reordered) == config_sha256(cfg)
    bumped = parse_config(FULL.replace("seed = 42", "seed = 43"))
    assert config_sha256(bumped) != config_sha256(cfg)
