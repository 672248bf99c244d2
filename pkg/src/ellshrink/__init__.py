"""Shrinkage estimation of a mean vector under elliptically contoured errors.

Monte Carlo risk comparison of the sample mean against Baranchik-style
shrinkage rules, with tools for checking minimaxity/dominance conditions,
verifying Stein-type moment identities, and evaluating the Student-t
posterior of the mean.
"""

from .exceptions import (
    BadGridError,
    BadSpecError,
    ConfigError,
    DegenerateScatterError,
    DimensionMismatchError,
    DimensionTooLargeError,
    DivergentMomentError,
    DofTooSmallError,
    EllshrinkError,
    InvalidParameterError,
    NotPositiveDefiniteError,
    SignedMeasureSamplingError,
    TooFewSamplesError,
)
from .spd import SpdMatrix, quad_form_inv, spd_from_spec
from .stats import SufficientStats, sufficient_stats, validate_dataset
from .mixing import MixingMeasure, parse_mixing, sample_wishart
from .shrinkage import (
    ShrinkageFunction,
    alam_thompson_shrinkage,
    constant_shrinkage,
)
from .estimators import (
    AlamThompson,
    Baranchik,
    JamesStein,
    SampleMean,
    estimate_baranchik,
    estimate_james_stein,
    estimate_mean,
    parse_estimator,
)
from .risk import (
    IdentityEstimate,
    IdentityReport,
    RiskEstimate,
    Scenario,
    dominance_integrand,
    mc_risk,
    mc_risk_signed,
    mc_risk_suite,
    paired_risk_difference,
    quadratic_loss,
    stein_identity_check,
)
from .conditions import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    TOLERANCES,
    ConditionEntry,
    ConditionReport,
    Tolerances,
    check_minimax_conditions,
    check_necessary_conditions,
    check_schwartz_integrability,
    default_grid,
    default_tail,
    reference_f_samples,
)
from .posterior import MeanPosterior, normalization_check
from .config import (
    ExperimentConfig,
    canonical_text,
    config_sha256,
    parse_config,
    split_list,
    theta_points,
)

__version__ = "0.1.0"
