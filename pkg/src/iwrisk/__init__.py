"""Importance-weighted risk estimation under covariate shift, at desk scale.

The package simulates the sampling behavior of the exact-weight risk
estimator for a one-dimensional Gaussian covariate-shift setting: the
estimator is unbiased but right-skewed at small sample sizes, so most
datasets underestimate the target risk, which distorts regularization-offset
selection (overestimates in the body of the sampling distribution, large
underestimates in its tail).
"""

__version__ = "0.1.0"

from .analytic import (
    MomentOracleResult,
    analytic_target_risk,
    estimator_skewness,
    estimator_variance,
    expected_moment,
    moment_convergence_check,
    raw_moment_integral,
)
from .domain import (
    CovariateShiftProblem,
    GaussianSpec,
    gaussian_pdf,
    importance_weight,
    posterior_prob,
    standard_normal_cdf,
)
from .experiments import (
    ExperimentConfig,
    ExperimentRecord,
    ModelSelectionResult,
    PartSummary,
    RiskDistributionResult,
    WeightHistogramResult,
    run_model_selection,
    run_risk_distribution,
    run_weight_histogram,
)
from .risk import (
    THETA_BASE,
    RegularizedLinearClassifier,
    RiskEstimate,
    empirical_risk,
    predict,
    quadratic_loss,
)
from .sampling import (
    LabeledDataset,
    RngSeedSpec,
    draw_dataset,
    rejection_sample_conditional,
)
from .selection import (
    DEFAULT_GRID,
    DegenerateDesignError,
    LambdaGrid,
    SelectionResult,
    select_lambda_closed_form,
    select_lambda_grid,
)
from .stats import (
    BodyTailSplit,
    HistogramData,
    MomentSummary,
    body_tail_split,
    histogram,
    sample_moments,
)

__all__ = [
    "__version__",
    "MomentOracleResult",
    "analytic_target_risk",
    "estimator_skewness",
    "estimator_variance",
    "expected_moment",
    "moment_convergence_check",
    "raw_moment_integral",
    "CovariateShiftProblem",
    "GaussianSpec",
    "gaussian_pdf",
    "importance_weight",
    "posterior_prob",
    "standard_normal_cdf",
    "ExperimentConfig",
    "ExperimentRecord",
    "ModelSelectionResult",
    "PartSummary",
    "RiskDistributionResult",
    "WeightHistogramResult",
    "run_model_selection",
    "run_risk_distribution",
    "run_weight_histogram",
    "THETA_BASE",
    "RegularizedLinearClassifier",
    "RiskEstimate",
    "empirical_risk",
    "predict",
    "quadratic_loss",
    "LabeledDataset",
    "RngSeedSpec",
    "draw_dataset",
    "rejection_sample_conditional",
    "DEFAULT_GRID",
    "DegenerateDesignError",
    "LambdaGrid",
    "SelectionResult",
    "select_lambda_closed_form",
    "select_lambda_grid",
    "BodyTailSplit",
    "HistogramData",
    "MomentSummary",
    "body_tail_split",
    "histogram",
    "sample_moments",
]
