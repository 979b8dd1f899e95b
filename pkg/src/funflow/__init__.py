"""Recursive kernel regression with curve-valued covariates."""

from .bandwidth import CVGrid, CVReport, bandwidth_sequence, cv_select
from .curves import (
    Curve,
    Dataset,
    Grid,
    inner_product,
    load_dataset,
    save_dataset,
    simulate_brownian,
    simulate_regression_sample,
    target_operator,
)
from .errors import (
    ConfigError,
    DegenerateCdfError,
    DimensionError,
    DivergenceError,
    EmptyDatasetError,
    EmptyNeighborhoodError,
    FormatError,
    FunflowError,
    MissingResponseError,
    ParseError,
    RankError,
    SnapshotError,
)
from .estimator import (
    QUADRATIC,
    UNIFORM,
    AsymptoticConstants,
    BandwidthPlan,
    Kernel,
    PlugInConstants,
    PredictionResult,
    QueryState,
    asymptotic_constants,
    batch_estimate,
    confidence_band,
    empirical_cdf,
    get_kernel,
    init_state,
    load_state,
    normal_quantile,
    plug_in_constants,
    predict,
    prediction_result,
    save_state,
    update_state,
)
from .experiments import (
    Cell,
    CoverageReport,
    EstimatorSettings,
    ExperimentConfig,
    RateReport,
    StudyReport,
    TimingReport,
    coverage_study,
    mspe_study,
    rate_check,
    timing_benchmark,
)
from .seminorms import (
    FittedSemiNorm,
    SemiNormSpec,
    distance,
    distances_to,
    fit_seminorm,
    load_seminorm,
    pca_eigenfunctions,
    pls_basis,
    save_seminorm,
    spline_second_derivative,
)

__version__ = "0.1.0"
