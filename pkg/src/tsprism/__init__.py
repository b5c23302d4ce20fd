"""Concept-level Shapley explanations for black-box time-series forecasters.

The pipeline: parse an hourly series, split and window it, z-scale, decompose
each window into additive concepts (piecewise-linear growth, per-period
Fourier seasonality, residual), then attribute any model's forecast to those
concepts with exact Shapley values computed by background-component masking.
"""

from __future__ import annotations

from .decompose import (
    DEFAULT_PERIODS,
    GROWTH,
    OTHER,
    Decomposition,
    DecompositionSpec,
    build_design_matrix,
    fit,
    reconstruct,
)
from .errors import (
    DegenerateSplit,
    EmptyInput,
    InsufficientTrainingData,
    LengthMismatch,
    MalformedRow,
    ModelFailure,
    ModelTimeout,
    NonUniformStep,
    PeriodTooLong,
    ProtocolViolation,
    SingularSystem,
    SpawnFailure,
    TooManyConcepts,
    TsprismError,
    WindowTooLong,
    WindowTooShort,
    ZeroVariance,
)
from .models import (
    DEFAULT_RIDGE_LAGS,
    PROTOCOL_VERSION,
    ExternalModel,
    ModelHandle,
    RidgeLagModel,
    external_model,
    persistence,
    seasonal_naive,
    train_ridge,
)
from .report import (
    CorrelationReport,
    GlobalReport,
    WaterfallReport,
    correlation_report,
    global_report,
    render_svg,
    waterfall,
)
from .series import (
    Scaler,
    SplitSpec,
    TimeSeries,
    Window,
    fit_scaler,
    make_windows,
    parse_csv,
    split,
)
from .shapley import (
    MAX_CONCEPTS,
    BackgroundSet,
    Coalition,
    ConceptSet,
    ShapExplanation,
    compute_shap,
    explain_decomposition,
    mask_and_predict,
    sample_background,
    shapley_weight,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PERIODS",
    "DEFAULT_RIDGE_LAGS",
    "GROWTH",
    "MAX_CONCEPTS",
    "OTHER",
    "PROTOCOL_VERSION",
    "BackgroundSet",
    "Coalition",
    "ConceptSet",
    "CorrelationReport",
    "Decomposition",
    "DecompositionSpec",
    "DegenerateSplit",
    "EmptyInput",
    "ExternalModel",
    "GlobalReport",
    "InsufficientTrainingData",
    "LengthMismatch",
    "MalformedRow",
    "ModelFailure",
    "ModelHandle",
    "ModelTimeout",
    "NonUniformStep",
    "PeriodTooLong",
    "ProtocolViolation",
    "RidgeLagModel",
    "Scaler",
    "ShapExplanation",
    "SingularSystem",
    "SpawnFailure",
    "SplitSpec",
    "TimeSeries",
    "TooManyConcepts",
    "TsprismError",
    "WaterfallReport",
    "Window",
    "WindowTooLong",
    "WindowTooShort",
    "ZeroVariance",
    "build_design_matrix",
    "compute_shap",
    "correlation_report",
    "explain_decomposition",
    "external_model",
    "fit",
    "fit_scaler",
    "global_report",
    "make_windows",
    "mask_and_predict",
    "parse_csv",
    "persistence",
    "reconstruct",
    "render_svg",
    "sample_background",
    "seasonal_naive",
    "shapley_weight",
    "split",
    "train_ridge",
    "waterfall",
]
