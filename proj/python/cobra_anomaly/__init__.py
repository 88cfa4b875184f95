"""Subject-level confidence-based anomaly scores (COBRA)."""

from ._cobra import (
    CobraError,
    bootstrap_ci,
    cobra_score,
    cohort_scores,
    confidence,
    correlate,
    fisher_ci,
    frechet_distance,
    frechet_distance_gaussian,
    kde,
    matrix_sqrt_psd,
    pearson,
    predict_class,
    run_cli,
    silverman_bandwidth,
    spearman,
    validate_record,
)

__all__ = [
    "CobraError",
    "bootstrap_ci",
    "cobra_score",
    "cohort_scores",
    "confidence",
    "correlate",
    "fisher_ci",
    "frechet_distance",
    "frechet_distance_gaussian",
    "kde",
    "matrix_sqrt_psd",
    "pearson",
    "predict_class",
    "run_cli",
    "silverman_bandwidth",
    "spearman",
    "validate_record",
]
