"""Probabilistic competency scores and regional competency maps for image classifiers."""

from .core import (
    calibrate_z,
    class_id_probability,
    fit_class_loss_stats,
    image_id_probability,
    overall_competency,
    std_normal_cdf,
)
from .estimators import CompetencyEstimator
from .types import (
    CalibrationResult,
    ClassLossStats,
    ClassSet,
    CompetencyScore,
    SampleRecord,
)

__all__ = [
    "calibrate_z",
    "class_id_probability",
    "fit_class_loss_stats",
    "image_id_probability",
    "overall_competency",
    "std_normal_cdf",
    "CompetencyEstimator",
    "CalibrationResult",
    "ClassLossStats",
    "ClassSet",
    "CompetencyScore",
    "SampleRecord",
]

__version__ = "0.1.0"
