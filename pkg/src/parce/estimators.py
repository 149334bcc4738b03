"""Sklearn-style estimator facade over the functional scoring API."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import core
from .types import ClassSet


class CompetencyEstimator(BaseEstimator):
    """Fits per-class loss statistics and a calibrated z-score from holdout records,
    then scores arbitrary records.

    Parameters
    ----------
    sigma_floor : lower clamp for per-class loss stddev.
    grid : (lo, hi, step) search grid for the calibration z-score.
    class_names : optional class names; defaults to stringified indices.
    """

    def __init__(self, sigma_floor=core.SIGMA_FLOOR, grid=core.DEFAULT_Z_GRID, class_names=None):
        self.sigma_floor = sigma_floor
        self.grid = grid
        self.class_names = class_names

    def fit(self, records, y=None):
        """Fit loss statistics and calibrate z on labeled holdout SampleRecords."""
        n_classes = records[0].pred_probs.size if records else 0
        names = self.class_names or [str(i) for i in range(n_classes)]
        self.classes_ = ClassSet(class_names=list(names))
        self.stats_ = core.fit_class_loss_stats(records, self.classes_, self.sigma_floor)
        self.calibration_ = core.calibrate_z(records, self.stats_, self.grid)
        return self

    def score_samples(self, records):
        """Competency value per record, as an array."""
        self._check_fitted()
        probs = np.stack([rec.pred_probs for rec in records])
        losses = np.array([rec.recon_loss for rec in records])
        return core.competency_values(probs, losses, self.stats_, self.calibration_.z)

    def score_record(self, record):
        """Full CompetencyScore for a single record."""
        self._check_fitted()
        return core.overall_competency(record, self.stats_, self.calibration_.z)

    def _check_fitted(self):
        if not hasattr(self, "stats_"):
            raise NotFittedError("CompetencyEstimator is not fitted; call fit() first")
