"""Overall competency scoring: loss statistics, ID probability, z-score calibration.

The competency of a prediction is bounded below by the product of the predicted
class probability and the probability that the image is in-distribution. The ID
probability is a mixture over classes of Gaussian tail probabilities of the
reconstruction loss, shifted by a calibrated z-score.
"""

import math

import numpy as np
from scipy.special import ndtr

from .errors import (
    InsufficientDataError,
    InvalidArgumentError,
    InvalidRecordError,
    InvalidStatsError,
)
from .types import CalibrationResult, ClassLossStats, CompetencyScore
from .validation import check_probability_vector

SIGMA_FLOOR = 1e-8
DEFAULT_Z_GRID = (-5.0, 5.0, 0.05)


def std_normal_cdf(x):
    """Standard normal CDF at a finite scalar x."""
    if not math.isfinite(x):
        raise InvalidArgumentError(f"std_normal_cdf input must be finite, got {x}")
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def fit_class_loss_stats(holdout, classes, sigma_floor=SIGMA_FLOOR):
    """Fit per-class Gaussian (mean, stddev) of recon_loss on the holdout split.

    Grouping is by ground-truth label. Sample stddev uses the n-1 denominator and
    is clamped to sigma_floor. Every class needs at least 2 labeled samples.
    """
    if not holdout:
        raise InsufficientDataError("holdout set is empty")
    losses_by_class = {c: [] for c in range(classes.class_count)}
    for rec in holdout:
        if rec.split != "holdout":
            raise InvalidRecordError(f"record {rec.id}: expected split 'holdout', got {rec.split!r}")
        if rec.label is None:
            raise InvalidRecordError(f"record {rec.id}: holdout record is missing a label")
        if rec.label >= classes.class_count:
            raise InvalidRecordError(f"record {rec.id}: label {rec.label} not in class set")
        losses_by_class[rec.label].append(rec.recon_loss)

    mean = np.empty(classes.class_count)
    std = np.empty(classes.class_count)
    count = np.empty(classes.class_count, dtype=int)
    for c, losses in losses_by_class.items():
        if len(losses) < 2:
            raise InsufficientDataError(
                f"class {classes.class_names[c]!r} has {len(losses)} holdout sample(s); need >= 2"
            )
        arr = np.asarray(losses)
        mean[c] = arr.mean()
        std[c] = max(arr.std(ddof=1), sigma_floor)
        count[c] = arr.size
    return ClassLossStats(mean=mean, std=std, sample_count=count)


def class_id_probability(loss, mu, sigma, z):
    """P(in-distribution | predicted class) = 1 - Phi((loss - 2*mu)/sigma - z)."""
    if sigma <= 0:
        raise InvalidStatsError(f"sigma must be positive, got {sigma}")
    return 1.0 - std_normal_cdf((loss - 2.0 * mu) / sigma - z)


def _class_id_probabilities(losses, stats, z):
    """Vectorized 1 - Phi((loss - 2*mu_c)/sigma_c - z) for (N,) losses -> (N, C)."""
    losses = np.asarray(losses, dtype=float)[:, None]
    arg = (losses - 2.0 * stats.mean[None, :]) / stats.std[None, :] - z
    return 1.0 - ndtr(arg)


def image_id_probability(record, stats, z):
    """Mixture of per-class ID probabilities weighted by the predicted class probabilities."""
    probs = check_probability_vector(record.pred_probs, f"record {record.id}: pred_probs")
    if probs.size != stats.class_count:
        raise InvalidRecordError(
            f"record {record.id}: {probs.size} classes in pred_probs, stats cover {stats.class_count}"
        )
    per_class = _class_id_probabilities([record.recon_loss], stats, z)[0]
    return float(probs @ per_class)


def overall_competency(record, stats, z):
    """Overall competency score: max class probability times the ID probability."""
    id_prob = image_id_probability(record, stats, z)
    max_prob = float(record.pred_probs.max())
    return CompetencyScore(value=max_prob * id_prob, id_probability=id_prob, max_prob=max_prob)


def competency_values(probs, losses, stats, z):
    """Batch competency values for an (N, C) probability matrix and (N,) losses."""
    probs = np.asarray(probs, dtype=float)
    per_class = _class_id_probabilities(losses, stats, z)
    return probs.max(axis=1) * np.einsum("nc,nc->n", probs, per_class)


def z_grid_points(grid):
    """Expand a (lo, hi, step) grid spec into its candidate z values."""
    lo, hi, step = grid
    if step <= 0 or hi < lo:
        raise InvalidArgumentError(f"invalid grid {grid}")
    n = int(round((hi - lo) / step))
    points = lo + step * np.arange(n + 1)
    return points[points <= hi + 1e-12]


def calibrate_z(holdout, stats, grid=DEFAULT_Z_GRID):
    """Grid-search the z-score so the mean competency matches the holdout accuracy.

    The objective |mean score - accuracy| is evaluated at every grid point; ties
    break toward the smaller z. Accuracy counts records whose argmax probability
    matches their label.
    """
    if not holdout:
        raise InsufficientDataError("holdout set is empty")
    for rec in holdout:
        if rec.label is None:
            raise InvalidRecordError(f"record {rec.id}: calibration needs labeled records")
    probs = np.stack([rec.pred_probs for rec in holdout])
    losses = np.array([rec.recon_loss for rec in holdout])
    labels = np.array([rec.label for rec in holdout])
    accuracy = float(np.mean(probs.argmax(axis=1) == labels))

    candidates = z_grid_points(grid)
    objective = np.array(
        [abs(competency_values(probs, losses, stats, z).mean() - accuracy) for z in candidates]
    )
    best = int(np.argmin(objective))  # argmin returns the first (smallest-z) minimizer
    return CalibrationResult(
        z=float(candidates[best]),
        residual=float(objective[best]),
        grid_lo=float(grid[0]),
        grid_hi=float(grid[1]),
        grid_step=float(grid[2]),
    )
