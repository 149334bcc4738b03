"""Per-segment competency scoring, regional calibration, and competency maps."""

from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.special import ndtr

from ..core import z_grid_points, DEFAULT_Z_GRID, SIGMA_FLOOR
from ..errors import InsufficientDataError, InvalidArgumentError, InvalidRecordError
from ..refmodels.linear import segment_inpaint_loss
from ..types import CalibrationResult, ClassLossStats
from ..validation import check_probability_vector


@dataclass
class CompetencyMap:
    pixel_scores: np.ndarray  # (H, W) in [0, 1]
    segment_scores: np.ndarray  # per-segment score
    z: float

    @property
    def height(self):
        return self.pixel_scores.shape[0]

    @property
    def width(self):
        return self.pixel_scores.shape[1]


def inpaint_loss_fn(inpainter):
    """Adapt an Inpainter into a (image, mask) -> loss callable."""
    return partial(segment_inpaint_loss, inpainter)


def segment_competency_scores(pred_probs, losses, stats, z, include_max_prob=False):
    """Scores for segments with inpainting losses `losses` under one image's pred_probs.

    score(s) = sum_c p_c * (1 - Phi((loss_s - 2*mu_c)/sigma_c - z)); the image-level
    max-probability factor is applied only when include_max_prob is set.
    """
    probs = check_probability_vector(pred_probs)
    losses = np.asarray(losses, dtype=float)
    arg = (losses[:, None] - 2.0 * stats.mean[None, :]) / stats.std[None, :] - z
    scores = (1.0 - ndtr(arg)) @ probs
    if include_max_prob:
        scores = scores * probs.max()
    return scores


def segment_losses_for(image, segment_map, loss_fn):
    """Loss per segment of an image. A single-segment map falls back to scoring
    the whole image with one corner pixel left visible (a full mask is invalid)."""
    losses = []
    for s in range(segment_map.segment_count):
        mask = segment_map.labels == s
        if mask.all():
            mask = mask.copy()
            mask[0, 0] = False
        losses.append(loss_fn(image, mask))
    return np.asarray(losses, dtype=float)


def fit_loss_stats_grouped(losses_by_class, n_classes, sigma_floor=SIGMA_FLOOR):
    """ClassLossStats from a {class: [losses]} mapping; stddev clamped to the floor."""
    mean = np.empty(n_classes)
    std = np.empty(n_classes)
    count = np.empty(n_classes, dtype=int)
    for c in range(n_classes):
        losses = losses_by_class.get(c, [])
        if len(losses) < 2:
            raise InsufficientDataError(f"class {c} has {len(losses)} segment sample(s); need >= 2")
        arr = np.asarray(losses)
        mean[c] = arr.mean()
        std[c] = max(arr.std(ddof=1), sigma_floor)
        count[c] = arr.size
    return ClassLossStats(mean=mean, std=std, sample_count=count)


def fit_segment_loss_stats(images, labels, segmenter, loss_fn, n_classes,
                           sigma_floor=SIGMA_FLOOR):
    """Per-class Gaussian over segment losses on holdout images.

    A segment's class is the ground-truth label of its image. images and labels
    are parallel; loss_fn(image, mask) scores one segment (see inpaint_loss_fn).
    """
    if len(images) == 0:
        raise InsufficientDataError("holdout set is empty")
    losses_by_class = {c: [] for c in range(n_classes)}
    for image, label in zip(images, labels):
        if label is None:
            raise InvalidRecordError("holdout image is missing a label")
        seg = segmenter(image)
        losses_by_class[label].extend(segment_losses_for(image, seg, loss_fn))
    return fit_loss_stats_grouped(losses_by_class, n_classes, sigma_floor)


def regional_competency(image, pred_probs, segment_map, loss_fn, stats, z,
                        include_max_prob=False, segment_losses=None):
    """Competency map for one image: every pixel inherits its segment's score.

    segment_losses, when given, bypasses loss_fn (e.g. to reuse precomputed losses).
    """
    if segment_losses is None:
        segment_losses = segment_losses_for(image, segment_map, loss_fn)
    else:
        segment_losses = np.asarray(segment_losses, dtype=float)
        if segment_losses.size != segment_map.segment_count:
            raise InvalidArgumentError("segment_losses length does not match segment count")
    seg_scores = segment_competency_scores(pred_probs, segment_losses, stats, z, include_max_prob)
    pixel_scores = seg_scores[segment_map.labels]
    return CompetencyMap(pixel_scores=pixel_scores, segment_scores=seg_scores, z=float(z))


def calibrate_regional_z(probs, losses, correct, stats, grid=DEFAULT_Z_GRID,
                         include_max_prob=False):
    """Grid-search z over per-segment scores against segment accuracy.

    probs is an (N, C) matrix of each segment's image-level pred_probs, losses the
    per-segment losses, and correct each segment's inherited image correctness
    indicator. Ties break toward smaller z.
    """
    probs = np.asarray(probs, dtype=float)
    losses = np.asarray(losses, dtype=float)
    correct = np.asarray(correct, dtype=bool)
    if probs.shape[0] == 0:
        raise InsufficientDataError("no segments to calibrate on")
    if not (probs.shape[0] == losses.size == correct.size):
        raise InvalidArgumentError("probs, losses and correct must be parallel")
    accuracy = float(correct.mean())

    candidates = z_grid_points(grid)
    arg0 = (losses[:, None] - 2.0 * stats.mean[None, :]) / stats.std[None, :]
    weights = probs.max(axis=1) if include_max_prob else np.ones(probs.shape[0])
    objective = np.empty(candidates.size)
    for i, z in enumerate(candidates):
        scores = np.einsum("nc,nc->n", probs, 1.0 - ndtr(arg0 - z)) * weights
        objective[i] = abs(scores.mean() - accuracy)
    best = int(np.argmin(objective))
    return CalibrationResult(
        z=float(candidates[best]),
        residual=float(objective[best]),
        grid_lo=float(grid[0]),
        grid_hi=float(grid[1]),
        grid_step=float(grid[2]),
    )
