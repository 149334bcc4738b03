"""Input validation helpers used by the estimators and the functional API."""

import numpy as np

from .errors import InvalidArgumentError, InvalidRecordError

PROB_SUM_TOL = 1e-6


def check_finite(x, name="value"):
    """Raise InvalidArgumentError unless x is a finite scalar; return it as float."""
    x = float(x)
    if not np.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite, got {x}")
    return x


def check_probability_vector(p, name="pred_probs"):
    """Validate a probability vector and return it renormalized to sum exactly 1.

    Entries must lie in [0, 1] and sum to 1 within PROB_SUM_TOL; the vector is
    then renormalized exactly so downstream arithmetic sees a true simplex point.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise InvalidRecordError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise InvalidRecordError(f"{name} contains non-finite entries")
    if np.any(p < -PROB_SUM_TOL) or np.any(p > 1 + PROB_SUM_TOL):
        raise InvalidRecordError(f"{name} entries must lie in [0, 1]")
    total = p.sum()
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise InvalidRecordError(f"{name} sums to {total}, expected 1 within {PROB_SUM_TOL}")
    return np.clip(p, 0.0, 1.0) / np.clip(p, 0.0, 1.0).sum()


def check_image(image, name="image"):
    """Validate an (H, W, 3) float image with values in [0, 1]."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 3 or image.shape[2] != 3:
        raise InvalidArgumentError(f"{name} must have shape (H, W, 3), got {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must have positive height and width")
    if not np.all(np.isfinite(image)):
        raise InvalidArgumentError(f"{name} contains non-finite pixels")
    if image.min() < 0.0 or image.max() > 1.0:
        raise InvalidArgumentError(f"{name} pixels must lie in [0, 1]")
    return image
