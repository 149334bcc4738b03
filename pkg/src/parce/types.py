"""Domain types: sample records, class sets, loss statistics, calibration results."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, InvalidRecordError
from .validation import check_probability_vector

SPLITS = ("train", "holdout", "test")


@dataclass
class ClassSet:
    """The set of classes the classifier predicts over."""

    class_names: list

    def __post_init__(self):
        if len(self.class_names) < 1:
            raise InvalidArgumentError("ClassSet needs at least one class")
        if len(set(self.class_names)) != len(self.class_names):
            raise InvalidArgumentError("class names must be unique")

    @property
    def class_count(self):
        return len(self.class_names)


@dataclass
class SampleRecord:
    """One image's classifier outputs plus reconstruction loss and metadata.

    pred_probs is validated and renormalized on construction; recon_loss must be
    non-negative. label is None for unlabeled (e.g. OOD) samples.
    """

    id: str
    split: str
    label: Optional[int]
    ood: bool
    pred_probs: np.ndarray
    recon_loss: float
    logits: Optional[np.ndarray] = None
    features: Optional[np.ndarray] = None
    segment_losses: Optional[list] = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise InvalidRecordError(f"record {self.id}: unknown split {self.split!r}")
        self.pred_probs = check_probability_vector(self.pred_probs, f"record {self.id}: pred_probs")
        self.recon_loss = float(self.recon_loss)
        if not np.isfinite(self.recon_loss) or self.recon_loss < 0:
            raise InvalidRecordError(f"record {self.id}: recon_loss must be a non-negative real")
        if self.label is not None:
            self.label = int(self.label)
            if not 0 <= self.label < self.pred_probs.size:
                raise InvalidRecordError(f"record {self.id}: label {self.label} out of range")
        if self.logits is not None:
            self.logits = np.asarray(self.logits, dtype=float)
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=float)

    @property
    def predicted_class(self):
        """Argmax of pred_probs; ties broken toward the lowest class index."""
        return int(np.argmax(self.pred_probs))


@dataclass
class ClassLossStats:
    """Per-class Gaussian parameters of reconstruction loss on the holdout set."""

    mean: np.ndarray
    std: np.ndarray
    sample_count: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.asarray(self.std, dtype=float)
        self.sample_count = np.asarray(self.sample_count, dtype=int)

    @property
    def class_count(self):
        return self.mean.size


@dataclass
class CalibrationResult:
    """A grid-searched z-score with its achieved |mean score - accuracy| residual."""

    z: float
    residual: float
    grid_lo: float
    grid_hi: float
    grid_step: float
    implied_percentile: float = field(default=None)

    def __post_init__(self):
        if self.implied_percentile is None:
            # deferred import: core depends on this module
            from .core import std_normal_cdf

            self.implied_percentile = 100.0 * std_normal_cdf(self.z)


@dataclass
class CompetencyScore:
    """Overall competency for one image: value = max_prob * id_probability."""

    value: float
    id_probability: float
    max_prob: float
