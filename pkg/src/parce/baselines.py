"""Baseline confidence scorers: MSP, temperature scaling, energy, KL-matching,
Mahalanobis, k-NN.

All scorers share one orientation: higher score means more in-distribution /
more confident, so the evaluation harness can treat methods uniformly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError
from .validation import check_probability_vector

DEFAULT_T_GRID = (0.05, 10.0, 0.05)
KL_FLOOR = 1e-12
MAHALANOBIS_RIDGE = 1e-3


def msp_score(pred_probs):
    """Maximum softmax probability."""
    return float(check_probability_vector(pred_probs).max())


def _softmax(logits, axis=-1):
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def fit_temperature(logits, labels, grid=DEFAULT_T_GRID):
    """Grid-search the temperature minimizing mean NLL of softmax(logits / T).

    Ties break toward the smaller temperature.
    """
    logits = np.asarray(logits, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if logits.size == 0:
        raise InsufficientDataError("no logits to fit temperature on")
    lo, hi, step = grid
    candidates = lo + step * np.arange(int(round((hi - lo) / step)) + 1)
    candidates = candidates[candidates <= hi + 1e-12]
    n = logits.shape[0]
    best_t, best_nll = None, np.inf
    for t in candidates:
        probs = _softmax(logits / t)
        nll = -np.mean(np.log(np.clip(probs[np.arange(n), labels], 1e-300, None)))
        if nll < best_nll - 1e-15:
            best_t, best_nll = float(t), nll
    return best_t


def temperature_msp(logits, temperature):
    """MSP of the temperature-scaled softmax."""
    if temperature <= 0:
        raise InvalidArgumentError(f"temperature must be positive, got {temperature}")
    logits = np.asarray(logits, dtype=float)
    return float(_softmax(logits / temperature).max())


def energy_score(logits, temperature=1.0):
    """Confidence-oriented energy score: T * logsumexp(logits / T), max-shifted."""
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise InvalidArgumentError("logits must be finite")
    m = logits.max()
    return float(temperature * (m / temperature + np.log(np.sum(np.exp((logits - m) / temperature)))))


def fit_kl_templates(pred_probs, predicted_classes, n_classes):
    """Per-predicted-class mean softmax templates for KL-matching."""
    pred_probs = list(pred_probs)
    if not pred_probs:
        raise InsufficientDataError("no samples to fit KL templates on")
    probs = np.stack([check_probability_vector(p) for p in pred_probs])
    predicted_classes = np.asarray(predicted_classes, dtype=int)
    templates = {}
    for c in range(n_classes):
        sel = predicted_classes == c
        if sel.any():
            templates[c] = probs[sel].mean(axis=0)
    if not templates:
        raise InsufficientDataError("no samples to fit KL templates on")
    return templates


def kl_matching_score(pred_probs, templates):
    """-min_c KL(p || template_c); 0 only when p equals some template."""
    p = np.clip(check_probability_vector(pred_probs), KL_FLOOR, None)
    best = np.inf
    for template in templates.values():
        q = np.clip(np.asarray(template, dtype=float), KL_FLOOR, None)
        best = min(best, float(np.sum(p * np.log(p / q))))
    return -best


@dataclass
class MahalanobisState:
    class_means: np.ndarray  # (C, d)
    cov_inv: np.ndarray  # (d, d)


def fit_mahalanobis(features, labels, ridge=MAHALANOBIS_RIDGE):
    """Per-class means and a shared (pooled within-class) ridged covariance inverse."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if features.size == 0:
        raise InsufficientDataError("no features to fit Mahalanobis state on")
    classes = np.unique(labels)
    d = features.shape[1]
    means = np.zeros((classes.size, d))
    pooled = np.zeros((d, d))
    for i, c in enumerate(classes):
        sel = features[labels == c]
        means[i] = sel.mean(axis=0)
        centered = sel - means[i]
        pooled += centered.T @ centered
    pooled /= features.shape[0]
    pooled += ridge * np.eye(d)
    return MahalanobisState(class_means=means, cov_inv=np.linalg.inv(pooled))


def mahalanobis_score(features, state):
    """-min_c squared Mahalanobis distance to the class means."""
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != state.class_means.shape[1]:
        raise InvalidArgumentError(
            f"feature dim {x.shape[-1]} does not match fitted dim {state.class_means.shape[1]}"
        )
    diffs = state.class_means - x
    dists = np.einsum("cd,de,ce->c", diffs, state.cov_inv, diffs)
    return -float(dists.min())


def _unit_normalize(x):
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / np.where(norm > 0, norm, 1.0)


def knn_score(features, bank, k):
    """-Euclidean distance to the k-th nearest bank vector on unit-normalized features.

    Ties are deterministic: distances sort stably by bank index.
    """
    bank = np.asarray(bank, dtype=float)
    if bank.size == 0 or bank.shape[0] == 0:
        raise InvalidArgumentError("feature bank is empty")
    if not 1 <= k <= bank.shape[0]:
        raise InvalidArgumentError(f"k must be in [1, {bank.shape[0]}], got {k}")
    q = _unit_normalize(np.asarray(features, dtype=float))
    dists = np.linalg.norm(_unit_normalize(bank) - q, axis=1)
    return -float(np.sort(dists, kind="stable")[k - 1])
