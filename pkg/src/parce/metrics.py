"""Evaluation harness: KS distance, AUROC, FPR@95%TPR, group comparisons, timing.

Orientation contract: in every comparison the positive group (misclassified,
OOD, low-accuracy, unfamiliar) is expected to have LOWER scores. A sample is
flagged positive when its score falls at or below the decision threshold.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

TPR_TARGET = 0.95


def _as_scores(x, name):
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise InvalidArgumentError(f"{name} scores must be non-empty")
    return x


def ks_statistic(a, b):
    """Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b|."""
    a = np.sort(_as_scores(a, "a"))
    b = np.sort(_as_scores(b, "b"))
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def auroc(negatives, positives):
    """P(score_neg > score_pos) + 0.5 * P(equal), via the Mann-Whitney statistic."""
    neg = _as_scores(negatives, "negatives")
    pos = _as_scores(positives, "positives")
    combined = np.concatenate([neg, pos])
    order = np.sort(combined)
    # midranks: average of the left and right insertion ranks handles ties
    lo = np.searchsorted(order, neg, side="left")
    hi = np.searchsorted(order, neg, side="right")
    ranks = (lo + hi + 1) / 2.0
    u = ranks.sum() - neg.size * (neg.size + 1) / 2.0
    return float(u / (neg.size * pos.size))


def fpr_at_95_tpr(negatives, positives, tpr_target=TPR_TARGET):
    """FPR at the smallest threshold t (over observed scores and +inf) with
    TPR >= tpr_target, where "positive" is predicted when score <= t."""
    neg = np.sort(_as_scores(negatives, "negatives"))
    pos = np.sort(_as_scores(positives, "positives"))
    candidates = np.unique(np.concatenate([neg, pos]))
    tpr = np.searchsorted(pos, candidates, side="right") / pos.size
    feasible = np.nonzero(tpr >= tpr_target)[0]
    if feasible.size == 0:
        return 1.0  # only the +inf threshold reaches the target; it admits everything
    t = candidates[feasible[0]]
    return float(np.searchsorted(neg, t, side="right") / neg.size)


@dataclass
class ScoredGroup:
    name: str
    scores: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float).ravel()


@dataclass
class EvalRow:
    method: str
    pair: tuple  # (negative group, positive group)
    dist: float
    auroc: float
    fpr95: float


@dataclass
class EvalReport:
    methods: list
    pairs: list
    rows: list = field(default_factory=list)
    timing: list = field(default_factory=list)  # (method, seconds per sample)


def evaluate_groups(groups, pairs, method="unknown"):
    """One (dist, auroc, fpr95) row per (negative, positive) pair of named groups."""
    by_name = {g.name: g for g in groups}
    rows = []
    for neg_name, pos_name in pairs:
        for name in (neg_name, pos_name):
            if name not in by_name:
                raise InvalidArgumentError(f"group {name!r} named in pairs is missing")
            if by_name[name].scores.size == 0:
                raise InvalidArgumentError(f"group {name!r} is empty")
        neg = by_name[neg_name].scores
        pos = by_name[pos_name].scores
        rows.append(
            EvalRow(
                method=method,
                pair=(neg_name, pos_name),
                dist=ks_statistic(neg, pos),
                auroc=auroc(neg, pos),
                fpr95=fpr_at_95_tpr(neg, pos),
            )
        )
    return rows


def benchmark_time(scorer, records, repetitions=3):
    """Mean wall-clock seconds per sample over `repetitions` passes, after one warm-up."""
    if repetitions < 1:
        raise InvalidArgumentError(f"repetitions must be >= 1, got {repetitions}")
    if not records:
        raise InvalidArgumentError("no records to benchmark on")
    for rec in records:
        scorer(rec)  # warm-up
    start = time.perf_counter()
    for _ in range(repetitions):
        for rec in records:
            scorer(rec)
    elapsed = time.perf_counter() - start
    return elapsed / (repetitions * len(records))
