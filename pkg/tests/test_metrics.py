"""Evaluation harness: KS, AUROC, FPR@95TPR, group evaluation, timing."""

import time

import numpy as np
import pytest

from parce.errors import InvalidArgumentError
from parce.metrics import (
    ScoredGroup,
    auroc,
    benchmark_time,
    evaluate_groups,
    fpr_at_95_tpr,
    ks_statistic,
)
from parce.types import SampleRecord

from oracles import auroc_oracle, fpr95_oracle, ks_oracle


class TestKsStatistic:
    def test_identical_multisets(self):
        assert ks_statistic([1.0, 2.0, 2.0], [2.0, 1.0, 2.0]) == 0.0

    def test_disjoint_supports(self):
        assert ks_statistic([0.0, 0.0], [1.0, 1.0]) == 1.0

    def test_interleaved_hand_case(self):
        # ECDFs evaluated at 1, 1.5, 2, 2.5 -> max gap 0.5
        assert ks_statistic([1.0, 2.0], [1.5, 2.5]) == pytest.approx(0.5, abs=1e-15)

    def test_symmetric(self, rng):
        a = rng.normal(size=30)
        b = rng.normal(size=17)
        assert ks_statistic(a, b) == ks_statistic(b, a)

    def test_monotone_transform_invariance(self, rng):
        a = rng.normal(size=25)
        b = rng.normal(size=40)
        f = lambda x: np.exp(x) + 3 * x
        assert ks_statistic(f(a), f(b)) == pytest.approx(ks_statistic(a, b), abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ks_statistic([], [1.0])


class TestAuroc:
    def test_perfect_separation(self):
        assert auroc([0.9, 0.8], [0.1, 0.2]) == 1.0

    def test_identical_distributions(self):
        assert auroc([0.3, 0.7], [0.3, 0.7]) == 0.5

    def test_complement_identity_tie_free(self, rng):
        neg = rng.normal(size=20)
        pos = rng.normal(size=30) + 0.5
        assert auroc(neg, pos) + auroc(pos, neg) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_transform_invariance(self, rng):
        neg = rng.normal(size=15)
        pos = rng.normal(size=25)
        f = lambda x: x**3 + 5 * x
        assert auroc(f(neg), f(pos)) == pytest.approx(auroc(neg, pos), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            auroc([1.0], [])


class TestFprAt95Tpr:
    def test_perfect_separation(self):
        assert fpr_at_95_tpr([0.9] * 5, [0.1] * 5) == 0.0

    def test_all_equal_scores(self):
        assert fpr_at_95_tpr([0.5] * 4, [0.5] * 6) == 1.0

    def test_constant_shift_of_negatives_non_increasing(self, rng):
        neg = rng.uniform(0, 1, size=30)
        pos = rng.uniform(0, 1, size=30)
        base = fpr_at_95_tpr(neg, pos)
        shifted = fpr_at_95_tpr(neg + 0.3, pos)
        assert shifted <= base

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fpr_at_95_tpr([], [1.0])


class TestOracleEquivalence:
    def test_hundred_random_instances(self, rng):
        """All three metrics match brute-force oracles within 1e-12, in < 5 s."""
        start = time.perf_counter()
        for _ in range(100):
            n = int(rng.integers(1, 51))
            m = int(rng.integers(1, 51))
            # mix of continuous values and deliberate ties
            neg = np.round(rng.normal(size=n), int(rng.integers(0, 3)))
            pos = np.round(rng.normal(loc=-0.5, size=m), int(rng.integers(0, 3)))
            assert ks_statistic(neg, pos) == pytest.approx(
                ks_oracle(neg, pos), abs=1e-12
            )
            assert auroc(neg, pos) == pytest.approx(
                auroc_oracle(list(neg), list(pos)), abs=1e-12
            )
            assert fpr_at_95_tpr(neg, pos) == pytest.approx(
                fpr95_oracle(list(neg), list(pos)), abs=1e-12
            )
        assert time.perf_counter() - start < 5.0


class TestEvaluateGroups:
    def test_perfectly_separated_row(self):
        groups = [ScoredGroup("a", [0.9, 0.8]), ScoredGroup("b", [0.1, 0.2])]
        row = evaluate_groups(groups, [("a", "b")], method="m")[0]
        assert (row.dist, row.auroc, row.fpr95) == (1.0, 1.0, 0.0)
        assert row.method == "m"
        assert row.pair == ("a", "b")

    def test_identical_groups_row(self):
        groups = [ScoredGroup("a", [0.1, 0.9]), ScoredGroup("b", [0.1, 0.9])]
        row = evaluate_groups(groups, [("a", "b")])[0]
        assert (row.dist, row.auroc, row.fpr95) == (0.0, 0.5, 1.0)

    def test_missing_group_rejected(self):
        with pytest.raises(InvalidArgumentError):
            evaluate_groups([ScoredGroup("a", [1.0])], [("a", "b")])

    def test_empty_group_rejected(self):
        groups = [ScoredGroup("a", [1.0]), ScoredGroup("b", [])]
        with pytest.raises(InvalidArgumentError):
            evaluate_groups(groups, [("a", "b")])

    def test_rows_match_metric_recomputation(self, rng):
        groups = [
            ScoredGroup("x", rng.normal(size=40)),
            ScoredGroup("y", rng.normal(loc=-1, size=30)),
            ScoredGroup("z", rng.normal(loc=-2, size=20)),
        ]
        pairs = [("x", "y"), ("x", "z"), ("y", "z")]
        rows = evaluate_groups(groups, pairs)
        by_name = {g.name: g.scores for g in groups}
        for row in rows:
            neg, pos = by_name[row.pair[0]], by_name[row.pair[1]]
            assert row.dist == pytest.approx(ks_oracle(neg, pos), abs=1e-12)
            assert row.auroc == pytest.approx(auroc_oracle(list(neg), list(pos)), abs=1e-12)
            assert row.fpr95 == pytest.approx(fpr95_oracle(list(neg), list(pos)), abs=1e-12)


def _stub_records(n):
    return [
        SampleRecord(id=f"r{i}", split="test", label=0, ood=False,
                     pred_probs=np.array([1.0]), recon_loss=0.1)
        for i in range(n)
    ]


class TestBenchmarkTime:
    def test_positive_and_stable(self):
        records = _stub_records(50)
        scorer = lambda rec: rec.recon_loss * 2
        t1 = benchmark_time(scorer, records, repetitions=3)
        t2 = benchmark_time(scorer, records, repetitions=3)
        assert t1 > 0 and t2 > 0
        assert max(t1, t2) / min(t1, t2) < 5.0

    def test_invalid_args(self):
        with pytest.raises(InvalidArgumentError):
            benchmark_time(lambda r: 0, _stub_records(1), repetitions=0)
        with pytest.raises(InvalidArgumentError):
            benchmark_time(lambda r: 0, [], repetitions=1)
