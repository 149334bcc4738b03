"""Graph-based segmentation: invariants, a hand-derived case, and PGM output."""

import numpy as np
import pytest

from parce.errors import InvalidArgumentError
from parce.regional.segmentation import SegmentMap, felzenszwalb_segment, segment_map_to_pgm


class TestInvariants:
    def test_constant_image_single_segment(self):
        image = np.full((16, 16, 3), 0.4)
        seg = felzenszwalb_segment(image)
        assert seg.segment_count == 1
        np.testing.assert_array_equal(seg.labels, 0)

    def test_labels_partition_contiguously(self, small_corpus):
        for it in small_corpus.holdout[:5]:
            seg = felzenszwalb_segment(it.image)
            labels = np.unique(seg.labels)
            np.testing.assert_array_equal(labels, np.arange(seg.segment_count))
            assert seg.labels.shape == it.image.shape[:2]

    def test_min_size_respected(self, small_corpus):
        for min_size in (1, 20, 50):
            seg = felzenszwalb_segment(small_corpus.holdout[0].image, min_size=min_size)
            for s in range(seg.segment_count):
                assert seg.mask(s).sum() >= min_size

    def test_deterministic(self, small_corpus):
        image = small_corpus.holdout[2].image
        a = felzenszwalb_segment(image)
        b = felzenszwalb_segment(image)
        assert a.segment_count == b.segment_count
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_raster_order_label_numbering(self, small_corpus):
        seg = felzenszwalb_segment(small_corpus.holdout[3].image)
        seen = []
        for lab in seg.labels.ravel():
            if lab not in seen:
                seen.append(int(lab))
        assert seen == list(range(seg.segment_count))

    def test_huge_k_merges_everything(self, small_corpus):
        seg = felzenszwalb_segment(small_corpus.holdout[0].image, k=1e9)
        assert seg.segment_count == 1

    def test_min_size_covering_image_forces_one_segment(self, small_corpus):
        seg = felzenszwalb_segment(small_corpus.holdout[0].image, k=1.0, min_size=32 * 32)
        assert seg.segment_count == 1

    def test_invalid_arguments(self):
        image = np.zeros((4, 4, 3))
        with pytest.raises(InvalidArgumentError):
            felzenszwalb_segment(image, k=0)
        with pytest.raises(InvalidArgumentError):
            felzenszwalb_segment(image, min_size=0)
        with pytest.raises(InvalidArgumentError):
            felzenszwalb_segment(image, smooth_sigma=-1)
        with pytest.raises(InvalidArgumentError):
            felzenszwalb_segment(np.zeros((4, 4)))


class TestHandDerivedCase:
    def test_half_black_half_white_four_by_four(self):
        """4x4 image, left half black, right half white, k=10, min_size=1, no smoothing.

        Derivation: all zero-weight edges lie strictly inside each half, so the
        two halves each merge into one component (every within-half merge sees
        weight 0 <= threshold). Every cross-boundary edge has RGB distance
        255*sqrt(3) ~ 441.7. When it is considered, both components already
        have internal thresholds 0 + 10/8 = 1.25 (k/|C| with |C|=8), so
        441.7 > 1.25 blocks the merge: exactly two segments, split by column.
        """
        image = np.zeros((4, 4, 3))
        image[:, 2:, :] = 1.0
        seg = felzenszwalb_segment(image, k=10.0, min_size=1, smooth_sigma=0.0)
        assert seg.segment_count == 2
        expected = np.zeros((4, 4), dtype=int)
        expected[:, 2:] = 1
        np.testing.assert_array_equal(seg.labels, expected)

    def test_same_image_large_k_merges(self):
        # with k large enough the cross edge passes the threshold test
        image = np.zeros((4, 4, 3))
        image[:, 2:, :] = 1.0
        seg = felzenszwalb_segment(image, k=1e6, min_size=1, smooth_sigma=0.0)
        assert seg.segment_count == 1

    def test_min_size_absorbs_small_segment(self):
        # same two-segment image, but min_size=9 forces the 8-pixel halves to merge
        image = np.zeros((4, 4, 3))
        image[:, 2:, :] = 1.0
        seg = felzenszwalb_segment(image, k=10.0, min_size=9, smooth_sigma=0.0)
        assert seg.segment_count == 1


class TestPgm:
    def test_header_and_payload(self):
        labels = np.array([[0, 1], [2, 3]], dtype=np.int64)
        data = segment_map_to_pgm(SegmentMap(labels=labels, segment_count=4))
        assert data.startswith(b"P5\n2 2\n65535\n")
        payload = data[len(b"P5\n2 2\n65535\n"):]
        assert payload == b"\x00\x00\x00\x01\x00\x02\x00\x03"

    def test_round_trip_values(self):
        labels = np.arange(12).reshape(3, 4)
        data = segment_map_to_pgm(SegmentMap(labels=labels, segment_count=12))
        header_end = data.index(b"65535\n") + len(b"65535\n")
        decoded = np.frombuffer(data[header_end:], dtype=">u2").reshape(3, 4)
        np.testing.assert_array_equal(decoded, labels)

    def test_too_many_segments_rejected(self):
        labels = np.zeros((1, 1), dtype=np.int64)
        with pytest.raises(InvalidArgumentError):
            segment_map_to_pgm(SegmentMap(labels=labels, segment_count=70000))
