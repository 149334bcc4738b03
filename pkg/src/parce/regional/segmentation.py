"""Graph-based image segmentation (Felzenszwalb-Huttenlocher) with union-find.

Pixels are scaled to [0, 255] and optionally Gaussian-smoothed per channel.
The 8-connected grid graph's edges, weighted by Euclidean RGB distance, are
processed in ascending (weight, construction index) order; two components merge
when the edge weight is within both components' internal difference plus the
k/|C| threshold. A second pass merges components smaller than min_size into
their nearest-by-edge neighbor. Labels are renumbered in raster order.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from ..errors import InvalidArgumentError
from ..validation import check_image

DEFAULT_K = 300.0
DEFAULT_MIN_SIZE = 20
DEFAULT_SMOOTH_SIGMA = 0.8


@dataclass
class SegmentMap:
    labels: np.ndarray  # (H, W) int, contiguous ids from 0
    segment_count: int

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    def mask(self, segment_id):
        return self.labels == segment_id


def _grid_edges(h, w):
    """Edge endpoints (flat indices) for the 8-connected grid, in construction order."""
    idx = np.arange(h * w).reshape(h, w)
    pairs = []
    # right, down, down-right, down-left
    pairs.append((idx[:, :-1].ravel(), idx[:, 1:].ravel()))
    pairs.append((idx[:-1, :].ravel(), idx[1:, :].ravel()))
    pairs.append((idx[:-1, :-1].ravel(), idx[1:, 1:].ravel()))
    pairs.append((idx[:-1, 1:].ravel(), idx[1:, :-1].ravel()))
    a = np.concatenate([p[0] for p in pairs])
    b = np.concatenate([p[1] for p in pairs])
    return a, b


def felzenszwalb_segment(image, k=DEFAULT_K, min_size=DEFAULT_MIN_SIZE,
                         smooth_sigma=DEFAULT_SMOOTH_SIGMA):
    """Segment an image; returns a SegmentMap whose segments all have >= min_size pixels."""
    image = check_image(image)
    if k <= 0:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    if min_size < 1:
        raise InvalidArgumentError(f"min_size must be >= 1, got {min_size}")
    if smooth_sigma < 0:
        raise InvalidArgumentError(f"smooth_sigma must be >= 0, got {smooth_sigma}")

    h, w, _ = image.shape
    pix = image * 255.0
    if smooth_sigma > 0:
        pix = np.stack(
            [gaussian_filter(pix[:, :, c], smooth_sigma, mode="nearest") for c in range(3)],
            axis=-1,
        )
    flat = pix.reshape(-1, 3)

    a, b = _grid_edges(h, w)
    weights = np.sqrt(((flat[a] - flat[b]) ** 2).sum(axis=1))
    order = np.argsort(weights, kind="stable")  # stable: ties keep construction order

    n = h * w
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    threshold = np.full(n, float(k))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    a_sorted = a[order]
    b_sorted = b[order]
    w_sorted = weights[order]
    for i in range(order.size):
        ra = find(a_sorted[i])
        rb = find(b_sorted[i])
        if ra == rb:
            continue
        wt = w_sorted[i]
        if wt <= threshold[ra] and wt <= threshold[rb]:
            parent[rb] = ra
            size[ra] += size[rb]
            threshold[ra] = wt + k / size[ra]

    # post-merge: absorb small components along their cheapest edges
    for i in range(order.size):
        ra = find(a_sorted[i])
        rb = find(b_sorted[i])
        if ra != rb and (size[ra] < min_size or size[rb] < min_size):
            parent[rb] = ra
            size[ra] += size[rb]

    roots = np.fromiter((find(i) for i in range(n)), dtype=np.int64, count=n)
    _, labels = np.unique(roots, return_inverse=True)
    # renumber in raster order of first occurrence
    first = {}
    remap = np.empty(labels.max() + 1, dtype=np.int64)
    next_id = 0
    for lab in labels:
        if lab not in first:
            first[lab] = next_id
            remap[lab] = next_id
            next_id += 1
    labels = remap[labels].reshape(h, w)
    return SegmentMap(labels=labels, segment_count=next_id)


def segment_map_to_pgm(segmap):
    """Serialize a SegmentMap as a 16-bit binary PGM (labels as pixel values)."""
    if segmap.segment_count > 65536:
        raise InvalidArgumentError("too many segments for 16-bit PGM")
    header = f"P5\n{segmap.width} {segmap.height}\n65535\n".encode("ascii")
    body = segmap.labels.astype(">u2").tobytes()
    return header + body
