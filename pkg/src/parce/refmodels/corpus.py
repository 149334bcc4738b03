"""Synthetic labeled image corpus with OOD injection.

Images are 32x32 RGB. Each of the three classes is a solid 8x8 square of a
class-specific color at a class-specific location over a uniform-noise
background. Per-image jitter of the square position, a random square opacity,
and additive pixel noise produce honest classifier errors. OOD images add a
12x12 ring of a fourth color never seen in training and record its pixel mask.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InvalidArgumentError
from ..types import ClassSet

IMAGE_SIZE = 32
SQUARE_SIZE = 8
RING_SIZE = 12
RING_THICKNESS = 2
BACKGROUND_AMPLITUDE = 0.2
POSITION_JITTER = 2

CLASS_NAMES = ["red-square", "green-square", "blue-square"]
# Colors are kept close enough to the background that heavy additive noise
# degrades classification, giving the perturbation sweep a real accuracy trend.
CLASS_COLORS = np.array([[0.5, 0.1, 0.1], [0.1, 0.5, 0.1], [0.1, 0.15, 0.5]])
CLASS_POSITIONS = [(4, 4), (4, 20), (20, 4)]
RING_COLOR = np.array([0.9, 0.1, 0.9])
RING_POSITION = (18, 18)

# Opacity and noise ranges tuned so the reference classifier's holdout
# accuracy lands in [0.85, 0.98]. A small fraction of images get a fully
# transparent square, which produces honest, irreducible classifier errors.
SQUARE_ALPHA_RANGE = (0.05, 1.0)
SQUARE_BLANK_PROB = 0.06
PIXEL_NOISE_MAX = 0.1

DEFAULT_SIZES = (600, 200, 200, 200)


@dataclass
class CorpusItem:
    id: str
    image: np.ndarray
    label: Optional[int]
    ood: bool
    mask: Optional[np.ndarray] = None


@dataclass
class SyntheticCorpus:
    train: list
    holdout: list
    test_id: list
    test_ood: list
    seed: int
    classes: ClassSet

    def split(self, name):
        return {"train": self.train, "holdout": self.holdout,
                "test_id": self.test_id, "test_ood": self.test_ood}[name]


def _jittered(rng, base):
    r = base[0] + rng.integers(-POSITION_JITTER, POSITION_JITTER + 1)
    c = base[1] + rng.integers(-POSITION_JITTER, POSITION_JITTER + 1)
    return int(r), int(c)


def _background(rng):
    return rng.uniform(0.0, BACKGROUND_AMPLITUDE, size=(IMAGE_SIZE, IMAGE_SIZE, 3))


def _paint_square(image, rng, label):
    r, c = _jittered(rng, CLASS_POSITIONS[label])
    if rng.uniform() < SQUARE_BLANK_PROB:
        alpha = 0.0
    else:
        alpha = rng.uniform(*SQUARE_ALPHA_RANGE)
    patch = image[r : r + SQUARE_SIZE, c : c + SQUARE_SIZE]
    patch[:] = alpha * CLASS_COLORS[label] + (1.0 - alpha) * patch


def _paint_ring(image, rng):
    r, c = _jittered(rng, RING_POSITION)
    mask = np.zeros((IMAGE_SIZE, IMAGE_SIZE), dtype=bool)
    mask[r : r + RING_SIZE, c : c + RING_SIZE] = True
    inner = RING_THICKNESS
    mask[r + inner : r + RING_SIZE - inner, c + inner : c + RING_SIZE - inner] = False
    image[mask] = 0.9 * RING_COLOR + 0.1 * image[mask]
    return mask


def _finish(image, rng):
    sigma = rng.uniform(0.0, PIXEL_NOISE_MAX)
    image += rng.normal(0.0, sigma, size=image.shape)
    np.clip(image, 0.0, 1.0, out=image)
    return image


def _make_item(rng, item_id, label, ood):
    image = _background(rng)
    _paint_square(image, rng, label)
    mask = _paint_ring(image, rng) if ood else None
    image = _finish(image, rng)
    return CorpusItem(id=item_id, image=image, label=None if ood else label, ood=ood, mask=mask)


def gen_synthetic_corpus(seed, sizes=DEFAULT_SIZES):
    """Generate the four splits deterministically from the seed.

    sizes is (train, holdout, test_id, test_ood), each >= 1. OOD items carry
    no label and a non-empty anomaly mask over the injected ring.
    """
    if len(sizes) != 4 or any(int(n) < 1 for n in sizes):
        raise InvalidArgumentError(f"sizes must be four counts >= 1, got {sizes}")
    rng = np.random.default_rng(int(seed))
    classes = ClassSet(class_names=list(CLASS_NAMES))

    splits = {}
    for name, count, ood in (
        ("train", sizes[0], False),
        ("holdout", sizes[1], False),
        ("test_id", sizes[2], False),
        ("test_ood", sizes[3], True),
    ):
        items = []
        for i in range(int(count)):
            label = int(rng.integers(0, classes.class_count))
            items.append(_make_item(rng, f"{name}-{i:05d}", label, ood))
        splits[name] = items

    return SyntheticCorpus(seed=int(seed), classes=classes, **splits)
