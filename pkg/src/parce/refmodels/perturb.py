"""Image perturbations: 21 evenly spaced levels per property, clamped to [0, 1]."""

import numpy as np

from ..errors import InvalidArgumentError
from ..validation import check_image

PERTURBATION_PROPERTIES = ("saturation", "contrast", "brightness", "pixelation", "noise")
N_LEVELS = 21

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


def _pixelate(image, block):
    h, w, _ = image.shape
    out = np.empty_like(image)
    for r0 in range(0, h, block):
        for c0 in range(0, w, block):
            patch = image[r0 : r0 + block, c0 : c0 + block]
            out[r0 : r0 + block, c0 : c0 + block] = patch.mean(axis=(0, 1))
    return out


def perturb_image(image, prop, level_index, seed=0):
    """Apply one of the five perturbation properties at one of its 21 levels.

    Level grids: saturation factor [0, 2]; contrast factor [0, 2] about mid-gray
    0.5; brightness offset [-0.5, +0.5]; pixelation block size 1..21; additive
    Gaussian noise sigma [0, 0.5] drawn from the seed.
    """
    image = check_image(image)
    level_index = int(level_index)
    if not 0 <= level_index < N_LEVELS:
        raise InvalidArgumentError(f"level_index must be in [0, {N_LEVELS - 1}], got {level_index}")
    t = level_index / (N_LEVELS - 1)

    if prop == "saturation":
        factor = 2.0 * t
        luma = image @ _LUMA
        out = luma[..., None] + factor * (image - luma[..., None])
    elif prop == "contrast":
        factor = 2.0 * t
        out = 0.5 + factor * (image - 0.5)
    elif prop == "brightness":
        out = image + (t - 0.5)
    elif prop == "pixelation":
        out = _pixelate(image, level_index + 1)
    elif prop == "noise":
        sigma = 0.5 * t
        rng = np.random.default_rng(int(seed))
        out = image + (rng.normal(0.0, sigma, size=image.shape) if sigma > 0 else 0.0)
    else:
        raise InvalidArgumentError(f"unknown perturbation property {prop!r}")

    return np.clip(out, 0.0, 1.0)
