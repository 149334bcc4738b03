"""Competency map rendering: red (score 0) to blue (score 1) PNG."""

import io

import numpy as np
from PIL import Image

from ..errors import InvalidArgumentError


def _round_half_up(x):
    return np.floor(x + 0.5).astype(np.uint8)


def render_map(comp_map):
    """Render a CompetencyMap as deterministic PNG bytes.

    Linear two-color gradient per pixel: R = 255*(1-s), B = 255*s, G = 0, with
    round-half-up per channel.
    """
    s = np.asarray(comp_map.pixel_scores, dtype=float)
    if s.ndim != 2:
        raise InvalidArgumentError("pixel_scores must be a 2-d array")
    if not np.all(np.isfinite(s)) or s.min() < 0 or s.max() > 1:
        raise InvalidArgumentError("pixel scores must lie in [0, 1]")
    rgb = np.zeros(s.shape + (3,), dtype=np.uint8)
    rgb[:, :, 0] = _round_half_up(255.0 * (1.0 - s))
    rgb[:, :, 2] = _round_half_up(255.0 * s)
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
