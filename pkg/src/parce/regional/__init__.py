from .segmentation import SegmentMap, felzenszwalb_segment, segment_map_to_pgm
from .scoring import (
    CompetencyMap,
    calibrate_regional_z,
    fit_segment_loss_stats,
    regional_competency,
    segment_competency_scores,
)
from .render import render_map

__all__ = [
    "SegmentMap",
    "felzenszwalb_segment",
    "segment_map_to_pgm",
    "CompetencyMap",
    "calibrate_regional_z",
    "fit_segment_loss_stats",
    "regional_competency",
    "segment_competency_scores",
    "render_map",
]
