"""Particle center finding, box-based mAP evaluation and picker tuning."""
from .algorithms import (ALGORITHMS, DEFAULT_GRIDS, PickerConfig, pick, pick_crocker_grier,
                         pick_morphology, pick_nms, suppress_by_mass, weighted_centroid)
from .evaluation import (DEFAULT_THRESHOLDS, BoundingBox, MapResult, average_precision,
                         centers_to_boxes, evaluate_many, evaluate_map, iou_box, iou_matrix,
                         match_predictions)
from .optimize import NoPicksError, TuneResult, grid_points, optimize_picker

__all__ = [
    "ALGORITHMS", "DEFAULT_GRIDS", "DEFAULT_THRESHOLDS", "BoundingBox", "MapResult",
    "NoPicksError", "PickerConfig", "TuneResult", "average_precision", "centers_to_boxes",
    "evaluate_many", "evaluate_map", "grid_points", "iou_box", "iou_matrix",
    "match_predictions", "optimize_picker", "pick", "pick_crocker_grier", "pick_morphology",
    "pick_nms", "suppress_by_mass", "weighted_centroid",
]
