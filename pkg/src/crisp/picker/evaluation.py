"""Box-based evaluation of picked centers.

Centers become boxes ``(x - w/2, y - h/2, x + w/2, y + h/2)`` without
clipping.  At each IoU threshold predictions are matched greedily in
descending score order, each ground-truth box at most once.  Unmatched
predictions count as false positives.  AP is the area under the precision
envelope ``P(r) = max_{r' >= r} P(r')`` of the ranked predictions; mAP
averages AP over the thresholds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import PickSet

DEFAULT_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


def centers_to_boxes(picks: PickSet) -> list[BoundingBox]:
    w, h = picks.box_width, picks.box_height
    if not (w > 0 and h > 0):
        raise ValueError("box width and height must be positive")
    return [BoundingBox(c.x - w / 2, c.y - h / 2, c.x + w / 2, c.y + h / 2) for c in picks]


def iou_box(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area() + b.area() - inter)


def _box_array(picks: PickSet) -> np.ndarray:
    xy = picks.xy()
    half = np.array([picks.box_width, picks.box_height]) / 2.0
    return np.hstack([xy - half, xy + half])


def iou_matrix(pred: PickSet, gt: PickSet) -> np.ndarray:
    """IoU of every prediction (rows) against every ground-truth box (columns)."""
    p, g = _box_array(pred), _box_array(gt)
    iw = np.minimum(p[:, None, 2], g[None, :, 2]) - np.maximum(p[:, None, 0], g[None, :, 0])
    ih = np.minimum(p[:, None, 3], g[None, :, 3]) - np.maximum(p[:, None, 1], g[None, :, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    area_p = (p[:, 2] - p[:, 0]) * (p[:, 3] - p[:, 1])
    area_g = (g[:, 2] - g[:, 0]) * (g[:, 3] - g[:, 1])
    union = area_p[:, None] + area_g[None, :] - inter
    return np.where(inter > 0, inter / np.where(union > 0, union, 1.0), 0.0)


def match_predictions(ious: np.ndarray, scores: np.ndarray, threshold: float) -> np.ndarray:
    """True-positive flag per prediction, in descending score order.

    Each prediction takes the still-unmatched ground-truth box of highest IoU
    and counts as a hit when that IoU reaches ``threshold``.
    """
    order = np.argsort(-scores, kind="stable")
    taken = np.zeros(ious.shape[1], dtype=bool)
    hits = np.zeros(len(order), dtype=bool)
    for rank, i in enumerate(order):
        if not ious.shape[1]:
            break
        cand = np.where(taken, -1.0, ious[i])
        j = int(np.argmax(cand))
        if cand[j] >= threshold and cand[j] > 0:
            taken[j] = True
            hits[rank] = True
    return hits


def average_precision(hits: np.ndarray, n_gt: int) -> float:
    """Area under the monotone precision envelope of a ranked hit list."""
    if n_gt <= 0:
        raise ValueError("average precision needs at least one ground-truth box")
    if hits.size == 0:
        return 0.0
    tp = np.cumsum(hits)
    recall = tp / n_gt
    precision = tp / np.arange(1, hits.size + 1)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.diff(np.concatenate([[0.0], recall]))
    return float((steps * envelope).sum())


@dataclass(frozen=True)
class MapResult:
    """mAP, AP per threshold, and precision / recall / F1 at IoU 0.5."""

    mAP: float
    ap: dict = field(default_factory=dict)
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    n_gt: int = 0
    n_pred: int = 0


def evaluate_map(gt: PickSet, pred: PickSet, thresholds=DEFAULT_THRESHOLDS) -> MapResult:
    if len(gt) == 0:
        raise ValueError("evaluation needs a non-empty ground truth")
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds:
        raise ValueError("need at least one IoU threshold")
    n, m = len(gt), len(pred)
    if m == 0:
        return MapResult(0.0, {t: 0.0 for t in thresholds}, 0.0, 0.0, 0.0, n, 0)
    ious = iou_matrix(pred, gt)
    scores = pred.scores()
    ap = {}
    for t in thresholds:
        ap[t] = average_precision(match_predictions(ious, scores, t), n)
    tp = int(match_predictions(ious, scores, 0.5).sum())
    precision, recall = tp / m, tp / n
    f1 = 2 * tp / (m + n)
    return MapResult(float(np.mean(list(ap.values()))), ap, precision, recall, f1, n, m)


def evaluate_many(gts, preds, thresholds=DEFAULT_THRESHOLDS) -> MapResult:
    """Average of per-micrograph results; counts are summed."""
    results = [evaluate_map(g, p, thresholds) for g, p in zip(gts, preds, strict=True)]
    if not results:
        raise ValueError("need at least one micrograph")
    keys = results[0].ap.keys()
    return MapResult(
        float(np.mean([r.mAP for r in results])),
        {t: float(np.mean([r.ap[t] for r in results])) for t in keys},
        float(np.mean([r.precision for r in results])),
        float(np.mean([r.recall for r in results])),
        float(np.mean([r.f1 for r in results])),
        sum(r.n_gt for r in results),
        sum(r.n_pred for r in results),
    )
