"""Center finding on segmentation maps.

Three pickers share the signature ``(map, size, e, s) -> PickSet``:

* morphology: erosion, contours and minimal enclosing circles,
* crocker_grier: local maxima refined by intensity-weighted centroids, with
  the lighter of two close blobs dropped,
* nms: Gaussian window scores, one candidate per grid cell, hill climbing and
  a distance filter.

Coordinates are pixel indices (x = column, y = row) of the input map.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage

from .. import _kernels
from ..core import Center, PickSet

log = logging.getLogger(__name__)

MAX_CONTOUR_AREA = 500_000
CIRCLE_RADIUS_RANGE = (0.5, 2.0)
NMS_MIN_SCORE = 0.25

DEFAULT_GRIDS = {
    "morphology": ((2, 4, 6), (0.6, 1.0, 1.4)),
    "crocker_grier": ((0.15, 0.25, 0.35), (0.4, 0.7, 1.0)),
    "nms": ((0.4, 0.5, 0.6), (0.4, 0.7, 1.0)),
}
ALGORITHMS = tuple(DEFAULT_GRIDS)


def _as_array(prob_map) -> np.ndarray:
    return np.asarray(getattr(prob_map, "data", prob_map), dtype=np.float64)


def _normalize(data: np.ndarray) -> np.ndarray | None:
    lo, hi = float(data.min()), float(data.max())
    if not hi > lo:
        return None
    return (data - lo) / (hi - lo)


def _inside(x, y, shape) -> bool:
    h, w = shape
    return 0 <= x <= w - 1 and 0 <= y <= h - 1


def pick_morphology(prob_map, radius: float, e: float = 4, s: float = 1.0) -> PickSet:
    """Erode twice, then keep contours whose area and enclosing circle look like particles.

    Contours must satisfy ``radius**s <= area <= 500000`` and their minimal
    enclosing circle radius must lie within [0.5, 2] times ``radius``.  The
    score is the mean normalized map value inside the contour.
    """
    if radius < 2:
        raise ValueError("morphology picking needs radius >= 2")
    box = 2.0 * radius
    data = _as_array(prob_map)
    norm = _normalize(data)
    if norm is None:
        return PickSet((), box, box)
    k1 = max(int(radius // 4), 1)
    k2 = max(int(radius // e), 1)
    img = cv2.erode(norm.astype(np.float32), np.ones((k1, k1), np.uint8))
    img = cv2.erode(img, np.ones((k2, k2), np.uint8))
    binary = (img > 0.5).astype(np.uint8)
    # an even kernel's anchor sits right of its middle, shifting the blob by +0.5 px
    shift = 0.5 * ((k1 % 2 == 0) + (k2 % 2 == 0))
    contours, _ = cv2.findContours(binary, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
    lo_r, hi_r = CIRCLE_RADIUS_RANGE[0] * radius, CIRCLE_RADIUS_RANGE[1] * radius
    min_area = radius ** s
    centers = []
    for cnt in contours:
        area = cv2.contourArea(cnt)
        if not min_area <= area <= MAX_CONTOUR_AREA:
            continue
        (cx, cy), r = cv2.minEnclosingCircle(cnt)
        cx, cy = cx - shift, cy - shift
        if not lo_r <= r <= hi_r or not _inside(cx, cy, data.shape):
            continue
        fill = np.zeros(binary.shape, np.uint8)
        cv2.drawContours(fill, [cnt], -1, 1, thickness=-1)
        score = float(norm[fill > 0].mean())
        centers.append(Center(float(cx), float(cy), score))
    centers.sort(key=lambda c: (c.y, c.x))
    return PickSet(tuple(centers), box, box)


def weighted_centroid(values, xs, ys=None):
    """Intensity-weighted mean position, ``sum(x * I) / sum(I)``."""
    v = np.asarray(values, dtype=np.float64)
    total = v.sum()
    if not total > 0:
        raise ValueError("centroid needs a positive total intensity")
    cx = float((np.asarray(xs, dtype=np.float64) * v).sum() / total)
    if ys is None:
        return cx
    return cx, float((np.asarray(ys, dtype=np.float64) * v).sum() / total)


def suppress_by_mass(points, masses, min_distance: float) -> list[int]:
    """Indices of points kept after dropping the lighter of every pair closer than ``min_distance``.

    Heavier points are visited first; ties keep the earlier index.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    order = np.argsort(-np.asarray(masses, dtype=np.float64), kind="stable")
    kept: list[int] = []
    for i in order:
        if all(np.hypot(*(pts[i] - pts[j])) >= min_distance for j in kept):
            kept.append(int(i))
    return kept


def _resize(data: np.ndarray, factor: float) -> tuple[np.ndarray, float, float]:
    h, w = data.shape
    nh, nw = max(int(round(h * factor)), 1), max(int(round(w * factor)), 1)
    small = cv2.resize(data.astype(np.float32), (nw, nh), interpolation=cv2.INTER_LINEAR)
    return small.astype(np.float64), nw / w, nh / h


def pick_crocker_grier(prob_map, diameter: float, e: float = 0.25, s: float = 0.7) -> PickSet:
    """Local maxima of the resized map, refined by weighted centroids.

    The map is resized by ``e`` and lightly smoothed to find peaks above mean
    + 1 sd; each peak's centroid and mass are taken over a disk of the scaled
    diameter on the unsmoothed resized map.  Of any two centers closer than
    ``diameter * s`` (original pixels) the lighter is dropped.
    """
    if diameter < 3:
        raise ValueError("Crocker-Grier picking needs diameter >= 3")
    data = _as_array(prob_map)
    if _normalize(data) is None:
        return PickSet((), diameter, diameter)
    small, fx, fy = _resize(data, e)
    d = max(diameter * e, 1.0)
    smooth = ndimage.gaussian_filter(small, max(d / 4.0, 0.5), mode="constant")
    win = max(int(d) // 2 * 2 + 1, 3)
    peaks = (smooth == ndimage.maximum_filter(smooth, size=win, mode="constant"))
    peaks &= smooth > smooth.mean() + smooth.std()
    py, px = np.nonzero(peaks)
    r = d / 2.0
    rad = int(np.ceil(r))
    oy, ox = np.mgrid[-rad:rad + 1, -rad:rad + 1]
    disk = oy ** 2 + ox ** 2 <= r ** 2
    h, w = small.shape
    pts, masses = [], []
    for y, x in zip(py, px):
        yy, xx = y + oy[disk], x + ox[disk]
        ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        vals = small[yy[ok], xx[ok]]
        mass = float(vals.sum())
        if not mass > 0:
            continue
        cx, cy = weighted_centroid(vals, xx[ok], yy[ok])
        # back to original pixel indices through the resize's pixel-center mapping
        ox_, oy_ = (cx + 0.5) / fx - 0.5, (cy + 0.5) / fy - 0.5
        if _inside(ox_, oy_, data.shape):
            pts.append((ox_, oy_))
            masses.append(mass)
    keep = suppress_by_mass(pts, masses, diameter * s) if pts else []
    centers = [Center(pts[i][0], pts[i][1], masses[i]) for i in keep]
    return PickSet(tuple(centers), diameter, diameter)


def gaussian_window(size: int, sigma: float | None = None) -> np.ndarray:
    """Peak-one Gaussian of ``size`` x ``size`` taps, sigma defaulting to size / 4."""
    size = max(int(size), 1)
    sigma = size / 4.0 if sigma is None else sigma
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-0.5 * (ax / sigma) ** 2)
    return np.outer(g, g)


def nms_scores(data: np.ndarray, diameter: float) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-weighted window sums ``sum_ij W(i, j) P(x + i, y + j)`` and the window."""
    win = gaussian_window(int(round(diameter)) // 2 * 2 + 1)
    return ndimage.correlate(data, win, mode="constant", cval=0.0), win


def pick_nms(prob_map, diameter: float, e: float = 0.5, s: float = 0.7) -> PickSet:
    """Grid-cell maxima of the window score, hill-climbed and distance filtered.

    Cells of side ``floor(diameter * e)`` each propose their best pixel when
    its score reaches a quarter of the full window sum.  Candidates climb to
    the local maximum of a cell-sized neighborhood.  Of any two whose
    centers are closer than ``diameter * s`` (so their overlap along the
    center line exceeds ``diameter * (1 - s)``) the lower-scoring is dropped.
    """
    if diameter < 3:
        raise ValueError("NMS picking needs diameter >= 3")
    data = _as_array(prob_map)
    if _normalize(data) is None or not data.max() > 0:
        return PickSet((), diameter, diameter)
    score, win = nms_scores(data, diameter)
    floor = NMS_MIN_SCORE * float(win.sum()) * float(data.max())
    cell = max(int(diameter * e), 1)
    h, w = score.shape
    ys, xs = [], []
    for y0 in range(0, h, cell):
        for x0 in range(0, w, cell):
            block = score[y0:y0 + cell, x0:x0 + cell]
            k = int(np.argmax(block))
            by, bx = divmod(k, block.shape[1])
            if block[by, bx] >= floor:
                ys.append(y0 + by)
                xs.append(x0 + bx)
    if not ys:
        return PickSet((), diameter, diameter)
    ys, xs = _kernels.hill_climb(score, np.array(ys), np.array(xs), max(cell // 2, 1))
    uniq = sorted(set(zip(ys.tolist(), xs.tolist())))
    pts = [(x, y) for y, x in uniq]
    vals = [float(score[y, x]) for y, x in uniq]
    keep = suppress_by_mass(pts, vals, diameter * s)
    centers = [Center(float(pts[i][0]), float(pts[i][1]), vals[i]) for i in keep]
    return PickSet(tuple(centers), diameter, diameter)


@dataclass(frozen=True)
class PickerConfig:
    """One picker setting; ``diameter`` is the expected particle diameter in pixels."""

    algorithm: str
    diameter: float
    e: float
    s: float

    def __post_init__(self):
        if self.algorithm not in DEFAULT_GRIDS:
            raise ValueError(f"unknown picker {self.algorithm!r}; choose from {ALGORITHMS}")
        es, ss = DEFAULT_GRIDS[self.algorithm]
        if self.e not in es or self.s not in ss:
            log.warning("%s: (e=%g, s=%g) lies outside the default grid", self.algorithm,
                        self.e, self.s)

    def run(self, prob_map) -> PickSet:
        return pick(self.algorithm, prob_map, self.diameter, self.e, self.s)


def pick(algorithm: str, prob_map, diameter: float, e: float, s: float) -> PickSet:
    """Dispatch by name.  Morphology receives ``diameter / 2`` as its radius."""
    if algorithm == "morphology":
        return pick_morphology(prob_map, diameter / 2.0, e, s)
    if algorithm == "crocker_grier":
        return pick_crocker_grier(prob_map, diameter, e, s)
    if algorithm == "nms":
        return pick_nms(prob_map, diameter, e, s)
    raise ValueError(f"unknown picker {algorithm!r}; choose from {ALGORITHMS}")
