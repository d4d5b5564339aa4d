"""Pixel metrics, segmentation losses and Fourier shell correlation.

Zero-denominator conventions for :func:`pixel_metrics`:

    metric     denominator         value when zero
    iou        TP + FP + FN        0.0 (both masks empty), flagged
    precision  TP + FP             0.0, flagged
    recall     TP + FN             0.0, flagged
    f1         2TP + FP + FN       0.0, flagged
    accuracy   all pixels          never zero for a non-empty mask

Losses accept soft predictions: intersections become ``sum(y * p)`` and set
sizes become sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Volume3D

CE_EPS = 1e-7
FSC_THRESHOLD = 0.143


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _binary(mask) -> np.ndarray:
    arr = np.asarray(getattr(mask, "labels", getattr(mask, "data", mask)))
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("masks must be binary")
    return arr.astype(bool)


def confusion(pred, gt) -> ConfusionCounts:
    p, g = _binary(pred), _binary(gt)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    return ConfusionCounts(tp, fp, fn, p.size - tp - fp - fn)


@dataclass(frozen=True)
class PixelMetrics:
    iou: float
    precision: float
    recall: float
    accuracy: float
    f1: float
    flags: frozenset = field(default_factory=frozenset)


def _ratio(num, den, name, flags):
    if den == 0:
        flags.add(name)
        return 0.0
    return num / den


def pixel_metrics(c: ConfusionCounts) -> PixelMetrics:
    flags: set[str] = set()
    iou = _ratio(c.tp, c.tp + c.fp + c.fn, "iou", flags)
    precision = _ratio(c.tp, c.tp + c.fp, "precision", flags)
    recall = _ratio(c.tp, c.tp + c.fn, "recall", flags)
    f1 = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, "f1", flags)
    accuracy = _ratio(c.tp + c.tn, c.total, "accuracy", flags)
    return PixelMetrics(iou, precision, recall, accuracy, f1, frozenset(flags))


def _soft_pair(pred, gt):
    p = np.asarray(getattr(pred, "data", pred), dtype=np.float64)
    g = _binary(gt).astype(np.float64)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    if p.size and (p.min() < 0 or p.max() > 1):
        raise ValueError("predictions must lie in [0, 1]")
    return p.ravel(), g.ravel()


def soft_jaccard(pred, gt) -> float:
    p, g = _soft_pair(pred, gt)
    inter = (p * g).sum()
    union = p.sum() + g.sum() - inter
    return 1.0 if union == 0 else float(inter / union)


def soft_dice(pred, gt) -> float:
    p, g = _soft_pair(pred, gt)
    den = p.sum() + g.sum()
    return 1.0 if den == 0 else float(2 * (p * g).sum() / den)


def tversky_index(pred, gt, alpha=0.5, beta=0.5) -> float:
    """``|Y n P| / (|Y n P| + alpha |P \\ Y| + beta |Y \\ P|)``."""
    p, g = _soft_pair(pred, gt)
    inter = (p * g).sum()
    fp = (p * (1 - g)).sum()
    fn = ((1 - p) * g).sum()
    den = inter + alpha * fp + beta * fn
    return 1.0 if den == 0 else float(inter / den)


def loss(kind: str, pred, gt, alpha=0.5, beta=0.5) -> float:
    """Segmentation loss; ``kind`` is dice, jaccard, tversky, lovasz or cross_entropy.

    ``lovasz`` is the per-pixel surrogate ``sum(1 - p * y)`` and
    ``cross_entropy`` is summed over pixels with probabilities clamped to
    [1e-7, 1 - 1e-7].
    """
    if kind == "dice":
        return 1.0 - soft_dice(pred, gt)
    if kind == "jaccard":
        return 1.0 - soft_jaccard(pred, gt)
    if kind == "tversky":
        return 1.0 - tversky_index(pred, gt, alpha, beta)
    p, g = _soft_pair(pred, gt)
    if kind == "lovasz":
        return float((1.0 - p * g).sum())
    if kind == "cross_entropy":
        q = np.clip(p, CE_EPS, 1 - CE_EPS)
        return float(-(g * np.log(q)).sum() - ((1 - g) * np.log1p(-q)).sum())
    raise ValueError(f"unknown loss {kind!r}")


@dataclass(frozen=True)
class FscCurve:
    """Correlation per integer Fourier shell (DC excluded); frequencies in 1/Å."""

    frequency: np.ndarray
    correlation: np.ndarray
    pixel_size: float
    shells: np.ndarray
    flagged: np.ndarray

    @property
    def nyquist(self) -> float:
        return 1.0 / (2.0 * self.pixel_size)


def shell_index(n: int) -> np.ndarray:
    """Rounded radius of each voxel of an n^3 FFT grid, in Fourier pixels."""
    f = np.fft.fftfreq(n) * n
    kz, ky, kx = np.meshgrid(f, f, f, indexing="ij")
    return np.rint(np.sqrt(kz ** 2 + ky ** 2 + kx ** 2)).astype(np.int64)


def fsc(a: Volume3D, b: Volume3D, mask=None) -> FscCurve:
    """Fourier shell correlation for shells 1 .. n // 2.

    An optional ``mask`` volume multiplies both maps before the transform.
    Shells with zero energy in either map report 0 and are flagged.
    """
    da, db = np.asarray(a.data, np.float64), np.asarray(b.data, np.float64)
    if da.shape != db.shape:
        raise ValueError(f"volume shapes differ: {da.shape} vs {db.shape}")
    if abs(a.pixel_size - b.pixel_size) > 1e-9 * a.pixel_size:
        raise ValueError("volumes have different pixel sizes")
    if mask is not None:
        m = np.asarray(getattr(mask, "data", mask), np.float64)
        if m.shape != da.shape:
            raise ValueError("mask shape does not match the volumes")
        da, db = da * m, db * m
    n = da.shape[0]
    fa, fb = np.fft.fftn(da), np.fft.fftn(db)
    shells = shell_index(n).ravel()
    nmax = n // 2
    num = np.bincount(shells, (fa * np.conj(fb)).real.ravel(), minlength=nmax + 1)
    pa = np.bincount(shells, (np.abs(fa) ** 2).ravel(), minlength=nmax + 1)
    pb = np.bincount(shells, (np.abs(fb) ** 2).ravel(), minlength=nmax + 1)
    ks = np.arange(1, nmax + 1)
    den = np.sqrt(pa[ks] * pb[ks])
    flagged = den <= 0
    corr = np.where(flagged, 0.0, num[ks] / np.where(flagged, 1.0, den))
    freq = ks / (n * a.pixel_size)
    return FscCurve(freq, np.clip(corr, -1.0, 1.0), a.pixel_size, ks, flagged)


@dataclass(frozen=True)
class Resolution:
    angstrom: float
    frequency: float
    at_nyquist: bool


def resolution_at(curve: FscCurve, threshold: float = FSC_THRESHOLD) -> Resolution:
    """First downward crossing of ``threshold``, linearly interpolated.

    A curve that starts below the threshold crosses at its first shell.  A
    curve that never drops below it reports the Nyquist resolution, flagged.
    """
    f = np.asarray(curve.frequency, np.float64)
    c = np.asarray(curve.correlation, np.float64)
    if f.size == 0:
        raise ValueError("empty FSC curve")
    below = np.nonzero(c < threshold)[0]
    if below.size == 0:
        nyq = curve.nyquist
        return Resolution(1.0 / nyq, nyq, True)
    i = int(below[0])
    if i == 0:
        return Resolution(float(1.0 / f[0]), float(f[0]), False)
    f0, f1, c0, c1 = f[i - 1], f[i], c[i - 1], c[i]
    cross = f0 + (f1 - f0) * (c0 - threshold) / (c0 - c1)
    return Resolution(float(1.0 / cross), float(cross), False)


def phase_randomize(v: Volume3D, beyond: float, rng: np.random.Generator | int | None = 0) -> Volume3D:
    """Replace Fourier phases above ``beyond`` (1/Å) with random ones, keeping amplitudes.

    Random phases are taken from the transform of real white noise, which
    keeps Hermitian symmetry so the result is real.  ``beyond`` at or past
    Nyquist returns the input unchanged.
    """
    if beyond >= 1.0 / (2.0 * v.pixel_size):
        return v
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    data = np.asarray(v.data, np.float64)
    n = data.shape[0]
    ft = np.fft.fftn(data)
    select = shell_index(n) > beyond * n * v.pixel_size
    noise = np.fft.fftn(rng.standard_normal(data.shape))
    mag = np.abs(noise)
    phase = np.where(mag > 0, noise / np.where(mag > 0, mag, 1.0), 1.0)
    ft = np.where(select, np.abs(ft) * phase, ft)
    return Volume3D(np.fft.ifftn(ft).real, v.pixel_size)
