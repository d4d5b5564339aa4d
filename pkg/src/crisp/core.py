"""Domain types shared by every stage of the pipeline.

Rasters are row-major numpy arrays indexed ``[y, x]`` with the origin at the
top-left corner and y increasing downward.  Instances are frozen and their
arrays are marked read-only, so they can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class CrispError(Exception):
    """Base class for errors raised by the library."""


class NumericalError(CrispError):
    """Raised when an input makes a computation ill-defined."""


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Image2D:
    """Single-channel float32 raster with a pixel size in Å/pixel."""

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data, np.float32)
        if data.ndim != 2 or data.size == 0:
            raise ValueError(f"Image2D needs a non-empty 2D array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Image2D data must be finite")
        if not self.pixel_size > 0:
            raise ValueError("pixel_size must be strictly positive")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", float(self.pixel_size))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class ProbabilityMap(Image2D):
    """Per-pixel foreground probability; every value lies in [0, 1]."""

    def __post_init__(self):
        super().__post_init__()
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError(
                f"probability values must lie in [0, 1], got range "
                f"[{self.data.min()}, {self.data.max()}]"
            )


@dataclass(frozen=True)
class LabelMask:
    """Integer class labels in ``{0, ..., k-1}``."""

    labels: np.ndarray
    k: int = 2

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("a label mask needs k >= 2 classes")
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError(f"LabelMask needs a 2D array, got shape {labels.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k - 1}]")
        object.__setattr__(self, "labels", _frozen(labels, np.uint8 if self.k <= 256 else np.int32))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


@dataclass(frozen=True)
class Volume3D:
    """Cubic float32 density grid indexed ``[z, y, x]``."""

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data, np.float32)
        if data.ndim != 3 or len(set(data.shape)) != 1:
            raise ValueError(f"Volume3D must be cubic, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Volume3D data must be finite")
        if not self.pixel_size > 0:
            raise ValueError("pixel_size must be strictly positive")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", float(self.pixel_size))

    @property
    def side(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class Center:
    """A particle center in pixel coordinates with a non-negative score."""

    x: float
    y: float
    score: float = 1.0

    def __post_init__(self):
        if self.score < 0:
            raise ValueError("center scores must be non-negative")


@dataclass(frozen=True)
class PickSet:
    """Particle centers plus the box size used to rasterize them."""

    centers: tuple[Center, ...] = field(default_factory=tuple)
    box_width: float = 1.0
    box_height: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))

    def __len__(self) -> int:
        return len(self.centers)

    def __iter__(self):
        return iter(self.centers)

    def xy(self) -> np.ndarray:
        """Centers as an (n, 2) array of (x, y)."""
        return np.array([(c.x, c.y) for c in self.centers], dtype=np.float64).reshape(-1, 2)

    def scores(self) -> np.ndarray:
        return np.array([c.score for c in self.centers], dtype=np.float64)

    def with_box(self, width, height=None) -> "PickSet":
        return PickSet(self.centers, float(width), float(width if height is None else height))


def standardize(img: Image2D) -> Image2D:
    """Shift and scale to zero mean and unit standard deviation."""
    data = img.data.astype(np.float64)
    sd = data.std()
    if not sd > 0:
        raise NumericalError("degenerate contrast: image has zero variance")
    return Image2D((data - data.mean()) / sd, img.pixel_size)


def binarize(img: Image2D, threshold: float) -> LabelMask:
    """Label 1 where the value is strictly greater than ``threshold``."""
    return LabelMask((img.data > threshold).astype(np.uint8), k=2)
