"""Overlapping patch extraction and weighted stitching.

Patches are laid out on a regular grid with stride ``size - overlap``; the last
row and column are shifted inward so no patch leaves the image.  Stitching
multiplies each patch by a separable raised-cosine window and divides the
accumulated sum by the accumulated weight.  Window edges that lie on the
canvas border stay flat so border pixels keep full weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Image2D, ProbabilityMap


def grid_offsets(length: int, size: int, overlap: int) -> list[int]:
    """Top-left offsets along one axis, the last one pinned to ``length - size``."""
    if not size > overlap >= 0:
        raise ValueError(f"need size > overlap >= 0, got size={size} overlap={overlap}")
    if length <= size:
        return [0]
    stride = size - overlap
    n = math.ceil((length - size) / stride) + 1
    return [i * stride for i in range(n - 1)] + [length - size]


def patch_count(shape, size: int, overlap: int) -> int:
    """Closed-form number of patches, ``prod(ceil((L - size) / stride) + 1)``."""
    stride = size - overlap
    count = 1
    for length in shape:
        length = max(length, size)
        count *= math.ceil((length - size) / stride) + 1
    return count


@dataclass(frozen=True)
class PatchGrid:
    """Patches with their top-left ``(y, x)`` corners in the padded frame.

    ``image_shape`` is the source size; ``padded_shape`` is at least
    ``size`` on each side.
    """

    size: int
    overlap: int
    image_shape: tuple[int, int]
    padded_shape: tuple[int, int]
    patches: tuple[tuple[np.ndarray, tuple[int, int]], ...]
    pixel_size: float = 1.0

    def __len__(self) -> int:
        return len(self.patches)

    @property
    def stride(self) -> int:
        return self.size - self.overlap

    def corners(self) -> list[tuple[int, int]]:
        return [corner for _, corner in self.patches]

    def with_patches(self, arrays) -> "PatchGrid":
        """Same layout with new patch contents, e.g. network outputs."""
        arrays = list(arrays)
        if len(arrays) != len(self.patches):
            raise ValueError(f"expected {len(self.patches)} patches, got {len(arrays)}")
        out = []
        for arr, (_, corner) in zip(arrays, self.patches):
            arr = np.asarray(getattr(arr, "data", arr))
            if arr.shape != (self.size, self.size):
                raise ValueError(f"patch shape {arr.shape} is not {self.size}x{self.size}")
            out.append((arr, corner))
        return PatchGrid(self.size, self.overlap, self.image_shape, self.padded_shape,
                         tuple(out), self.pixel_size)


def extract_patches(img: Image2D, size: int = 512, overlap: int = 64) -> PatchGrid:
    data = np.asarray(getattr(img, "data", img))
    if not size > overlap >= 0:
        raise ValueError(f"need size > overlap >= 0, got size={size} overlap={overlap}")
    h, w = data.shape
    ph, pw = max(h, size), max(w, size)
    if (ph, pw) != (h, w):
        data = np.pad(data, ((0, ph - h), (0, pw - w)), mode="reflect" if min(h, w) > 1 else "edge")
    patches = []
    for y in grid_offsets(ph, size, overlap):
        for x in grid_offsets(pw, size, overlap):
            patches.append((data[y:y + size, x:x + size], (y, x)))
    return PatchGrid(size, overlap, (h, w), (ph, pw), tuple(patches),
                     float(getattr(img, "pixel_size", 1.0)))


def ramp(bandwidth: int) -> np.ndarray:
    """Raised-cosine rise over ``bandwidth`` samples, strictly inside (0, 1)."""
    i = np.arange(bandwidth)
    return 0.5 * (1.0 - np.cos(np.pi * (i + 1) / (bandwidth + 1)))


def weight_profile(size: int, bandwidth: int, flat_start=False, flat_end=False) -> np.ndarray:
    if bandwidth < 0 or 2 * bandwidth > size:
        raise ValueError(f"bandwidth {bandwidth} does not fit twice in size {size}")
    prof = np.ones(size)
    r = ramp(bandwidth)
    if bandwidth:
        if not flat_start:
            prof[:bandwidth] = r
        if not flat_end:
            prof[size - bandwidth:] = r[::-1]
    return prof


def weight_map(size: int, bandwidth: int) -> Image2D:
    """Outer product of the rise / plateau / fall profile with itself."""
    prof = weight_profile(size, bandwidth)
    return Image2D(np.outer(prof, prof))


def stitch_array(grid: PatchGrid, bandwidth: int | None = None) -> np.ndarray:
    """Weighted average of the patches, cropped to the source shape (float64)."""
    if not grid.patches:
        raise ValueError("no patches to stitch")
    band = grid.overlap if bandwidth is None else int(bandwidth)
    ph, pw = grid.padded_shape
    acc = np.zeros((ph, pw))
    wsum = np.zeros((ph, pw))
    s = grid.size
    for arr, (y, x) in grid.patches:
        wy = weight_profile(s, band, flat_start=y == 0, flat_end=y + s == ph)
        wx = weight_profile(s, band, flat_start=x == 0, flat_end=x + s == pw)
        wgt = np.outer(wy, wx)
        acc[y:y + s, x:x + s] += wgt * arr
        wsum[y:y + s, x:x + s] += wgt
    if not np.all(wsum > 0):
        raise ValueError("some canvas pixels are not covered by any patch")
    h, w = grid.image_shape
    return (acc / wsum)[:h, :w]


def stitch(grid: PatchGrid, bandwidth: int | None = None) -> Image2D:
    """Stitch to a ProbabilityMap when every value lies in [0, 1], else an Image2D."""
    out = stitch_array(grid, bandwidth)
    if out.min() >= 0.0 and out.max() <= 1.0:
        return ProbabilityMap(out, grid.pixel_size)
    return Image2D(out, grid.pixel_size)
