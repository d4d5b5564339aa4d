"""Gaussian message passing: exact O(n^2) sums and fast approximations.

Both routes compute ``out_i = sum_{j != i} k(f_i, f_j) v_j`` with
``k = exp(-|f_i - f_j|^2 / 2)`` on bandwidth-scaled features.  The fast
route uses a separable truncated convolution for purely spatial kernels and
a dense bilateral grid for kernels with a feature (range) term.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import ndimage

from .. import _kernels
from .model import SMOOTHNESS, KernelSpec

log = logging.getLogger(__name__)

MAX_EXACT_PIXELS = 4096
SPATIAL_TRUNCATE = 3.0
GRID_TRUNCATE = 4.0
MAX_GRID_CELLS = 30_000_000


def _as_channels(values, n):
    v = np.asarray(values, dtype=np.float64)
    return v.reshape(n, -1)


def gauss_sum_exact(values, scaled_features, limit=MAX_EXACT_PIXELS):
    """Exact self-excluded Gaussian sum over arbitrary scaled feature points."""
    f = np.asarray(scaled_features, dtype=np.float64)
    n = f.shape[0]
    if n > limit:
        raise ValueError(f"exact filtering is capped at {limit} points, got {n}")
    return _kernels.gauss_pairwise(f, _as_channels(values, n))


def filter_bruteforce(values, kernel: KernelSpec, features=None, limit=MAX_EXACT_PIXELS):
    """Exact filtering of ``values`` (h, w, k) under ``kernel``."""
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape[:2]
    scaled = kernel.scaled_features((h, w), features)
    out = gauss_sum_exact(values.reshape(h * w, -1), scaled, limit)
    return out.reshape(values.shape)


def _gauss_taps(sigma, radius, scale=1.0):
    offs = np.arange(-radius, radius + 1, dtype=np.float64)
    return scale * np.exp(-0.5 * (offs / sigma) ** 2)


def spatial_filter(values, sigma, truncate=SPATIAL_TRUNCATE):
    """Separable Gaussian with peak 1, truncated at ``truncate`` bandwidths, zero outside the image."""
    values = np.asarray(values, dtype=np.float64)
    taps = _gauss_taps(sigma, int(math.ceil(truncate * sigma)))
    out = ndimage.correlate1d(values, taps, axis=0, mode="constant", cval=0.0)
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant", cval=0.0)
    return out - values


def grid_filter(values, scaled_features, samples_per_sigma=4.0, truncate=GRID_TRUNCATE,
                max_cells=MAX_GRID_CELLS):
    """Bilateral-grid approximation of the self-excluded Gaussian sum.

    Points are splatted with multilinear weights onto a grid with
    ``samples_per_sigma`` cells per bandwidth, blurred, and sliced back.
    Splat and slice each add variance f(1 - f) cell^2 for a point at
    fractional offset f, so each axis is blurred with the width left after
    removing twice the mean of that term (1/3 for uniform offsets, 0 when all
    points sit on grid nodes) and rescaled to keep the kernel mass.  The self
    term is removed exactly.
    """
    f = np.asarray(scaled_features, dtype=np.float64)
    n, dims = f.shape
    v = _as_channels(values, n)
    s = float(samples_per_sigma)
    radius = int(math.ceil(truncate * s))
    pad = radius + 1
    while True:
        u = (f - f.min(axis=0)) * s + pad
        shape = np.floor(u.max(axis=0)).astype(np.int64) + 2 + pad
        cells = int(np.prod(shape))
        if cells <= max_cells or s <= 1.0:
            break
        s = max(1.0, s * (max_cells / cells) ** (1.0 / dims))
        radius = int(math.ceil(truncate * s))
        pad = radius + 1
        log.warning("bilateral grid too large (%d cells); coarsening to %.2f samples/sigma", cells, s)
    if cells > max_cells:
        raise MemoryError(f"bilateral grid needs {cells} cells; reduce the feature dimension")
    frac = u - np.floor(u)
    interp_var = 2.0 * (frac * (1.0 - frac)).mean(axis=0)
    grid = _kernels.splat(u, v, shape).reshape(*shape, v.shape[1])
    self_w = np.ones(n)
    for axis in range(dims):
        sigma_g = math.sqrt(s * s - interp_var[axis])
        taps = _gauss_taps(sigma_g, radius, scale=s / sigma_g)
        grid = ndimage.correlate1d(grid, taps, axis=axis, mode="constant", cval=0.0)
        fa = frac[:, axis]
        g0, g1 = taps[radius], taps[radius + 1]
        self_w *= g0 * (fa ** 2 + (1 - fa) ** 2) + 2.0 * g1 * fa * (1 - fa)
    out = _kernels.slice_grid(grid.reshape(cells, -1), u, shape)
    return out - self_w[:, None] * v


def filter_fast(values, kernel: KernelSpec, features=None, samples_per_sigma=4.0):
    """Fast filtering of ``values`` (h, w, k) under ``kernel``."""
    values = np.asarray(values, dtype=np.float64)
    if kernel.kind == SMOOTHNESS:
        return spatial_filter(values, kernel.spatial)
    h, w = values.shape[:2]
    scaled = kernel.scaled_features((h, w), features)
    out = grid_filter(values.reshape(h * w, -1), scaled, samples_per_sigma)
    return out.reshape(values.shape)
