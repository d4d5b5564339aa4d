"""Pure numpy implementations of the hot loops.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same results up to floating-point summation order.
"""
from __future__ import annotations

import numpy as np


def _row_major_strides(shape):
    strides = np.ones(len(shape), dtype=np.int64)
    for d in range(len(shape) - 2, -1, -1):
        strides[d] = strides[d + 1] * shape[d + 1]
    return strides


def _corner_weights(coords, shape):
    """Yield (flat index, weight) for each of the 2**D multilinear corners."""
    n, dims = coords.shape
    base = np.floor(coords).astype(np.int64)
    frac = coords - base
    strides = _row_major_strides(shape)
    base_idx = base @ strides
    for corner in range(1 << dims):
        w = np.ones(n)
        off = 0
        for d in range(dims):
            if (corner >> d) & 1:
                w *= frac[:, d]
                off += strides[d]
            else:
                w *= 1.0 - frac[:, d]
        yield base_idx + off, w


def splat(coords, values, shape):
    """Scatter ``values`` (n, k) onto a dense grid with multilinear weights.

    ``coords`` are in cell units and must satisfy ``0 <= c < shape - 1``.
    Returns the flattened grid of shape (prod(shape), k).
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    shape = np.asarray(shape, dtype=np.int64)
    size = int(np.prod(shape))
    k = values.shape[1]
    grid = np.zeros((size, k))
    for idx, w in _corner_weights(coords, shape):
        for c in range(k):
            grid[:, c] += np.bincount(idx, weights=w * values[:, c], minlength=size)
    return grid


def slice_grid(grid, coords, shape):
    """Gather from a flattened grid at ``coords`` with multilinear weights."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    shape = np.asarray(shape, dtype=np.int64)
    out = np.zeros((coords.shape[0], grid.shape[1]))
    for idx, w in _corner_weights(coords, shape):
        out += w[:, None] * grid[idx]
    return out


def gauss_pairwise(features, values, block=256):
    """Exact sum_{j != i} exp(-0.5 |f_i - f_j|^2) v_j for pre-scaled features."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    n = features.shape[0]
    out = np.empty((n, values.shape[1]))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = features[start:stop, None, :] - features[None, :, :]
        kern = np.exp(-0.5 * np.einsum("ijd,ijd->ij", diff, diff))
        kern[np.arange(stop - start), np.arange(start, stop)] = 0.0
        out[start:stop] = kern @ values
    return out


def hill_climb(score, ys, xs, half, max_iter=1000):
    """Move each candidate to the maximum of its (2*half+1)^2 window until stable.

    A candidate only moves when the window holds a strictly larger score; ties
    resolve to the first maximum in row-major order.
    """
    score = np.ascontiguousarray(score, dtype=np.float64)
    h, w = score.shape
    ys = np.array(ys, dtype=np.int64, copy=True)
    xs = np.array(xs, dtype=np.int64, copy=True)
    for m in range(ys.shape[0]):
        y, x = ys[m], xs[m]
        for _ in range(max_iter):
            y0, y1 = max(y - half, 0), min(y + half + 1, h)
            x0, x1 = max(x - half, 0), min(x + half + 1, w)
            window = score[y0:y1, x0:x1]
            flat = int(np.argmax(window))
            if window.flat[flat] <= score[y, x]:
                break
            y, x = y0 + flat // window.shape[1], x0 + flat % window.shape[1]
        ys[m], xs[m] = y, x
    return ys, xs
