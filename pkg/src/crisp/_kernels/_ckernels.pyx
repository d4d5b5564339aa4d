# cython: language_level=3
"""Compiled twins of the loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, floor

cnp.import_array()


def _strides(cnp.int64_t[:] shape):
    cdef Py_ssize_t dims = shape.shape[0], d
    strides = np.ones(dims, dtype=np.int64)
    cdef cnp.int64_t[:] s = strides
    for d in range(dims - 2, -1, -1):
        s[d] = s[d + 1] * shape[d + 1]
    return strides


def splat(coords, values, shape):
    cdef double[:, ::1] c = np.ascontiguousarray(coords, dtype=np.float64)
    cdef double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    shape_arr = np.asarray(shape, dtype=np.int64)
    cdef cnp.int64_t[:] st = _strides(shape_arr)
    cdef Py_ssize_t n = c.shape[0], dims = c.shape[1], k = v.shape[1]
    cdef Py_ssize_t size = int(np.prod(shape_arr))
    grid_arr = np.zeros((size, k), dtype=np.float64)
    cdef double[:, ::1] grid = grid_arr
    cdef double[::1] frac = np.empty(dims)
    cdef cnp.int64_t[::1] base = np.empty(dims, dtype=np.int64)
    cdef Py_ssize_t i, d, ch, corner, ncorner = 1 << dims
    cdef cnp.int64_t idx, base_idx
    cdef double w, fl
    for i in range(n):
        base_idx = 0
        for d in range(dims):
            fl = floor(c[i, d])
            base[d] = <cnp.int64_t>fl
            frac[d] = c[i, d] - fl
            base_idx += base[d] * st[d]
        for corner in range(ncorner):
            w = 1.0
            idx = base_idx
            for d in range(dims):
                if (corner >> d) & 1:
                    w *= frac[d]
                    idx += st[d]
                else:
                    w *= 1.0 - frac[d]
            for ch in range(k):
                grid[idx, ch] += w * v[i, ch]
    return grid_arr


def slice_grid(grid, coords, shape):
    cdef double[:, ::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(coords, dtype=np.float64)
    shape_arr = np.asarray(shape, dtype=np.int64)
    cdef cnp.int64_t[:] st = _strides(shape_arr)
    cdef Py_ssize_t n = c.shape[0], dims = c.shape[1], k = g.shape[1]
    out_arr = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] frac = np.empty(dims)
    cdef Py_ssize_t i, d, ch, corner, ncorner = 1 << dims
    cdef cnp.int64_t idx, base_idx
    cdef double w, fl
    for i in range(n):
        base_idx = 0
        for d in range(dims):
            fl = floor(c[i, d])
            frac[d] = c[i, d] - fl
            base_idx += (<cnp.int64_t>fl) * st[d]
        for corner in range(ncorner):
            w = 1.0
            idx = base_idx
            for d in range(dims):
                if (corner >> d) & 1:
                    w *= frac[d]
                    idx += st[d]
                else:
                    w *= 1.0 - frac[d]
            for ch in range(k):
                out[i, ch] += w * g[idx, ch]
    return out_arr


def gauss_pairwise(features, values, block=256):
    cdef double[:, ::1] f = np.ascontiguousarray(features, dtype=np.float64)
    cdef double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], dims = f.shape[1], k = v.shape[1]
    out_arr = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, d, ch
    cdef double dist, diff, w
    for i in range(n):
        for j in range(i + 1, n):
            dist = 0.0
            for d in range(dims):
                diff = f[i, d] - f[j, d]
                dist += diff * diff
            w = exp(-0.5 * dist)
            for ch in range(k):
                out[i, ch] += w * v[j, ch]
                out[j, ch] += w * v[i, ch]
    return out_arr


def hill_climb(score, ys, xs, Py_ssize_t half, Py_ssize_t max_iter=1000):
    cdef double[:, ::1] s = np.ascontiguousarray(score, dtype=np.float64)
    ys_arr = np.array(ys, dtype=np.int64, copy=True)
    xs_arr = np.array(xs, dtype=np.int64, copy=True)
    cdef cnp.int64_t[:] yv = ys_arr
    cdef cnp.int64_t[:] xv = xs_arr
    cdef Py_ssize_t h = s.shape[0], w = s.shape[1]
    cdef Py_ssize_t m, it, y, x, yy, xx, by, bx, y0, y1, x0, x1
    cdef double best
    for m in range(yv.shape[0]):
        y = yv[m]
        x = xv[m]
        for it in range(max_iter):
            y0 = y - half if y - half > 0 else 0
            y1 = y + half + 1 if y + half + 1 < h else h
            x0 = x - half if x - half > 0 else 0
            x1 = x + half + 1 if x + half + 1 < w else w
            best = s[y0, x0]
            by = y0
            bx = x0
            for yy in range(y0, y1):
                for xx in range(x0, x1):
                    if s[yy, xx] > best:
                        best = s[yy, xx]
                        by = yy
                        bx = xx
            if best <= s[y, x]:
                break
            y = by
            x = bx
        yv[m] = y
        xv[m] = x
    return ys_arr, xs_arr
