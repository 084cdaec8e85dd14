# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Formulas mirror morphkern._native.fallback term for term."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs

cnp.import_array()

BACKEND = "cython"


def gaussian_cross(a, b, double sigma_x, double sigma_y):
    cdef const double[:, ::1] pa = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] pb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = pa.shape[0], n = pb.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double sx2 = sigma_x * sigma_x, sy2 = sigma_y * sigma_y
    cdef double dx, dy
    with nogil:
        for i in range(m):
            for j in range(n):
                dx = pa[i, 0] - pb[j, 0]
                dy = pa[i, 1] - pb[j, 1]
                out[i, j] = exp(-(dx * dx / sx2 + dy * dy / sy2))
    return out_arr


def idw_weights(queries, samples):
    cdef const double[:, ::1] q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef const double[:, ::1] s = np.ascontiguousarray(samples, dtype=np.float64)
    cdef Py_ssize_t m = q.shape[0], n = s.shape[0], i, j
    w_arr = np.zeros((m, n), dtype=np.float64)
    hit_arr = np.full(m, -1, dtype=np.int64)
    cdef double[:, ::1] w = w_arr
    cdef long long[::1] hit = hit_arr
    cdef double dx, dy, d, total
    with nogil:
        for i in range(m):
            for j in range(n):
                dx = q[i, 0] - s[j, 0]
                dy = q[i, 1] - s[j, 1]
                d = sqrt(dx * dx + dy * dy)
                if d == 0.0:
                    hit[i] = j
                    break
                w[i, j] = 1.0 / d
            if hit[i] >= 0:
                for j in range(n):
                    w[i, j] = 0.0
                w[i, hit[i]] = 1.0
                continue
            total = 0.0
            for j in range(n):
                total = total + w[i, j]
            for j in range(n):
                w[i, j] = w[i, j] / total
    return w_arr, hit_arr


def points_in_rings(px, py, ring_x, ring_y, ring_starts):
    cdef const double[::1] x = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(py, dtype=np.float64)
    cdef const double[::1] rx = np.ascontiguousarray(ring_x, dtype=np.float64)
    cdef const double[::1] ry = np.ascontiguousarray(ring_y, dtype=np.float64)
    cdef const long long[::1] starts = np.ascontiguousarray(ring_starts, dtype=np.int64)
    cdef Py_ssize_t m = x.shape[0], nrings = starts.shape[0] - 1
    cdef Py_ssize_t p, r, i, j, lo, hi
    out_arr = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef bint parity, edge
    cdef double xi, yi, xj, yj, ex, ey, cross, xint
    with nogil:
        for p in range(m):
            parity = False
            edge = False
            for r in range(nrings):
                lo = starts[r]
                hi = starts[r + 1]
                j = hi - 1
                for i in range(lo, hi):
                    xi = rx[i]
                    yi = ry[i]
                    xj = rx[j]
                    yj = ry[j]
                    ex = xi - xj
                    ey = yi - yj
                    cross = ex * (y[p] - yj) - ey * (x[p] - xj)
                    if (fabs(cross) <= 1e-12 * (ex * ex + ey * ey)
                            and x[p] >= (xi if xi < xj else xj) and x[p] <= (xj if xi < xj else xi)
                            and y[p] >= (yi if yi < yj else yj) and y[p] <= (yj if yi < yj else yi)):
                        edge = True
                        break
                    if (yi > y[p]) != (yj > y[p]):
                        xint = (xj - xi) * (y[p] - yi) / (yj - yi) + xi
                        if x[p] < xint:
                            parity = not parity
                    j = i
                if edge:
                    break
            out[p] = 1 if (edge or parity) else 0
    return out_arr
