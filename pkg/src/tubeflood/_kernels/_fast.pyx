# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled assembly of the displacement operator matrix.

Same contract as the NumPy fallback in _ref.py: per-cell Gauss-Legendre on
the piecewise-linear interpolant, dense (n, n) float64 output.
"""

from libc.math cimport sqrt

import numpy as np

BACKEND = "cython"


def t_matrix(grid, double kappa, nodes, weights):
    grid_arr = np.ascontiguousarray(grid, dtype=np.float64)
    nodes_arr = np.ascontiguousarray(nodes, dtype=np.float64)
    weights_arr = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] g = grid_arr
    cdef double[::1] xq = nodes_arr
    cdef double[::1] wq = weights_arr
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t order = xq.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] M = out

    cdef double c = 1.0 - kappa * kappa
    cdef double coef = kappa * c
    cdef double alpha, c0, a4, gl, gr, mid, half, y, w, d, kval, frac
    cdef Py_ssize_t i, j, q

    for i in range(n):
        alpha = g[i]
        if alpha == 0.0:
            continue
        c0 = c * alpha * alpha
        a4 = alpha * alpha * alpha * alpha
        for j in range(i, n - 1):
            gl = g[j]
            gr = g[j + 1]
            mid = 0.5 * (gl + gr)
            half = 0.5 * (gr - gl)
            for q in range(order):
                y = mid + half * xq[q]
                w = half * wq[q]
                d = y * y - c0
                kval = coef * a4 / (y * y * d * sqrt(d))
                frac = (y - gl) / (gr - gl)
                M[i, j] += w * kval * (1.0 - frac)
                M[i, j + 1] += w * kval * frac
    return out
