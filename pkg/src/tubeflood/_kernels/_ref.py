"""NumPy reference implementation of the operator-matrix assembly.

Row i of the result discretizes

    (TV)(alpha_i) = kappa (1-kappa^2) alpha_i^4 *
                    int_{alpha_i}^{alpha_max} V(y) / (y^2 (y^2 - (1-kappa^2) alpha_i^2)^{3/2}) dy

with fixed-order Gauss-Legendre on each grid cell applied to the
piecewise-linear interpolant of V, so T acts as a dense matrix on the
sample vector.  For y >= alpha the denominator is bounded below by
kappa^3 y^3: the kernel is smooth and no singular treatment is needed.
"""

import numpy as np

BACKEND = "numpy"

# Rows are processed in blocks to bound the (rows x cells x order) temporary.
_BLOCK = 128


def t_matrix(grid, kappa, nodes, weights):
    """Dense operator matrix for samples on ``grid`` (ascending, grid[0] = 0 ok)."""
    grid = np.ascontiguousarray(grid, dtype=float)
    n = grid.shape[0]
    c = 1.0 - kappa * kappa
    coef = kappa * c
    out = np.zeros((n, n))

    left_edge = grid[:-1]
    width = np.diff(grid)
    mid = left_edge + 0.5 * width
    half = 0.5 * width
    Y = mid[:, None] + half[:, None] * nodes[None, :]          # (n-1, order)
    W = half[:, None] * weights[None, :]
    frac = (Y - left_edge[:, None]) / width[:, None]
    y2 = Y * Y

    cell_idx = np.arange(n - 1)
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        alpha = grid[i0:i1]
        c0 = c * alpha * alpha
        live = cell_idx[None, :] >= np.arange(i0, i1)[:, None]  # (rows, n-1)
        arg = np.where(live[:, :, None], y2[None, :, :] - c0[:, None, None], 1.0)
        K = np.where(
            live[:, :, None],
            coef * (alpha**4)[:, None, None] / (y2[None, :, :] * arg * np.sqrt(arg)),
            0.0,
        )
        KW = K * W[None, :, :]
        out[i0:i1, :-1] += np.sum(KW * (1.0 - frac)[None, :, :], axis=2)
        out[i0:i1, 1:] += np.sum(KW * frac[None, :, :], axis=2)
    return out
