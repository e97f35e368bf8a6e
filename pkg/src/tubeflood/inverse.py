"""Recovery of V_w and the measure from a displacement characteristic.

Given the curve G and the support bound alpha_max, the produced-water
profile V_w solves the fixed-point equation

    V(alpha) = G(h(alpha) + (TV)(alpha)) ,

where h collects the curve-endpoint data and T is the integral operator
with kernel K below.  G is 1-Lipschitz and the sup-norm of T is at most
q = (1-kappa)/(1+kappa) < 1, so plain iteration from V = 0 contracts at
rate q and the solution is unique.

From the recovered V, the harmonic cumulative Phi(alpha) = int_0^alpha
dmu(y)/y follows from V'(alpha) = (1+kappa)/kappa * alpha * Phi(alpha),
and for measures with a continuous density f,

    f(alpha) = kappa/(1+kappa) * alpha * (V'(alpha)/alpha)' .

Note the prefactor: substituting the V' relation shows the inverted form
is required; the flag paper_literal exposes the uncorrected variant for
comparison runs only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import t_matrix
from .errors import ArgumentError, ConvergenceError
from .forward import curve_readoff
from .measures import check_kappa


@dataclass(frozen=True)
class RecoveryConfig:
    """Numerical parameters of the inversion.

    tol=None means 1e-10 * v_max, fixed when the solve starts.  alpha_min
    is the lower edge of the density reporting window; 0 disables density
    recovery (the density formula divides by alpha).
    """

    n_grid: int = 1001
    tol: float | None = None
    max_iter: int = 200
    alpha_min: float = 0.0
    quad_order: int = 4

    def __post_init__(self):
        if self.n_grid < 3:
            raise ArgumentError("n_grid must be >= 3")
        if self.tol is not None and not self.tol > 0:
            raise ArgumentError("tol must be > 0")
        if self.max_iter < 1:
            raise ArgumentError("max_iter must be >= 1")
        if self.alpha_min < 0:
            raise ArgumentError("alpha_min must be >= 0")
        if self.quad_order < 1:
            raise ArgumentError("quad_order must be >= 1")


@dataclass(eq=False)
class RecoveryResult:
    """Recovered profile plus iteration diagnostics.

    error_bound is the contraction estimate q/(1-q) * (last sup step);
    phi and f are filled by the cdf/density stages (NaN outside the
    density reporting window).
    """

    grid: np.ndarray
    v: np.ndarray
    kappa: float
    iterations: int
    observed_ratio: float
    error_bound: float
    residual: float
    contraction_q: float
    tol: float
    converged: bool
    phi: np.ndarray | None = None
    phi_clip_count: int | None = None
    f: np.ndarray | None = None
    f_clip_count: int | None = None
    alpha_min: float | None = None

    @property
    def alpha_max(self):
        return float(self.grid[-1])


def kernel_K(y, alpha, kappa, alpha_max):
    """Kernel kappa (1-kappa^2) alpha^4 / (y^2 (y^2 - (1-kappa^2) alpha^2)^{3/2}).

    Defined for 0 <= alpha <= y <= alpha_max; since y >= alpha implies
    y^2 - (1-kappa^2) alpha^2 >= kappa^2 y^2, the kernel is finite on the
    whole triangle (and vanishes at alpha = 0).
    """
    kappa = check_kappa(kappa)
    y_arr = np.asarray(y, dtype=float)
    a_arr = np.asarray(alpha, dtype=float)
    if np.any(a_arr < 0):
        raise ArgumentError("alpha must be >= 0")
    if np.any(y_arr < a_arr):
        raise ArgumentError("kernel requires y >= alpha")
    if np.any(y_arr > alpha_max):
        raise ArgumentError("kernel requires y <= alpha_max")
    c = 1.0 - kappa * kappa
    d = y_arr * y_arr - c * a_arr * a_arr
    out = np.divide(
        kappa * c * a_arr**4,
        y_arr * y_arr * d * np.sqrt(d),
        out=np.zeros_like(d),
        where=a_arr > 0,
    )
    if np.isscalar(y) and np.isscalar(alpha):
        return float(out)
    return out


@lru_cache(maxsize=16)
def _unit_t_matrix(n, kappa, order):
    """Operator matrix on the unit uniform grid.

    T is invariant under rescaling alpha -> alpha_max * alpha (kernel gains
    1/alpha_max, cell widths gain alpha_max), so one matrix per
    (n, kappa, order) serves every alpha_max.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    M = t_matrix(np.linspace(0.0, 1.0, n), kappa, nodes, weights)
    M.setflags(write=False)
    return M


def apply_T(v, kappa, alpha_max, order=4):
    """Apply the integral operator to samples of V on the uniform grid.

    v holds the values of V at linspace(0, alpha_max, len(v)); the result
    samples TV on the same grid, with (TV)(alpha_max) = 0 exactly.
    """
    kappa = check_kappa(kappa)
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ArgumentError("v must be a 1-d array of >= 2 grid samples")
    if not alpha_max > 0:
        raise ArgumentError("alpha_max must be > 0")
    return _unit_t_matrix(v.size, kappa, order) @ v


def h_of_alpha(v_w_max, v_o_max, kappa, alpha_max, alpha, paper_literal=False):
    """Inhomogeneous term h(alpha) built from the curve endpoint data.

    With R(alpha) = sqrt(alpha_max^2 - (1-kappa^2) alpha^2):

        h = kappa/(1-kappa^2) (alpha_max - R) V_w'(alpha_max)
          + kappa/(1-kappa^2) (alpha_max - R)^2 / (alpha_max R) V_w(alpha_max)

    V_w'(alpha_max) is reconstructed from (v_w_max, v_o_max) the same way
    curve_readoff does, including the division by alpha_max unless
    paper_literal is set.
    """
    kappa = check_kappa(kappa)
    if not 0 < alpha_max:
        raise ArgumentError("alpha_max must be > 0")
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 0) or np.any(a > alpha_max * (1 + 1e-12)):
        raise ArgumentError("alpha must lie in [0, alpha_max]")
    c = 1.0 - kappa * kappa
    vwp = 2.0 * v_w_max + (1.0 + kappa) / kappa * v_o_max
    if not paper_literal:
        vwp /= alpha_max
    R = np.sqrt(alpha_max * alpha_max - c * a * a)
    gap = alpha_max - R
    out = kappa / c * gap * vwp + kappa / c * gap * gap / (alpha_max * R) * v_w_max
    if np.isscalar(alpha):
        return float(out)
    return out


def solve_fixed_point(curve, config=None, paper_literal=False, v0=None):
    """Iterate V <- G(h + TV) until the sup change is below tol.

    The canonical start is V = 0; any bounded v0 (scalar or grid array)
    converges to the same fixed point, which the uniqueness tests exercise.
    Returns a RecoveryResult holding V only (see ``recover`` for the full
    pipeline).  Raises ConvergenceError, carrying the last iterate, if the
    iteration budget is exhausted; with G 1-Lipschitz this can only happen
    for pathological tolerance settings, since the iteration contracts at
    rate q = (1-kappa)/(1+kappa).
    """
    cfg = config or RecoveryConfig()
    kappa = curve.kappa
    alpha_max = curve.alpha_max
    v_max = curve.v_max
    if not v_max > 0:
        raise ArgumentError("degenerate curve: v_max must be > 0")
    tol = cfg.tol if cfg.tol is not None else 1e-10 * v_max

    grid = np.linspace(0.0, alpha_max, cfg.n_grid)
    vw_max, _ = curve_readoff(curve, paper_literal=paper_literal)
    h = h_of_alpha(
        vw_max, v_max - vw_max, kappa, alpha_max, grid, paper_literal=paper_literal
    )
    M = _unit_t_matrix(cfg.n_grid, kappa, cfg.quad_order)

    q = (1.0 - kappa) / (1.0 + kappa)
    if v0 is None:
        v = np.zeros(cfg.n_grid)
    else:
        v = np.broadcast_to(np.asarray(v0, dtype=float), (cfg.n_grid,)).copy()
    last_delta = math.inf
    ratio = 0.0
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iter + 1):
        v_next = curve(h + M @ v)
        delta = float(np.max(np.abs(v_next - v)))
        if math.isfinite(last_delta) and last_delta > 0:
            ratio = max(ratio, delta / last_delta)
        v = v_next
        last_delta = delta
        if delta <= tol:
            converged = True
            break

    residual = float(np.max(np.abs(v - curve(h + M @ v))))
    result = RecoveryResult(
        grid=grid,
        v=v,
        kappa=kappa,
        iterations=iterations,
        observed_ratio=ratio,
        error_bound=q / (1.0 - q) * last_delta,
        residual=residual,
        contraction_q=q,
        tol=tol,
        converged=converged,
    )
    if not converged:
        raise ConvergenceError(
            f"no convergence in {cfg.max_iter} iterations "
            f"(last step {last_delta:.3e}, tol {tol:.3e})",
            result=result,
        )
    return result


def recover_cdf(grid, v, kappa):
    """Harmonic cumulative Phi from recovered V samples.

    Phi(alpha) = kappa V'(alpha) / ((1+kappa) alpha), with V' by
    second-order differences (one-sided at the ends) and Phi(0) = 0.
    Noise-induced decreases are clipped to the running maximum; the clip
    count is returned alongside.
    """
    kappa = check_kappa(kappa)
    grid = np.asarray(grid, dtype=float)
    v = np.asarray(v, dtype=float)
    spacing = grid[1] - grid[0]
    vp = np.gradient(v, spacing, edge_order=2)
    raw = np.zeros_like(v)
    raw[1:] = kappa * vp[1:] / ((1.0 + kappa) * grid[1:])
    phi = np.maximum.accumulate(raw)
    return phi, int(np.sum(phi > raw))


def recover_density(grid, v, kappa, alpha_min, paper_literal=False):
    """Density samples f on the window [alpha_min, alpha_max - 2h].

    f(alpha) = kappa/(1+kappa) alpha (V'(alpha)/alpha)' via second-order
    stencils; NaN outside the window, negatives clipped to 0 inside (count
    returned).  Only meaningful when the measure has a continuous density.
    """
    kappa = check_kappa(kappa)
    grid = np.asarray(grid, dtype=float)
    v = np.asarray(v, dtype=float)
    if not alpha_min > 0:
        raise ArgumentError("alpha_min must be > 0 (density formula divides by alpha)")
    if not alpha_min < grid[-1]:
        raise ArgumentError("alpha_min must be below alpha_max")
    spacing = grid[1] - grid[0]
    vp = np.gradient(v, spacing, edge_order=2)
    w = vp[1:] / grid[1:]
    wp = np.gradient(w, spacing, edge_order=2)
    prefactor = (1.0 + kappa) / kappa if paper_literal else kappa / (1.0 + kappa)
    f = np.full_like(v, np.nan)
    f[1:] = prefactor * grid[1:] * wp
    window = (grid >= alpha_min) & (grid <= grid[-1] - 2.0 * spacing * (1 - 1e-12))
    f[~window] = np.nan
    negative = window & (f < 0.0)
    f[negative] = 0.0
    return f, int(np.sum(negative))


def recover(curve, config=None, paper_literal=False):
    """Full pipeline: fixed point, then Phi, then (optionally) the density."""
    cfg = config or RecoveryConfig()
    result = solve_fixed_point(curve, cfg, paper_literal=paper_literal)
    result.phi, result.phi_clip_count = recover_cdf(result.grid, result.v, result.kappa)
    if cfg.alpha_min > 0:
        result.f, result.f_clip_count = recover_density(
            result.grid, result.v, result.kappa, cfg.alpha_min, paper_literal
        )
        result.alpha_min = cfg.alpha_min
    return result
