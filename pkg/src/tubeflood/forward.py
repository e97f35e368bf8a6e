"""Continuum forward map: produced volumes and the displacement characteristic.

For a tube-length measure mu and viscosity ratio kappa, with the front
parameter alpha:

    V_w(alpha) = (1+kappa)/(2 kappa) * int_0^alpha (alpha^2 - y^2)/y dmu(y)
    V_o(alpha) = int_0^alpha y dmu(y)
                 + 1/(1-kappa) * int_alpha^inf (y - sqrt(y^2 - (1-kappa^2) alpha^2)) dmu(y)

The displacement characteristic is the monotone graph of produced water
against total produced volume, {(V_w + V_o, V_w)}; its slope never exceeds 1.
All sampling routines are vectorized over alpha so that curve construction
and the Monte Carlo harness stay cheap for atomic measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, InternalConsistencyError, UndefinedValueError
from .measures import check_kappa, moment

# Adjacent curve samples may exceed unit slope by at most this relative
# amount before the curve is rejected.
LIPSCHITZ_RTOL = 1e-9


# ---------------------------------------------------------------------------
# vectorized sampling kernels
# ---------------------------------------------------------------------------

def _atom_cumulative(mu, alphas, p, inclusive):
    """Prefix sums of S * L^p over atoms below each alpha.

    inclusive=False counts L < alpha (the half-open convention used by the
    produced volumes); inclusive=True counts L <= alpha (the right-limit
    convention used by the derivatives).
    """
    if not mu.atoms:
        return np.zeros_like(alphas)
    side = "right" if inclusive else "left"
    idx = np.searchsorted(mu._atom_L, alphas, side=side)
    return mu._prefix[p][idx]


def _piece_cumulative(mu, alphas, p):
    """Closed-form integral of y^p rho dy over [piece_a, min(piece_b, alpha))."""
    total = np.zeros_like(alphas)
    for pa, pb, rho in mu.pieces:
        hi = np.clip(alphas, pa, pb)
        if p == -1:
            contrib = rho * np.log(hi / pa)
        else:
            contrib = rho * (hi * hi - pa * pa) / 2.0
        total += np.where(alphas > pa, contrib, 0.0)
    return total


def _tail_antiderivative_arr(y, c0):
    s = np.sqrt(np.maximum(y * y - c0, 0.0))
    return 0.5 * c0 * (y / (y + s) + np.log(y + s))


def v_w_samples(mu, kappa, alphas):
    """V_w on an array of alpha values (closed form)."""
    kappa = check_kappa(kappa)
    alphas = np.asarray(alphas, dtype=float)
    m_inv = _atom_cumulative(mu, alphas, -1, inclusive=False) + _piece_cumulative(
        mu, alphas, -1
    )
    m_one = _atom_cumulative(mu, alphas, 1, inclusive=False) + _piece_cumulative(
        mu, alphas, 1
    )
    return (1.0 + kappa) / (2.0 * kappa) * (alphas * alphas * m_inv - m_one)


def v_o_samples(mu, kappa, alphas):
    """V_o on an array of alpha values (closed form)."""
    kappa = check_kappa(kappa)
    alphas = np.asarray(alphas, dtype=float)
    c = 1.0 - kappa * kappa
    c0 = c * alphas * alphas
    total = _atom_cumulative(mu, alphas, 1, inclusive=False) + _piece_cumulative(
        mu, alphas, 1
    )
    tail = np.zeros_like(alphas)
    if mu.atoms:
        L = mu._atom_L
        S = mu._atom_S
        in_tail = L[None, :] >= alphas[:, None]
        disc = np.where(in_tail, L[None, :] ** 2 - c0[:, None], 1.0)
        # stable form of L - sqrt(L^2 - c0)
        tail += np.sum(
            np.where(in_tail, S[None, :] * c0[:, None] / (L[None, :] + np.sqrt(disc)), 0.0),
            axis=1,
        )
    for pa, pb, rho in mu.pieces:
        lo = np.maximum(alphas, pa)
        live = (lo < pb) & (c0 > 0.0)
        lo_safe = np.where(live, lo, pb)
        tail += np.where(
            live,
            rho
            * (
                _tail_antiderivative_arr(pb, c0)
                - _tail_antiderivative_arr(lo_safe, c0)
            ),
            0.0,
        )
    return total + tail / (1.0 - kappa)


def v_w_prime_samples(mu, kappa, alphas):
    """dV_w/dalpha = (1+kappa) alpha / kappa * int_0^alpha dmu/y.

    At an atom location the right limit is taken (the atom is included).
    """
    kappa = check_kappa(kappa)
    alphas = np.asarray(alphas, dtype=float)
    m_inv = _atom_cumulative(mu, alphas, -1, inclusive=True) + _piece_cumulative(
        mu, alphas, -1
    )
    return (1.0 + kappa) * alphas / kappa * m_inv


def v_o_prime_samples(mu, kappa, alphas):
    """dV_o/dalpha = (1+kappa) alpha int_alpha^inf dmu(y)/sqrt(y^2-(1-kappa^2)alpha^2).

    At an atom location the right limit is taken (the atom is excluded).
    """
    kappa = check_kappa(kappa)
    alphas = np.asarray(alphas, dtype=float)
    c = 1.0 - kappa * kappa
    c0 = c * alphas * alphas
    tail = np.zeros_like(alphas)
    if mu.atoms:
        L = mu._atom_L
        S = mu._atom_S
        in_tail = L[None, :] > alphas[:, None]
        disc = np.where(in_tail, L[None, :] ** 2 - c0[:, None], 1.0)
        tail += np.sum(np.where(in_tail, S[None, :] / np.sqrt(disc), 0.0), axis=1)
    for pa, pb, rho in mu.pieces:
        lo = np.maximum(alphas, pa)
        live = lo < pb
        lo_safe = np.where(live, lo, pb)
        # antiderivative of 1/sqrt(y^2 - c0) is ln(y + sqrt(y^2 - c0))
        num = pb + np.sqrt(np.maximum(pb * pb - c0, 0.0))
        den = lo_safe + np.sqrt(np.maximum(lo_safe * lo_safe - c0, 0.0))
        tail += np.where(live, rho * np.log(num / den), 0.0)
    return (1.0 + kappa) * alphas * tail


def water_cut_samples(mu, kappa, alphas):
    """V_w'/(V_w'+V_o') with the 0/0 points (no flow at all) mapped to 0."""
    wp = v_w_prime_samples(mu, kappa, alphas)
    op = v_o_prime_samples(mu, kappa, alphas)
    den = wp + op
    return np.divide(wp, den, out=np.zeros_like(den), where=den > 0)


def harmonic_cdf_samples(mu, alphas):
    """Phi(alpha) = integral of dmu(y)/y over [0, alpha), vectorized."""
    alphas = np.asarray(alphas, dtype=float)
    return _atom_cumulative(mu, alphas, -1, inclusive=False) + _piece_cumulative(
        mu, alphas, -1
    )


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def v_w(mu, kappa, alpha):
    """Produced water volume at front parameter alpha."""
    if alpha < 0:
        raise ArgumentError("alpha must be >= 0")
    return float(v_w_samples(mu, kappa, np.array([alpha]))[0])


def v_o(mu, kappa, alpha):
    """Produced oil volume at front parameter alpha."""
    if alpha < 0:
        raise ArgumentError("alpha must be >= 0")
    return float(v_o_samples(mu, kappa, np.array([alpha]))[0])


def v_w_prime(mu, kappa, alpha):
    if not alpha > 0:
        raise ArgumentError("alpha must be > 0")
    return float(v_w_prime_samples(mu, kappa, np.array([alpha]))[0])


def v_o_prime(mu, kappa, alpha):
    if not alpha > 0:
        raise ArgumentError("alpha must be > 0")
    return float(v_o_prime_samples(mu, kappa, np.array([alpha]))[0])


def water_cut(mu, kappa, alpha):
    """Instantaneous water fraction of the produced stream at alpha."""
    wp = v_w_prime(mu, kappa, alpha)
    op = v_o_prime(mu, kappa, alpha)
    if wp + op == 0.0:
        raise UndefinedValueError(f"no flow at alpha={alpha}: water cut undefined")
    return wp / (wp + op)


# ---------------------------------------------------------------------------
# displacement characteristic
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DisplacementCurve:
    """Sampled displacement characteristic: water produced vs total produced.

    x must be strictly increasing with x[0] = 0, g nondecreasing with
    g[0] = 0, g <= x, and unit Lipschitz bound between adjacent samples.
    Evaluation interpolates piecewise-linearly and clamps outside [0, v_max],
    which preserves monotonicity and the Lipschitz bound.
    """

    x: np.ndarray
    g: np.ndarray
    alpha_max: float
    kappa: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "kappa", check_kappa(self.kappa))
        object.__setattr__(self, "alpha_max", float(self.alpha_max))
        if not self.alpha_max > 0:
            raise ArgumentError("alpha_max must be > 0")
        if x.ndim != 1 or x.shape != g.shape or x.size < 2:
            raise ArgumentError("curve needs matching 1-d arrays of >= 2 samples")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(g))):
            raise InternalConsistencyError("curve samples must be finite")
        scale = max(float(x[-1]), 1.0)
        slack = 1e-12 * scale
        if x[0] != 0.0 or abs(g[0]) > slack:
            raise InternalConsistencyError("curve must start at (0, 0)")
        dx = np.diff(x)
        dg = np.diff(g)
        if np.any(dx <= 0):
            raise InternalConsistencyError("total volume must be strictly increasing")
        if np.any(dg < -slack):
            raise InternalConsistencyError("produced water must be nondecreasing")
        if np.any(dg > dx * (1.0 + LIPSCHITZ_RTOL) + slack):
            raise InternalConsistencyError("curve violates the unit Lipschitz bound")
        if np.any(g > x + slack):
            raise InternalConsistencyError("produced water exceeds total volume")

    @property
    def v_max(self):
        return float(self.x[-1])

    @property
    def g_max(self):
        return float(self.g[-1])

    def __call__(self, s):
        return np.interp(s, self.x, self.g)

    def to_rows(self):
        return np.column_stack([self.x, self.g])


def build_curve(mu, kappa, alpha_max, n_samples):
    """Sample the displacement characteristic on a uniform alpha grid.

    The measure must be nonzero with support inside [0, alpha_max]; the
    resulting curve carries (alpha_max, kappa) so it is self-describing for
    the inversion step.
    """
    kappa = check_kappa(kappa)
    if n_samples < 2:
        raise ArgumentError("need at least 2 curve samples")
    if mu.is_zero:
        raise ArgumentError("zero measure has no displacement characteristic")
    if mu.support_sup > alpha_max:
        raise ArgumentError(
            f"measure support (sup {mu.support_sup}) exceeds alpha_max={alpha_max}"
        )
    alphas = np.linspace(0.0, alpha_max, n_samples)
    vw = v_w_samples(mu, kappa, alphas)
    vo = v_o_samples(mu, kappa, alphas)
    return DisplacementCurve(x=vw + vo, g=vw, alpha_max=alpha_max, kappa=kappa)


def endpoint_data(mu, kappa, alpha_max):
    """(V_w, V_o, V_w') at alpha_max from the two global moments.

    V_w  = (1+kappa) alpha_max^2 / (2 kappa) I_{-1} - (1+kappa)/(2 kappa) I_1
    V_o  = I_1
    V_w' = (1+kappa) alpha_max / kappa * I_{-1}
    """
    kappa = check_kappa(kappa)
    if mu.support_sup > alpha_max:
        raise ArgumentError("measure support exceeds alpha_max")
    i_inv = moment(mu, -1)
    i_one = moment(mu, 1)
    vw = (1.0 + kappa) / (2.0 * kappa) * (alpha_max * alpha_max * i_inv - i_one)
    vwp = (1.0 + kappa) * alpha_max / kappa * i_inv
    return vw, i_one, vwp


def curve_readoff(curve, paper_literal=False):
    """(V_w(alpha_max), V_w'(alpha_max)) read off the curve endpoint.

    The derivative uses

        V_w' = [2 V_w + (1+kappa)/kappa (v_max - V_w)] / alpha_max

    whose division by alpha_max follows from the endpoint moment formulas
    (and is required dimensionally).  paper_literal=True drops that division
    for comparison runs; it is not usable for recovery.
    """
    if not curve.v_max > 0:
        raise ArgumentError("degenerate curve: v_max must be > 0")
    vw = curve.g_max
    vo = curve.v_max - vw
    vwp = 2.0 * vw + (1.0 + curve.kappa) / curve.kappa * vo
    if not paper_literal:
        vwp /= curve.alpha_max
    return vw, vwp
