"""Stability verification, sensitivity statistics and partial-curve ambiguity.

Three experiment families built on the forward/inverse machinery:

* stability: perturb a curve, solve both fixed points and compare the
  sup distance of the solutions against the explicit bound
  (1+kappa)/(2 kappa) (alpha_max + (3+kappa)/(1+kappa)) * sup|G1 - G2|.
* sensitivity: for random atomic measure pairs, the ratio of L1 norms
  c = ||(G1'-G2')/(G1'+G2')|| : ||(F1-F2)/(F1+F2)||, F_j(alpha) = mu_j[0, alpha).
* ambiguity: the explicit measure pairs that agree below a cutoff alpha_0,
  and the measured sup gap between their curves over the total-volume axis.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, InternalConsistencyError
from .forward import (
    build_curve,
    endpoint_data,
    v_o_samples,
    v_w_samples,
    water_cut_samples,
)
from .inverse import solve_fixed_point
from .measures import Measure, check_kappa, moment, random_atoms


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of one stability experiment; v_diff <= bound must hold."""

    delta: float
    v_diff: float
    bound_constant: float
    bound: float
    ratio: float


@dataclass(frozen=True)
class SensitivityRecord:
    """One Monte Carlo trial; c_value is NaN for pairs the filter rejects."""

    seed: int | None
    n1: int
    n2: int
    v1_max: float
    v2_max: float
    accepted: bool
    c_value: float


@dataclass(frozen=True)
class AmbiguityPair:
    """Two measures that coincide below alpha0 but differ in the tail."""

    mu1: Measure
    mu2: Measure
    alpha0: float
    k_factor: float

    def __post_init__(self):
        if not self.alpha0 > 1:
            raise ArgumentError("alpha0 must be > 1")
        if not 0 < self.k_factor < 1 + 1 / self.alpha0:
            raise ArgumentError(
                f"k must lie in (0, 1 + 1/alpha0), got {self.k_factor}"
            )
        below1 = [p for p in self.mu1.pieces if p[1] <= self.alpha0] + [
            a for a in self.mu1.atoms if a[0] < self.alpha0
        ]
        below2 = [p for p in self.mu2.pieces if p[1] <= self.alpha0] + [
            a for a in self.mu2.atoms if a[0] < self.alpha0
        ]
        if below1 != below2:
            raise ArgumentError("measures must agree below alpha0")


def stability_bound(kappa, alpha_max):
    """Explicit stability constant (1+kappa)/(2 kappa) (alpha_max + (3+kappa)/(1+kappa))."""
    kappa = check_kappa(kappa)
    if alpha_max < 0:
        raise ArgumentError("alpha_max must be >= 0")
    return (1.0 + kappa) / (2.0 * kappa) * (alpha_max + (3.0 + kappa) / (1.0 + kappa))


def sinusoidal_perturbation(curve, delta0):
    """Curve with g + delta0 sin(pi x / v_max), trimmed back into the model class.

    The bump is capped wherever the unit slope or monotonicity headroom is
    insufficient, so the result is again a valid displacement curve with
    sup-perturbation at most delta0.
    """
    if not delta0 >= 0:
        raise ArgumentError("delta0 must be >= 0")
    x, g = curve.x, curve.g
    bumped = g + delta0 * np.sin(np.pi * x / curve.v_max)
    # slope cap: g2[i] <= min_{j<=i} g2[j] + (x[i]-x[j]);  then monotone
    capped = x + np.minimum.accumulate(bumped - x)
    monotone = np.maximum.accumulate(capped)
    return type(curve)(x=x, g=monotone, alpha_max=curve.alpha_max, kappa=curve.kappa)


def stability_experiment(curve1, curve2, config=None):
    """Solve both curves and compare against the explicit stability bound.

    The curves must share kappa and alpha_max.  Raises
    InternalConsistencyError if the bound is violated beyond the iteration
    tolerance slack.
    """
    if curve1.kappa != curve2.kappa or curve1.alpha_max != curve2.alpha_max:
        raise ArgumentError("curves must share kappa and alpha_max")
    res1 = solve_fixed_point(curve1, config)
    res2 = solve_fixed_point(curve2, config)

    x_top = min(curve1.v_max, curve2.v_max)
    # sup of the difference of two piecewise-linear graphs is attained at a
    # breakpoint of either (or the range edge)
    xs = np.concatenate([curve1.x, curve2.x, [x_top]])
    xs = np.unique(xs[xs <= x_top])
    delta = float(np.max(np.abs(curve1(xs) - curve2(xs))))

    v_diff = float(np.max(np.abs(res1.v - res2.v)))
    constant = stability_bound(curve1.kappa, curve1.alpha_max)
    bound = constant * delta
    slack = 4.0 * (res1.tol + res2.tol)
    if v_diff > bound * (1.0 + 1e-6) + slack:
        raise InternalConsistencyError(
            f"stability bound violated: |V1-V2| = {v_diff:.6g} > {bound:.6g}"
        )
    return StabilityReport(
        delta=delta,
        v_diff=v_diff,
        bound_constant=constant,
        bound=bound,
        ratio=v_diff / delta if delta > 0 else math.nan,
    )


# ---------------------------------------------------------------------------
# sensitivity constant
# ---------------------------------------------------------------------------

def _jump_aware_alphas(mu, alpha_max, n_grid):
    """Uniform alpha grid refined by atom locations +- one ulp."""
    base = np.linspace(0.0, alpha_max, n_grid)[1:]
    if mu.atoms:
        L = mu._atom_L
        extra = np.concatenate(
            [np.nextafter(L, -np.inf), L, np.nextafter(L, np.inf)]
        )
        base = np.concatenate([base, extra])
    out = np.unique(base)
    return out[(out > 0) & (out <= alpha_max)]


def _counting_cdf(mu, alphas):
    """F(alpha) = mu([0, alpha)): total section of tubes shorter than alpha."""
    if not mu.atoms:
        total = np.zeros_like(alphas)
    else:
        total = mu._prefix[0][np.searchsorted(mu._atom_L, alphas, side="left")]
    for pa, pb, rho in mu.pieces:
        hi = np.clip(alphas, pa, pb)
        total += np.where(alphas > pa, rho * (hi - pa), 0.0)
    return total


def sensitivity_constant(mu1, mu2, kappa, alpha_max, n_grid=2001, seed=None):
    """Ratio of curve-slope disagreement to measure disagreement (L1 norms).

    The numerator samples the water cut of both measures against the shared
    total-volume axis; the denominator compares the counting functions
    F_j(alpha) = mu_j([0, alpha)).  Points where numerator and denominator
    of the pointwise ratios both vanish contribute 0.  The acceptance flag
    records the |V1_max - V2_max| < V1_max/10 filter.
    """
    kappa = check_kappa(kappa)
    if mu1 == mu2:
        raise ArgumentError("identical measures give a 0/0 sensitivity ratio")
    if mu1.is_zero or mu2.is_zero:
        raise ArgumentError("sensitivity requires nonzero measures")
    if max(mu1.support_sup, mu2.support_sup) > alpha_max:
        raise ArgumentError("measure support exceeds alpha_max")

    vw1, vo1, _ = endpoint_data(mu1, kappa, alpha_max)
    vw2, vo2, _ = endpoint_data(mu2, kappa, alpha_max)
    v1_max, v2_max = vw1 + vo1, vw2 + vo2
    accepted = abs(v1_max - v2_max) < v1_max / 10.0

    a1 = _jump_aware_alphas(mu1, alpha_max, n_grid)
    a2 = _jump_aware_alphas(mu2, alpha_max, n_grid)
    x1 = v_w_samples(mu1, kappa, a1) + v_o_samples(mu1, kappa, a1)
    x2 = v_w_samples(mu2, kappa, a2) + v_o_samples(mu2, kappa, a2)
    w1 = water_cut_samples(mu1, kappa, a1)
    w2 = water_cut_samples(mu2, kappa, a2)

    x_top = min(v1_max, v2_max)
    xs = np.concatenate([x1[x1 <= x_top], x2[x2 <= x_top], [0.0, x_top]])
    xs = np.unique(xs)
    g1p = np.interp(xs, x1, w1)
    g2p = np.interp(xs, x2, w2)
    den = g1p + g2p
    num_int = np.divide(np.abs(g1p - g2p), den, out=np.zeros_like(den), where=den > 0)
    numerator = float(np.trapezoid(num_int, xs))

    aus = np.unique(np.concatenate([a1, a2, [0.0]]))
    f1 = _counting_cdf(mu1, aus)
    f2 = _counting_cdf(mu2, aus)
    fden = f1 + f2
    den_int = np.divide(np.abs(f1 - f2), fden, out=np.zeros_like(fden), where=fden > 0)
    denominator = float(np.trapezoid(den_int, aus))
    if denominator == 0.0:
        raise ArgumentError("measures are indistinguishable on the grid")

    return SensitivityRecord(
        seed=seed,
        n1=len(mu1.atoms),
        n2=len(mu2.atoms),
        v1_max=v1_max,
        v2_max=v2_max,
        accepted=accepted,
        c_value=numerator / denominator,
    )


def _mc_trial(trial_seed, kappa, alpha_max, n_grid, n_atoms_range, l_range, s_range):
    rng = np.random.default_rng(trial_seed)
    lo, hi = n_atoms_range
    n1 = int(rng.integers(lo, hi + 1))
    n2 = int(rng.integers(lo, hi + 1))
    mu1 = random_atoms(rng, n1, l_range, s_range)
    mu2 = random_atoms(rng, n2, l_range, s_range)

    vw1, vo1, _ = endpoint_data(mu1, kappa, alpha_max)
    vw2, vo2, _ = endpoint_data(mu2, kappa, alpha_max)
    v1_max, v2_max = vw1 + vo1, vw2 + vo2
    if not abs(v1_max - v2_max) < v1_max / 10.0:
        return SensitivityRecord(
            seed=trial_seed,
            n1=n1,
            n2=n2,
            v1_max=v1_max,
            v2_max=v2_max,
            accepted=False,
            c_value=math.nan,
        )
    rec = sensitivity_constant(mu1, mu2, kappa, alpha_max, n_grid, seed=trial_seed)
    return SensitivityRecord(
        seed=trial_seed,
        n1=n1,
        n2=n2,
        v1_max=v1_max,
        v2_max=v2_max,
        accepted=True,
        c_value=rec.c_value,
    )


def run_mc(
    n_trials,
    seed,
    kappa=0.5,
    alpha_max=10.0,
    n_grid=2001,
    n_atoms_range=(5, 50),
    l_range=(2.5, 10.0),
    s_range=(0.5, 2.0),
    jobs=1,
):
    """Seeded batch of sensitivity trials; records are returned in seed order.

    Trial i uses seed + i, so reruns (and any subset) are reproducible
    regardless of the worker count.
    """
    if n_trials < 1:
        raise ArgumentError("need at least one trial")
    if jobs < 1:
        raise ArgumentError("jobs must be >= 1")
    seeds = [seed + i for i in range(n_trials)]
    args = (kappa, alpha_max, n_grid, n_atoms_range, l_range, s_range)
    if jobs == 1:
        return [_mc_trial(s, *args) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda s: _mc_trial(s, *args), seeds))


def summarize_mc(records):
    """Count and c statistics over the accepted records."""
    cs = np.array([r.c_value for r in records if r.accepted])
    summary = {
        "trials": len(records),
        "accepted": int(cs.size),
        "c_min": float(np.min(cs)) if cs.size else math.nan,
        "c_median": float(np.median(cs)) if cs.size else math.nan,
        "c_max": float(np.max(cs)) if cs.size else math.nan,
    }
    summary["max_c_at_least_5"] = bool(cs.size and summary["c_max"] >= 5.0)
    return summary


# ---------------------------------------------------------------------------
# partial-curve ambiguity
# ---------------------------------------------------------------------------

def ambiguity_pair(alpha0, k_factor):
    """The explicit pair: shared density 1 on [1, alpha0], rescaled tail piece.

    mu1 carries a unit-density tail on [alpha0+1, alpha0+2]; mu2 carries
    density k^2 on [(alpha0+1)/k, (alpha0+2)/k].  Requires
    0 < k < 1 + 1/alpha0 so the rescaled tail stays above alpha0.
    """
    if not alpha0 > 1:
        raise ArgumentError("alpha0 must be > 1")
    if not 0 < k_factor < 1 + 1 / alpha0:
        raise ArgumentError(
            f"k must lie in (0, {1 + 1 / alpha0:g}) for alpha0={alpha0}, got {k_factor}"
        )
    shared = (1.0, float(alpha0), 1.0)
    mu1 = Measure(pieces=(shared, (alpha0 + 1.0, alpha0 + 2.0, 1.0)))
    mu2 = Measure(
        pieces=(
            shared,
            ((alpha0 + 1.0) / k_factor, (alpha0 + 2.0) / k_factor, k_factor**2),
        )
    )
    return AmbiguityPair(mu1=mu1, mu2=mu2, alpha0=alpha0, k_factor=k_factor)


def curve_gap(pair, kappa, alpha_probe, n_grid=2001):
    """Sup |G1(x) - G2(x)| over total volumes reachable with alpha <= alpha_probe.

    Both curves are built with a shared alpha_max covering both supports;
    the comparison is between graphs over the common total-volume axis, the
    only parameterization-free comparison.
    """
    kappa = check_kappa(kappa)
    if not 0 <= alpha_probe <= pair.alpha0:
        raise ArgumentError("probe must lie in [0, alpha0]")
    alpha_max = max(pair.mu1.support_sup, pair.mu2.support_sup)
    c1 = build_curve(pair.mu1, kappa, alpha_max, n_grid)
    c2 = build_curve(pair.mu2, kappa, alpha_max, n_grid)
    probe = np.array([alpha_probe])
    top1 = float(
        v_w_samples(pair.mu1, kappa, probe)[0] + v_o_samples(pair.mu1, kappa, probe)[0]
    )
    top2 = float(
        v_w_samples(pair.mu2, kappa, probe)[0] + v_o_samples(pair.mu2, kappa, probe)[0]
    )
    x_top = min(top1, top2)
    xs = np.concatenate([c1.x, c2.x, [x_top]])
    xs = np.unique(xs[xs <= x_top])
    return float(np.max(np.abs(c1(xs) - c2(xs))))


def ambiguity_series_estimate(pair, kappa, alpha_probe):
    """Leading-order estimate of the curve gap at the probe.

    The tail kernel expands as (1-kappa^2) alpha^2 / (2y) + O(alpha^4), so
    the oil-volume mismatch is about (1+kappa) alpha^2 / 2 times the
    difference of the tails' harmonic moments.
    """
    kappa = check_kappa(kappa)
    d_inv = abs(
        moment(pair.mu1, -1, pair.alpha0) - moment(pair.mu2, -1, pair.alpha0)
    )
    return (1.0 + kappa) * alpha_probe**2 / 2.0 * d_inv
