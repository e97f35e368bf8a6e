"""Discrete n-tube displacement model under an arbitrary pressure schedule.

Each tube of length L and section S is filled with oil and flooded from one
end; the water/oil interface position depends on the pump only through the
cumulative drive F(t) = int_0^t c(tau) dtau:

    l(t) = (L - sqrt(L^2 - 2 (1-kappa) F(t))) / (1 - kappa)

until breakthrough at F = (1+kappa) L^2 / 2, after which the tube produces
water.  Pressure schedules are piecewise-constant in c(t), so F is
piecewise-linear and breakthrough times invert exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ArgumentError
from .measures import Measure, check_kappa


@dataclass(frozen=True)
class TubeSystem:
    """Parallel tubes (L_j, S_j), sorted by length on construction.

    Tubes of exactly equal length are merged by summing their sections;
    every observable of the system is unchanged by the merge.
    """

    tubes: tuple

    def __post_init__(self):
        raw = [(float(L), float(S)) for L, S in self.tubes]
        if not raw:
            raise ArgumentError("tube system must contain at least one tube")
        for L, S in raw:
            if not (L > 0 and math.isfinite(L)):
                raise ArgumentError(f"tube length must be finite and > 0, got {L}")
            if not (S > 0 and math.isfinite(S)):
                raise ArgumentError(f"tube section must be finite and > 0, got {S}")
        raw.sort(key=lambda t: t[0])
        merged = [raw[0]]
        for L, S in raw[1:]:
            if L == merged[-1][0]:
                merged[-1] = (L, merged[-1][1] + S)
            else:
                merged.append((L, S))
        object.__setattr__(self, "tubes", tuple(merged))

    @cached_property
    def lengths(self):
        return np.array([L for L, _ in self.tubes])

    @cached_property
    def sections(self):
        return np.array([S for _, S in self.tubes])

    @property
    def n_tubes(self):
        return len(self.tubes)

    @property
    def pore_volume(self):
        return float(np.sum(self.lengths * self.sections))

    def as_measure(self):
        """The atomic tube-length measure of this system."""
        return Measure(atoms=self.tubes)


@dataclass(frozen=True)
class PumpHistory:
    """Piecewise-constant drive c(t) >= 0 with its exact running integral F.

    ``c_values[i]`` holds on [breakpoints[i], breakpoints[i+1]); the last
    value extends to infinity.  F is continuous, nondecreasing and
    piecewise-linear with F(0) = 0.
    """

    breakpoints: tuple
    c_values: tuple

    def __post_init__(self):
        bp = tuple(float(t) for t in self.breakpoints)
        cv = tuple(float(c) for c in self.c_values)
        if len(bp) != len(cv) or not bp:
            raise ArgumentError("need one c value per breakpoint")
        if bp[0] != 0.0:
            raise ArgumentError("first breakpoint must be t = 0")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ArgumentError("breakpoints must be strictly increasing")
        if any(not (c >= 0 and math.isfinite(c)) for c in cv):
            raise ArgumentError("drive values must be finite and >= 0")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "c_values", cv)

    @classmethod
    def constant(cls, c=1.0):
        return cls(breakpoints=(0.0,), c_values=(c,))

    @cached_property
    def _bp(self):
        return np.array(self.breakpoints)

    @cached_property
    def _c(self):
        return np.array(self.c_values)

    @cached_property
    def _cum(self):
        """F at each breakpoint."""
        seg = self._c[:-1] * np.diff(self._bp)
        return np.concatenate(([0.0], np.cumsum(seg)))

    def F_at(self, t):
        """Cumulative pumped volume per unit area at time(s) t >= 0."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise ArgumentError("pump history is defined for t >= 0 only")
        idx = np.clip(np.searchsorted(self._bp, t_arr, side="right") - 1, 0, None)
        out = self._cum[idx] + self._c[idx] * (t_arr - self._bp[idx])
        return float(out) if np.isscalar(t) else out

    def F_inverse(self, value):
        """Earliest time with F(t) = value; inf if the value is never reached."""
        if value <= 0.0:
            return 0.0
        cum = self._cum
        i = int(np.searchsorted(cum, value, side="left"))
        if i < len(cum):
            # cum[i-1] < value <= cum[i], so segment i-1 has positive drive
            return float(self._bp[i - 1] + (value - cum[i - 1]) / self._c[i - 1])
        if self._c[-1] > 0:
            return float(self._bp[-1] + (value - cum[-1]) / self._c[-1])
        return math.inf


@dataclass(frozen=True, eq=False)
class TubeSimResult:
    """Time-domain simulation output.

    interfaces has shape (n_times, n_tubes); v_w and v_o are the cumulative
    produced water and oil volumes; breakthrough_times[k] is when tube k
    (in length order) starts producing water.
    """

    times: np.ndarray
    pumped: np.ndarray
    interfaces: np.ndarray
    v_w: np.ndarray
    v_o: np.ndarray
    breakthrough_times: np.ndarray


def breakthrough_threshold(L, kappa):
    """Pumped volume per unit area at which a tube of length L breaks through."""
    if np.any(np.asarray(L) <= 0):
        raise ArgumentError("tube length must be > 0")
    kappa = check_kappa(kappa)
    return (1.0 + kappa) / 2.0 * L * L


def interface_position(L, kappa, F_val):
    """Interface position in a tube of length L after pumping F_val.

    Clamped to [0, L]; values of F_val at or beyond the breakthrough
    threshold return L (saturated tube).
    """
    kappa = check_kappa(kappa)
    L_arr = np.asarray(L, dtype=float)
    F_arr = np.asarray(F_val, dtype=float)
    if np.any(F_arr < 0):
        raise ArgumentError("pumped volume must be >= 0")
    thr = (1.0 + kappa) / 2.0 * L_arr * L_arr
    disc = L_arr * L_arr - 2.0 * (1.0 - kappa) * np.minimum(F_arr, thr)
    pos = (L_arr - np.sqrt(np.maximum(disc, 0.0))) / (1.0 - kappa)
    out = np.clip(np.where(F_arr >= thr, L_arr, pos), 0.0, L_arr)
    if np.isscalar(L) and np.isscalar(F_val):
        return float(out)
    return out


def reparam_xi(pump, kappa, t):
    """Length parameter xi(t) = sqrt(2 F(t) / (1 + kappa)).

    Maps tube time to the continuum front parameter: the continuum curves
    evaluated at xi(t) reproduce the discrete cumulative volumes.
    """
    kappa = check_kappa(kappa)
    F = pump.F_at(t)
    out = np.sqrt(2.0 * np.asarray(F) / (1.0 + kappa))
    return float(out) if np.isscalar(t) else out


def simulate(sys, kappa, pump, t_grid):
    """Run the tube system under the pump, sampling at t_grid.

    t_grid must be sorted and start at 0.  Breakthrough times are solved
    exactly by inverting the piecewise-linear F; cumulative water uses the
    per-tube telescoped form

        V_w(t) = (1/kappa) sum_j max(F(t) - F(t_j), 0) S_j / L_j

    which matches the segment-by-segment sum over broken-through tubes.
    """
    kappa = check_kappa(kappa)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ArgumentError("t_grid must be a nonempty 1-d array")
    if t[0] != 0.0 or np.any(np.diff(t) < 0):
        raise ArgumentError("t_grid must be sorted and start at 0")

    L = sys.lengths
    S = sys.sections
    F = pump.F_at(t)

    thr = (1.0 + kappa) / 2.0 * L * L
    disc = L[None, :] ** 2 - 2.0 * (1.0 - kappa) * np.minimum(F[:, None], thr[None, :])
    pos = (L[None, :] - np.sqrt(np.maximum(disc, 0.0))) / (1.0 - kappa)
    interfaces = np.clip(
        np.where(F[:, None] >= thr[None, :], L[None, :], pos), 0.0, L[None, :]
    )

    v_o = interfaces @ S
    v_w = np.maximum(F[:, None] - thr[None, :], 0.0) @ (S / L) / kappa
    t_break = np.array([pump.F_inverse(th) for th in thr])

    return TubeSimResult(
        times=t,
        pumped=F,
        interfaces=interfaces,
        v_w=v_w,
        v_o=v_o,
        breakthrough_times=t_break,
    )
