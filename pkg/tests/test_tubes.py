"""Discrete tube-system model: interface law, breakthroughs, debits."""

import math

import numpy as np
import pytest

from tubeflood.errors import ArgumentError
from tubeflood.forward import v_o_samples, v_w_samples
from tubeflood.tubes import (
    PumpHistory,
    TubeSystem,
    breakthrough_threshold,
    interface_position,
    reparam_xi,
    simulate,
)

from helpers import random_pump


class TestInterfacePosition:
    def test_initial(self):
        assert interface_position(1.0, 0.5, 0.0) == 0.0

    def test_at_threshold(self):
        assert interface_position(1.0, 0.5, 0.75) == 1.0

    def test_partial(self):
        expected = (2.0 - math.sqrt(4.0 - 0.75)) / 0.5
        assert interface_position(2.0, 0.5, 0.75) == pytest.approx(expected, abs=1e-15)

    def test_saturates_beyond_threshold(self):
        assert interface_position(1.0, 0.5, 100.0) == 1.0

    def test_negative_pumped_volume(self):
        with pytest.raises(ArgumentError):
            interface_position(1.0, 0.5, -0.1)


class TestBreakthroughThreshold:
    def test_values(self):
        assert breakthrough_threshold(1.0, 0.5) == 0.75
        assert breakthrough_threshold(2.0, 0.5) == 3.0
        assert breakthrough_threshold(1.0, 0.999) == pytest.approx(0.9995)

    def test_positive_length_required(self):
        with pytest.raises(ArgumentError):
            breakthrough_threshold(0.0, 0.5)


class TestPumpHistory:
    def test_constant_integral(self):
        pump = PumpHistory.constant(2.0)
        assert pump.F_at(3.0) == 6.0
        assert pump.F_at(0.0) == 0.0

    def test_piecewise_integral(self):
        pump = PumpHistory((0.0, 1.0, 2.0), (1.0, 0.0, 2.0))
        assert pump.F_at(0.5) == 0.5
        assert pump.F_at(1.7) == 1.0  # zero-rate plateau
        assert pump.F_at(3.0) == 3.0

    def test_inverse_earliest_time(self):
        pump = PumpHistory((0.0, 1.0, 2.0), (1.0, 0.0, 2.0))
        # the value 1.0 is first reached at t=1 and held through the plateau
        assert pump.F_inverse(1.0) == 1.0
        assert pump.F_inverse(2.0) == 2.5
        assert pump.F_inverse(0.0) == 0.0

    def test_inverse_unreachable(self):
        pump = PumpHistory((0.0, 1.0), (1.0, 0.0))
        assert pump.F_inverse(2.0) == math.inf

    def test_validation(self):
        with pytest.raises(ArgumentError):
            PumpHistory((1.0,), (1.0,))
        with pytest.raises(ArgumentError):
            PumpHistory((0.0, 0.0), (1.0, 1.0))
        with pytest.raises(ArgumentError):
            PumpHistory((0.0,), (-1.0,))
        with pytest.raises(ArgumentError):
            PumpHistory((0.0, 1.0), (1.0,))

    def test_round_trip_random(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            pump = random_pump(rng, total_f=10.0)
            value = rng.uniform(0.0, 8.0)
            t = pump.F_inverse(value)
            assert pump.F_at(t) == pytest.approx(value, rel=1e-13, abs=1e-13)


class TestTubeSystem:
    def test_sorted_on_construction(self):
        sys = TubeSystem(((3.0, 1.0), (1.0, 2.0)))
        assert sys.tubes == ((1.0, 2.0), (3.0, 1.0))

    def test_equal_lengths_merged(self):
        sys = TubeSystem(((1.0, 1.0), (1.0, 2.0), (2.0, 1.0)))
        assert sys.tubes == ((1.0, 3.0), (2.0, 1.0))

    def test_empty_rejected(self):
        with pytest.raises(ArgumentError):
            TubeSystem(())

    def test_as_measure(self):
        sys = TubeSystem(((1.0, 1.0), (2.0, 1.0)))
        mu = sys.as_measure()
        assert mu.atoms == ((1.0, 1.0), (2.0, 1.0))


class TestSimulate:
    def setup_method(self):
        self.sys = TubeSystem(((1.0, 1.0), (2.0, 1.0)))
        self.pump = PumpHistory.constant(1.0)

    def test_two_tube_closed_form(self):
        t = np.array([0.0, 0.75, 3.0])
        res = simulate(self.sys, 0.5, self.pump, t)
        l2 = (2.0 - math.sqrt(4.0 - 2.0 * 0.5 * 0.75)) / 0.5
        assert res.v_o[1] == pytest.approx(1.0 + l2, abs=1e-12)
        assert res.v_w[1] == pytest.approx(0.0, abs=1e-12)
        assert res.breakthrough_times[0] == pytest.approx(0.75, abs=1e-15)
        assert res.breakthrough_times[1] == pytest.approx(3.0, abs=1e-15)
        # both tubes full: total pore volume
        assert res.v_o[2] == pytest.approx(3.0, abs=1e-12)

    def test_initial_state(self):
        res = simulate(self.sys, 0.5, self.pump, np.array([0.0]))
        assert res.v_o[0] == 0.0
        assert res.v_w[0] == 0.0

    def test_static_pump_is_valid(self):
        pump = PumpHistory.constant(0.0)
        res = simulate(self.sys, 0.5, pump, np.linspace(0, 5, 11))
        assert np.all(res.v_o == 0.0)
        assert np.all(res.interfaces == 0.0)
        assert np.all(np.isinf(res.breakthrough_times))

    def test_grid_validation(self):
        with pytest.raises(ArgumentError):
            simulate(self.sys, 0.5, self.pump, np.array([1.0, 2.0]))
        with pytest.raises(ArgumentError):
            simulate(self.sys, 0.5, self.pump, np.array([]))

    def test_monotone_outputs(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            n = int(rng.integers(2, 8))
            sys = TubeSystem(tuple(zip(rng.uniform(0.5, 5, n), rng.uniform(0.5, 2, n))))
            pump = random_pump(rng, total_f=40.0)
            res = simulate(sys, 0.5, pump, np.linspace(0, 8, 200))
            assert np.all(np.diff(res.v_w) >= -1e-12)
            assert np.all(np.diff(res.v_o) >= -1e-12)
            assert np.all(np.diff(res.interfaces, axis=0) >= -1e-12)
            assert np.all(res.interfaces <= sys.lengths[None, :] * (1 + 1e-15))

    def test_breakthrough_ordering(self):
        rng = np.random.default_rng(33)
        for _ in range(10):
            n = int(rng.integers(2, 10))
            L = np.sort(rng.uniform(0.5, 6.0, n))
            L += np.arange(n) * 1e-6  # force distinct lengths
            sys = TubeSystem(tuple(zip(L, rng.uniform(0.5, 2, n))))
            pump = random_pump(rng, total_f=100.0)
            res = simulate(sys, 0.5, pump, np.array([0.0]))
            assert np.all(np.diff(res.breakthrough_times) > 0)

    def test_breakthrough_law_exact(self):
        rng = np.random.default_rng(55)
        for _ in range(10):
            n = int(rng.integers(1, 8))
            sys = TubeSystem(tuple(zip(rng.uniform(0.5, 4, n), rng.uniform(0.5, 2, n))))
            pump = random_pump(rng, total_f=50.0)
            res = simulate(sys, 0.5, pump, np.array([0.0]))
            thr = breakthrough_threshold(sys.lengths, 0.5)
            for tk, th in zip(res.breakthrough_times, thr):
                assert pump.F_at(tk) == pytest.approx(th, abs=1e-12 * max(1.0, th))


class TestReparametrization:
    def test_xi_values(self):
        pump = PumpHistory.constant(1.0)
        assert reparam_xi(pump, 0.5, 0.75) == pytest.approx(1.0, abs=1e-15)
        assert reparam_xi(pump, 0.5, 0.0) == 0.0
        assert reparam_xi(pump, 0.5, 3.0) == pytest.approx(2.0, abs=1e-15)

    def test_discrete_continuum_equivalence(self):
        # tube volumes equal the continuum curves evaluated at xi(t)
        sys = TubeSystem(((1.0, 1.5), (1.7, 0.7), (2.4, 1.1)))
        mu = sys.as_measure()
        pump = PumpHistory((0.0, 1.0), (0.5, 2.0))
        t = np.linspace(0.0, 6.0, 400)
        res = simulate(sys, 0.5, pump, t)
        xi = reparam_xi(pump, 0.5, t)
        assert np.max(np.abs(v_w_samples(mu, 0.5, xi) - res.v_w)) <= 1e-8
        assert np.max(np.abs(v_o_samples(mu, 0.5, xi) - res.v_o)) <= 1e-8

    def test_pump_invariance_of_curve(self):
        # two drive schedules spanning the same F range trace one curve
        sys = TubeSystem(((1.0, 1.0), (2.0, 1.0)))
        pump1 = PumpHistory.constant(1.0)
        pump2 = PumpHistory((0.0, 0.5, 2.0), (3.0, 0.25, 1.5))
        t1 = np.linspace(0.0, 4.0, 300)
        f_values = pump1.F_at(t1)
        t2 = np.array([pump2.F_inverse(f) for f in f_values])
        res1 = simulate(sys, 0.5, pump1, t1)
        res2 = simulate(sys, 0.5, pump2, t2)
        assert np.max(np.abs(res1.v_w - res2.v_w)) <= 1e-10
        assert np.max(np.abs(res1.v_o - res2.v_o)) <= 1e-10
