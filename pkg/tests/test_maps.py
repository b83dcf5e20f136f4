import math

import numpy as np
import pytest

from pushfold import (
    DivergenceError,
    Duffing,
    GridSpec,
    Logistic,
    Oscillator,
    Pendulum,
    TableMap,
    analytic_derivative,
    eval_map,
    integrate_ivp,
    logistic_iterate,
    oscillator_map,
    sample_map,
)
from pushfold.maps import step_count


class TestLogisticIterate:
    def test_single_step_at_half(self):
        assert logistic_iterate(3.9, 1, 0.5) == 0.975

    def test_zero_is_fixed(self):
        assert logistic_iterate(3.9, 3, 0.0) == 0.0

    def test_rate_two_fixed_point(self):
        assert logistic_iterate(2.0, 1, 0.5) == 0.5

    def test_matches_explicit_composition(self):
        x = 0.37
        y = 3.9 * x * (1 - x)
        y = 3.9 * y * (1 - y)
        y = 3.9 * y * (1 - y)
        assert logistic_iterate(3.9, 3, 0.37) == y

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_state_outside_unit_interval(self, bad):
        with pytest.raises(ValueError):
            logistic_iterate(3.9, 1, bad)

    def test_bad_rate_and_count(self):
        with pytest.raises(ValueError):
            logistic_iterate(4.5, 1, 0.5)
        with pytest.raises(ValueError):
            logistic_iterate(3.9, 0, 0.5)


class TestOscillatorMap:
    def test_phase_folding_value(self):
        # gain*x + amplitude*cos(omega*(time + x)) at the reference point
        expected = 2.0 + 2.0 * math.cos(6.0 * 3.0)
        assert oscillator_map(1.0, 2.0, 6.0, 1.0, 2.0) == pytest.approx(expected, abs=1e-12)

    def test_zero_amplitude_is_linear(self):
        assert oscillator_map(1.0, 0.0, 6.0, 1.0, 3.0) == 3.0

    def test_zero_phase(self):
        assert oscillator_map(1.0, 2.0, 6.0, 0.0, 0.0) == 2.0

    def test_vectorized(self):
        xs = np.array([2.0, 3.0, 4.0])
        ys = oscillator_map(1.0, 2.0, 6.0, 1.0, xs)
        assert ys.shape == xs.shape
        assert ys[0] == oscillator_map(1.0, 2.0, 6.0, 1.0, 2.0)


class TestIntegrateIvp:
    def test_pendulum_equilibrium(self):
        sys = Pendulum(alpha=0.0, beta=2.0)
        y, v = integrate_ivp(sys, 0.0, 0.0, 18.0, 0.09)
        assert y == 0.0 and v == 0.0

    def test_duffing_origin_equilibrium(self):
        sys = Duffing(alpha=0.0, beta=5.0)
        y, v = integrate_ivp(sys, 0.0, 0.0, 5.0, 5.0 / 300.0)
        assert y == 0.0 and v == 0.0

    def test_duffing_energy_conservation(self):
        sys = Duffing(alpha=0.0, beta=5.0)
        y, v = integrate_ivp(sys, 0.0, 1.0, 5.0, 5.0 / 300.0)
        assert abs(0.5 * v * v + y ** 4 - 0.5) < 1e-4

    def test_energy_drift_across_speeds(self):
        # relative drift of 0.5 v^2 + y^4 stays below 1e-3 on [1, 5]
        sys = Duffing(alpha=0.0, beta=5.0)
        phis = np.linspace(1.0, 5.0, 41)
        y, v = integrate_ivp(sys, np.zeros_like(phis), phis, 5.0, 5.0 / 300.0)
        e0 = 0.5 * phis ** 2
        e1 = 0.5 * v ** 2 + y ** 4
        assert np.max(np.abs(e1 - e0) / e0) < 1e-3

    def test_non_integer_step_count_lands_on_t_final(self):
        # 1.0 / 0.3 -> 4 steps of 0.25; check against a direct 4-step run
        sys = Pendulum(alpha=0.0, beta=2.0)
        a = integrate_ivp(sys, 0.0, 1.0, 1.0, 0.3)
        b = integrate_ivp(sys, 0.0, 1.0, 1.0, 0.25)
        assert a == b

    def test_step_count_rule(self):
        # exact divisions are not inflated by float noise; fractional
        # ones round the step down to fit
        assert step_count(5.0, 5.0 / 300.0) == 300
        assert step_count(18.0, 18.0 / 200.0) == 200
        assert step_count(1.0, 0.1) == 10  # 1/0.1 = 10.000000000000002
        assert step_count(1.0, 0.3) == 4
        assert step_count(0.05, 1.0) == 1

    def test_deterministic(self):
        sys = Pendulum(alpha=0.0, beta=2.0)
        runs = {integrate_ivp(sys, 0.0, 1.7, 18.0, 0.09) for _ in range(3)}
        assert len(runs) == 1

    def test_divergence_reports_time(self):
        sys = Duffing(alpha=0.0, beta=5.0)
        with pytest.raises(DivergenceError) as exc:
            integrate_ivp(sys, 0.0, 1e200, 10.0, 0.5)
        assert 0.0 < exc.value.t <= 10.0

    def test_array_matches_scalar(self):
        sys = Duffing(alpha=0.0, beta=5.0)
        ys, vs = integrate_ivp(sys, np.zeros(3), np.array([1.0, 2.0, 3.0]),
                               5.0, 5.0 / 300.0)
        y1, v1 = integrate_ivp(sys, 0.0, 2.0, 5.0, 5.0 / 300.0)
        assert ys[1] == y1 and vs[1] == v1


class TestEvalMap:
    def test_logistic_third_iterate(self):
        m = Logistic(alpha=0.0, beta=1.0, rate=3.9, iterations=3)
        assert eval_map(m, 0.5) == logistic_iterate(3.9, 3, 0.5)

    def test_oscillator(self):
        m = Oscillator(alpha=2.0, beta=4.0, gain=1.0, amplitude=2.0,
                       omega=6.0, time=1.0)
        assert eval_map(m, 2.0) == oscillator_map(1.0, 2.0, 6.0, 1.0, 2.0)

    def test_table_linear_interpolation(self):
        m = TableMap.from_samples([0.0, 1.0], [0.0, 1.0])
        assert eval_map(m, 0.5) == 0.5

    def test_outside_domain(self):
        m = TableMap.from_samples([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            eval_map(m, 1.5)

    def test_ode_variant_projects_position(self):
        m = Duffing(alpha=0.0, beta=5.0, t_final=5.0, step=5.0 / 300.0)
        y, _ = integrate_ivp(m, 0.0, 2.5, 5.0, 5.0 / 300.0)
        assert eval_map(m, 2.5) == y


class TestSampleMap:
    def test_table_identity_grid(self, identity_map):
        assert np.array_equal(identity_map.xs, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert np.array_equal(identity_map.ys, identity_map.xs)

    def test_grid_is_uniform_with_exact_endpoints(self):
        m = Logistic(alpha=0.0, beta=1.0, rate=3.9, iterations=3)
        sm = sample_map(m, GridSpec(400))
        assert sm.xs[0] == 0.0 and sm.xs[-1] == 1.0
        spacing = np.diff(sm.xs)
        assert np.all(np.abs(spacing - 1.0 / 400) < 1e-15)

    def test_logistic_grid_range(self):
        # The analytic supremum of the third iterate is 0.975, attained
        # at off-grid preimages of 0.5; the 401-point grid max is a
        # frozen deterministic value a few 1e-6 below it.
        m = Logistic(alpha=0.0, beta=1.0, rate=3.9, iterations=3)
        sm = sample_map(m, GridSpec(400))
        assert sm.g_min == 0.0
        assert abs(sm.g_max - 0.9749964387318727) < 1e-12
        assert 0.0 < 0.975 - sm.g_max < 5e-6

    def test_duffing_range_matches_reference(self):
        m = Duffing(alpha=0.0, beta=5.0, t_final=5.0, step=5.0 / 300.0)
        sm = sample_map(m, GridSpec(300))
        assert abs(sm.g_min - (-1.3015)) < 1e-2
        assert abs(sm.g_max - 1.6717) < 1e-2

    def test_deterministic(self):
        m = Pendulum(alpha=0.0, beta=1.99, t_final=18.0, step=0.09)
        a = sample_map(m, GridSpec(200))
        b = sample_map(m, GridSpec(200))
        assert np.array_equal(a.ys, b.ys)

    def test_grid_spec_minimum(self):
        with pytest.raises(ValueError):
            GridSpec(3)


class TestAnalyticDerivative:
    def test_logistic_chain_rule(self):
        m = Logistic(alpha=0.0, beta=1.0, rate=3.9, iterations=3)
        d = analytic_derivative(m)
        x = 0.31
        h = 1e-7
        fd = (logistic_iterate(3.9, 3, x + h) - logistic_iterate(3.9, 3, x - h)) / (2 * h)
        assert d(x) == pytest.approx(fd, rel=1e-5)

    def test_oscillator(self):
        m = Oscillator(alpha=2.0, beta=4.0, gain=1.0, amplitude=2.0,
                       omega=6.0, time=1.0)
        d = analytic_derivative(m)
        x = 2.7
        h = 1e-7
        fd = (eval_map(m, x + h) - eval_map(m, x - h)) / (2 * h)
        assert d(x) == pytest.approx(fd, rel=1e-5)

    def test_none_for_sampled_variants(self):
        assert analytic_derivative(Duffing(alpha=0.0, beta=5.0)) is None
        assert analytic_derivative(TableMap.from_samples([0, 1], [0, 1])) is None


class TestTableMap:
    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            TableMap.from_samples([0.0, 0.5, 0.5, 1.0], [0.0, 1.0, 2.0, 3.0])

    def test_rejects_bad_domain(self):
        with pytest.raises(ValueError):
            TableMap(alpha=0.0, beta=2.0,
                     xs=np.array([0.0, 1.0]), ys=np.array([0.0, 1.0]))
