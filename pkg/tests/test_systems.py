import math

import numpy as np
import pytest

from riskctl.errors import ParameterError
from riskctl.systems import (STORMWATER_PARAMS, combined_sewer_outflow,
                             match_moments, pedagogical_curves,
                             pedagogical_disturbance, pump_rate,
                             storm_sewer_outflow)


class TestThermostat:
    def test_dynamics_closed_form(self, thermostat):
        a = math.exp(-(5.0 / 60.0) / 4.0)
        x = np.array([[20.0]])
        got0 = thermostat.dynamics(x, 0.0, 0.0)[0, 0]
        assert got0 == pytest.approx(a * 20.0 + (1 - a) * 32.0, abs=1e-12)
        assert got0 == pytest.approx(20.2474, abs=5e-5)
        got1 = thermostat.dynamics(x, 1.0, 0.0)[0, 0]
        assert got1 == pytest.approx(a * 20.0 + (1 - a) * 12.4, abs=1e-12)
        assert got1 == pytest.approx(19.8433, abs=5e-5)

    def test_band_cost(self, thermostat):
        assert thermostat.stage_cost(np.array([[20.5]]), 0.0)[0] == -0.5
        assert thermostat.stage_cost(np.array([[22.0]]), 0.7)[0] == 1.0
        assert thermostat.terminal_cost(np.array([[22.0]]))[0] == 1.0

    def test_grids(self, thermostat):
        axis = thermostat.state_grid.axes[0]
        assert axis[0] == 18.0 and axis[-1] == 23.0 and axis.size == 51
        assert thermostat.controls.tolist() == pytest.approx(
            [0.1 * k for k in range(11)])
        assert thermostat.horizon == 12

    def test_disturbance_moments(self, thermostat):
        mean, var, skew = thermostat.disturbance.moments()
        assert mean == pytest.approx(0.0, abs=1e-6)
        assert skew > 0  # right-skewed
        assert var > 0


class TestStormwater:
    def test_outflow_zero_at_outlet(self):
        p = STORMWATER_PARAMS
        levels = np.array([[p["z_cs"][0], p["z_cs"][1]]])
        assert combined_sewer_outflow(levels)[0] == pytest.approx(0.0, abs=1e-12)
        # and below the outlet
        assert combined_sewer_outflow(np.array([[1.0, 2.0]]))[0] == pytest.approx(
            0.0, abs=1e-12)

    def test_max_cso_rate_tank1(self):
        # orifice formula: cd * pi * r^2 * sqrt(2 g (k_max - z))
        expected = 0.61 * math.pi * 0.25**2 * math.sqrt(2 * 32.2 * 2.5)
        per_outlet = combined_sewer_outflow(np.array([[5.5, 0.0]]))[0] / 3
        assert per_outlet == pytest.approx(expected, abs=1e-12)
        assert per_outlet == pytest.approx(1.52, abs=5e-3)

    def test_flows_monotone_and_capped(self):
        levels = np.linspace(0.0, 7.0, 71)
        q = storm_sewer_outflow(levels)
        assert np.all(np.diff(q) >= -1e-12)
        q_max = 0.61 * math.pi * (1 / 3) ** 2 * math.sqrt(2 * 32.2 * 6.0)
        assert q[-1] == pytest.approx(q_max, abs=1e-12)
        assert np.all(q <= q_max + 1e-12)

    def test_pump_cases(self):
        # ramp midpoint, ramp top, and the too-low-to-pump case
        assert pump_rate(np.array([0.0, 1.0]), 1.0) == pytest.approx(5.0)
        assert pump_rate(np.array([0.0, 1.0 + 1 / 12]), 1.0) == pytest.approx(10.0)
        assert pump_rate(np.array([0.5, 3.0]), -1.0) == pytest.approx(0.0)
        assert pump_rate(np.array([3.0, 0.5]), 1.0) == pytest.approx(0.0)
        assert pump_rate(np.array([2.0, 2.0]), -1.0) == pytest.approx(-10.0)

    def test_pump_continuous_across_ramp(self):
        eps = 1 / 12
        for u in (-1.0, -0.5, 0.5, 1.0):
            grid = np.linspace(1.0 - 2 * eps, 1.0 + 2 * eps, 201)
            rates = np.array([
                pump_rate(np.array([lvl, lvl]), u) for lvl in grid])
            # no jump bigger than the local slope allows
            assert np.abs(np.diff(rates)).max() < abs(u) * 10.0 / (2 * eps) * (
                grid[1] - grid[0]) * 1.5

    def test_cost_units(self, stormwater):
        x = np.array([[5.5, 7.0]])
        q = combined_sewer_outflow(x)[0]
        assert stage_equal(stormwater.stage_cost(x, 0.0)[0], q * 300.0 * 0.01)

    def test_disturbance_moments(self, stormwater):
        mean, var, skew = stormwater.disturbance.moments()
        assert mean == pytest.approx(4.0, abs=1e-6)
        assert var == pytest.approx(1.2, abs=1e-6)
        assert skew == pytest.approx(0.72, abs=1e-6)

    def test_grids(self, stormwater):
        ax1, ax2 = stormwater.state_grid.axes
        assert ax1[-1] == 5.5 and ax2[-1] == 7.0
        assert stormwater.controls.tolist() == [-1.0, 0.0, 1.0]
        assert stormwater.horizon == 48


def stage_equal(a, b):
    return a == pytest.approx(b, rel=1e-12)


class TestMatchMoments:
    def test_exact_moments(self):
        table = match_moments(np.linspace(-1, 1, 8), 0.0, 0.2, 0.3)
        mean, var, skew = table.moments()
        assert mean == pytest.approx(0.0, abs=1e-9)
        assert var == pytest.approx(0.2, abs=1e-9)
        assert skew == pytest.approx(0.3, abs=1e-9)

    def test_infeasible_targets_rejected(self):
        with pytest.raises(Exception):
            match_moments(np.linspace(-1, 1, 8), 0.9, 0.2, 0.3)


class TestPedagogical:
    def test_disturbance_standardized(self):
        w = np.array(pedagogical_disturbance())
        assert w.mean() == pytest.approx(0.0, abs=1e-12)
        assert (w**2).mean() == pytest.approx(1.0, abs=1e-12)
        assert (w**3).mean() == pytest.approx(-0.5, abs=1e-2)

    def test_mean_curve(self):
        u = np.linspace(0, 0.25, 26)
        rows = pedagogical_curves(u, [0.0], [1.0])
        for row in rows:
            assert row["mean"] == pytest.approx(
                2 * row["u"] ** 2 + 1, abs=1e-9)

    def test_risk_neutral_argmin_at_zero(self):
        rows = pedagogical_curves(np.linspace(0, 0.25, 101), [0.0], [1.0])
        ce = [r["ce_0"] for r in rows]
        assert int(np.argmin(ce)) == 0

    def test_gamma5_argmin(self):
        u = np.linspace(0, 0.25, 101)
        rows = pedagogical_curves(u, [5.0], [1.0])
        ce = [r["ce_5"] for r in rows]
        star = u[int(np.argmin(ce))]
        assert abs(star - 5.0 / 22.0) <= u[1] - u[0]

    def test_variance_tradeoff_exists(self):
        rows = pedagogical_curves([0.0, 0.05], [0.0], [1.0])
        assert rows[1]["variance"] < rows[0]["variance"]

    def test_cvar_one_equals_mean(self):
        rows = pedagogical_curves(np.linspace(0, 0.25, 26), [0.0], [1.0])
        for row in rows:
            assert row["cvar_1"] == pytest.approx(row["mean"], abs=1e-9)

    def test_u_range_checked(self):
        with pytest.raises(ParameterError):
            pedagogical_curves([0.3], [0.0], [1.0])
