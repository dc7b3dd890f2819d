import numpy as np
import pytest

from riskctl.errors import InputError, ModelError
from riskctl.model import (DisturbanceTable, Grid, ValueTable, clamp_state,
                           derived_bounds, interpolate, interpolate_many,
                           nearest_node_indices)

import toys


class TestGrid:
    def test_validation(self):
        with pytest.raises(ModelError):
            Grid(([0.0],))
        with pytest.raises(ModelError):
            Grid(([0.0, 0.0, 1.0],))
        with pytest.raises(ModelError):
            Grid(([0.0, np.inf],))

    def test_nodes_order(self):
        g = Grid(([0.0, 1.0], [10.0, 20.0, 30.0]))
        nodes = g.nodes()
        assert nodes.shape == (6, 2)
        assert nodes[0].tolist() == [0.0, 10.0]
        assert nodes[-1].tolist() == [1.0, 30.0]


class TestDisturbanceTable:
    def test_validation(self):
        with pytest.raises(InputError):
            DisturbanceTable([0.0, 1.0], [0.6, 0.6])
        with pytest.raises(InputError):
            DisturbanceTable([0.0], [-1.0])

    def test_moments(self):
        t = DisturbanceTable([0.0, 2.0], [0.5, 0.5])
        mean, var, skew = t.moments()
        assert mean == 1.0 and var == 1.0 and skew == 0.0


class TestInterpolation:
    def test_exact_at_nodes(self, rng):
        g = Grid((np.sort(rng.uniform(0, 1, 5)), np.sort(rng.uniform(0, 1, 4))))
        vals = rng.normal(size=g.shape)
        table = ValueTable(0, g.axes, vals)
        for i in range(5):
            for j in range(4):
                pt = [g.axes[0][i], g.axes[1][j]]
                assert interpolate(table, pt) == pytest.approx(
                    vals[i, j], abs=1e-12)

    def test_linear_1d(self):
        table = ValueTable(0, (np.array([0.0, 1.0]),), np.array([0.0, 10.0]))
        assert interpolate(table, [0.25]) == pytest.approx(2.5)

    def test_bilinear_center(self):
        table = ValueTable(0, (np.array([0.0, 1.0]), np.array([0.0, 1.0])),
                           np.array([[0.0, 0.0], [10.0, 10.0]]))
        assert interpolate(table, [0.5, 0.5]) == pytest.approx(5.0)

    def test_bounded_by_cell_corners(self, rng):
        g = Grid((np.linspace(0, 1, 6), np.linspace(-1, 1, 5)))
        vals = rng.normal(size=g.shape)
        table = ValueTable(0, g.axes, vals)
        pts = rng.uniform([-0.5, -1.5], [1.5, 1.5], size=(200, 2))
        out = interpolate_many(table, pts)
        assert np.all(out >= vals.min() - 1e-12)
        assert np.all(out <= vals.max() + 1e-12)

    def test_clamps_outside_box(self):
        table = ValueTable(0, (np.array([0.0, 1.0]),), np.array([3.0, 7.0]))
        assert interpolate(table, [-5.0]) == pytest.approx(3.0)
        assert interpolate(table, [99.0]) == pytest.approx(7.0)


class TestClampState:
    def test_stormwater_upper(self, stormwater):
        assert clamp_state(stormwater, [6.0, 3.0]).tolist() == [5.5, 3.0]

    def test_in_range_unchanged(self, stormwater):
        assert clamp_state(stormwater, [2.0, 3.0]).tolist() == [2.0, 3.0]

    def test_lower(self, stormwater):
        assert clamp_state(stormwater, [-0.1, -0.1]).tolist() == [0.0, 0.0]


class TestDerivedBounds:
    def test_thermostat(self, thermostat):
        # stage cost max(x-21, 20-x) spans [-0.5, 2] on the 18..23 grid
        grid = thermostat.state_grid.axes[0]
        sweep = np.maximum(grid - 21.0, 20.0 - grid)
        assert sweep.min() == pytest.approx(-0.5)
        assert sweep.max() == pytest.approx(2.0)
        b_lo, a_hi = derived_bounds(thermostat)
        assert b_lo == pytest.approx(13 * -0.5)
        assert a_hi == pytest.approx(13 * 2.5)

    def test_zero_cost(self):
        m = toys.make_zero_cost()
        assert derived_bounds(m) == (0.0, 0.0)

    def test_single_step(self):
        m = toys.table_model([[[0]], [[1]]], [[-1.0], [1.0]], [-1.0, 1.0],
                             [1.0], horizon=1)
        b_lo, a_hi = derived_bounds(m)
        assert b_lo == -2.0 and a_hi == 4.0


class TestNearestNode:
    def test_rounding(self):
        axis = np.array([0.0, 1.0, 2.0])
        got = nearest_node_indices(axis, [-3.0, 0.4, 0.6, 1.49, 5.0])
        assert got.tolist() == [0, 0, 1, 1, 2]
