"""Small table-driven systems whose optima are enumerable by brute force.

States, controls, and disturbances are all integer-coded: the state grid
is {0, 1, ...}, control k has value k, and disturbance atom k has value
k, so dynamics land exactly on grid nodes and grid DP incurs no
interpolation error against the enumeration oracles.
"""

import numpy as np

from riskctl.model import DisturbanceTable, Grid, SystemModel


def table_model(f_table, stage_costs, terminal_costs, probs,
                horizon, name="toy") -> SystemModel:
    f = np.asarray(f_table, dtype=float)
    stage = np.asarray(stage_costs, dtype=float)
    terminal = np.asarray(terminal_costs, dtype=float)
    n_states, n_controls, n_atoms = f.shape

    def dynamics(x, u, w):
        xi = np.rint(np.asarray(x)[..., 0]).astype(int)
        ui = np.rint(np.asarray(u)).astype(int)
        wi = np.rint(np.asarray(w)).astype(int)
        return f[xi, ui, wi][..., None]

    def stage_cost(x, u):
        xi = np.rint(np.asarray(x)[..., 0]).astype(int)
        ui = np.rint(np.asarray(u)).astype(int)
        return stage[xi, ui]

    def terminal_cost(x):
        xi = np.rint(np.asarray(x)[..., 0]).astype(int)
        return terminal[xi]

    return SystemModel(
        horizon=horizon, dynamics=dynamics, stage_cost=stage_cost,
        terminal_cost=terminal_cost,
        state_grid=Grid((np.arange(n_states, dtype=float),)),
        controls=np.arange(n_controls, dtype=float),
        disturbance=DisturbanceTable(np.arange(n_atoms, dtype=float), probs),
        name=name)


# 3 states x 2 controls x 2 atoms, N = 3: 512 Markov policies
TOY3 = {
    "f": [[[1, 2], [0, 1]],
          [[2, 0], [1, 2]],
          [[0, 1], [2, 0]]],
    "stage": [[0.0, 0.6], [1.0, 0.3], [2.0, 1.1]],
    "terminal": [0.0, 0.5, 2.0],
    "probs": [0.7, 0.3],
    "horizon": 3,
}

# 2 states x 2 controls x 2 atoms, N = 2, integer costs: a_hi = 6
TOY2 = {
    "f": [[[0, 1], [1, 0]],
          [[1, 1], [0, 1]]],
    "stage": [[0.0, 1.0], [2.0, 1.0]],
    "terminal": [0.0, 2.0],
    "probs": [0.6, 0.4],
    "horizon": 2,
}

# deterministic: single disturbance atom, control tree fully enumerable
TOY_DET = {
    "f": [[[1], [2]],
          [[2], [0]],
          [[0], [1]]],
    "stage": [[1.0, 4.0], [2.0, 0.0], [5.0, 1.0]],
    "terminal": [0.0, 3.0, 1.0],
    "probs": [1.0],
    "horizon": 3,
}


def make_toy3():
    return table_model(TOY3["f"], TOY3["stage"], TOY3["terminal"],
                       TOY3["probs"], TOY3["horizon"], name="toy3")


def make_toy2():
    return table_model(TOY2["f"], TOY2["stage"], TOY2["terminal"],
                       TOY2["probs"], TOY2["horizon"], name="toy2")


def make_toy_det():
    return table_model(TOY_DET["f"], TOY_DET["stage"], TOY_DET["terminal"],
                       TOY_DET["probs"], TOY_DET["horizon"], name="toy-det")


def make_zero_cost(horizon=2):
    f = [[[0, 1]], [[1, 0]]]
    return table_model(f, [[0.0], [0.0]], [0.0, 0.0], [0.5, 0.5],
                       horizon, name="zero-cost")


def make_two_outcome():
    """Z' is 0 or 2 with equal probability from every start state, N=1."""
    f = [[[0, 1]], [[0, 1]]]
    return table_model(f, [[0.0], [0.0]], [0.0, 2.0], [0.5, 0.5],
                       1, name="two-outcome")
