"""Precomputed grid transition data shared by the DP solvers.

For every (control, disturbance atom) pair the next state of every grid
node is fixed, so the multilinear interpolation stencils can be computed
once and reused at every time step.  Within one time step, backups across
grid nodes are independent; they are evaluated as whole-grid array
operations against the immutable next-step table.
"""

from __future__ import annotations

import numpy as np

from .model import SystemModel, interpolation_weights


class TransitionCache:
    """Stencils and stage costs for whole-grid DP backups."""

    def __init__(self, model: SystemModel):
        self.model = model
        grid = model.state_grid
        self.shape = grid.shape
        self.nodes = grid.nodes()                      # (M, d)
        self.n_nodes = self.nodes.shape[0]
        self.terminal = np.asarray(
            model.terminal_cost(self.nodes), dtype=float).ravel()
        self.stage = np.stack([
            np.asarray(model.stage_cost(self.nodes, u), dtype=float).ravel()
            for u in model.controls])                  # (nu, M)
        self.probs = model.disturbance.probabilities   # (K,)

        # corner indices / weights per (control, atom): lists over u of
        # (K, M, 2**d) arrays indexing the flattened next-value table
        self.corners = []
        self.weights = []
        for u in model.controls:
            cs, ws = [], []
            for w in model.disturbance.support:
                nxt = model.step(self.nodes, u, w)
                c, wts = interpolation_weights(grid.axes, nxt)
                cs.append(c)
                ws.append(wts)
            self.corners.append(np.stack(cs))
            self.weights.append(np.stack(ws))

    def next_values(self, iu: int, flat_values: np.ndarray) -> np.ndarray:
        """Interpolated next-step values, shape (K, M), for control iu."""
        return (flat_values[self.corners[iu]] * self.weights[iu]).sum(axis=-1)
