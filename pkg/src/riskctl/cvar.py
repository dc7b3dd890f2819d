"""CVaR-optimal control via budget-state augmentation.

The minimization of CVaR does not satisfy a recursion on the state space
alone, so the state is augmented with a running budget s that decreases
by the translated stage cost c' each step.  The inner problem
J(x, s) = inf_pi E max(Z' - s, 0) is solved by backward induction on the
(state x budget) grid; the level-alpha optimum is then recovered by an
outer scan  min_s ( s + (1/alpha) J0(x, s) )  over the non-negative part
of the budget grid, shifted back to original cost units.

Budget arguments below -a_hi are evaluated by the exact linear extension
J(x, s) = J(x, -a_hi) + (-a_hi - s): every J table has slope -1 in s on
s <= 0, so the extension is exact (a plain clamp would not be).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._cache import TransitionCache
from .errors import MemoryBudgetError, ModelError, ParameterError
from .model import (Grid, SystemModel, ValueTable, interpolation_weights,
                    nearest_node_indices)

__all__ = ["CvarInnerSolution", "CvarValue", "Trajectory", "build_s_grid",
           "cvar_inner_backup", "solve_cvar_inner", "outer_minimize",
           "initial_budget", "deploy_augmented_policy"]

DEFAULT_MEMORY_BUDGET = 8 << 30      # bytes
_TIE_TOL = 1e-9


@dataclass
class CvarInnerSolution:
    """Inner-problem tables J_t over (state grid x budget grid)."""

    model: SystemModel
    s_grid: Grid
    j_tables: list[np.ndarray]        # index t = 0..N, shape (*state, ns)
    policy: list[np.ndarray]          # index t = 0..N-1, int16, same shape

    @property
    def s_axis(self) -> np.ndarray:
        return self.s_grid.axes[0]

    @property
    def state_axes(self) -> tuple[np.ndarray, ...]:
        return self.model.state_grid.axes

    def j_table(self, t: int) -> ValueTable:
        return ValueTable(t, self.state_axes + (self.s_axis,),
                          self.j_tables[t])


@dataclass
class CvarValue:
    """Level-alpha optimal values and minimizing budgets on the state grid."""

    alpha: float
    values: ValueTable                # J*_alpha = b_lower + W*_alpha
    budgets: np.ndarray               # s*_{alpha, x}


@dataclass
class Trajectory:
    states: np.ndarray                # (N+1, d)
    budgets: np.ndarray               # (N+1,)
    controls: np.ndarray              # (N,)
    cost: float                       # realized Z in original units


def build_s_grid(model: SystemModel, resolution: int) -> Grid:
    """Budget grid on [-a_hi, a_hi] with 0 and a_hi as exact nodes.

    `resolution` is the number of intervals on [0, a_hi], where the outer
    minimization scans; the negative half uses half that node density.
    """
    resolution = int(resolution)
    if resolution < 2:
        raise ParameterError(f"s-grid resolution must be >= 2, got {resolution}")
    a_hi = model.cost_span_a
    if a_hi <= 0:
        raise ModelError("zero-cost model: budget range [-a, a] is degenerate")
    pos = np.linspace(0.0, a_hi, resolution + 1)
    neg = np.linspace(-a_hi, 0.0, math.ceil(resolution / 2) + 1)
    return Grid((np.concatenate([neg[:-1], pos]),))


def default_s_resolution(model: SystemModel, target_spacing: float = 0.5) -> int:
    """Resolution that gives at most `target_spacing` between budget nodes."""
    a_hi = model.cost_span_a
    if a_hi <= 0:
        raise ModelError("zero-cost model: budget range [-a, a] is degenerate")
    return max(2, math.ceil(a_hi / target_spacing))


def _budget_eval(rows: np.ndarray, s_axis: np.ndarray,
                 targets: np.ndarray) -> np.ndarray:
    """Evaluate per-row budget profiles at per-row target budgets.

    rows has shape (..., ns) holding values at the s_axis nodes; targets
    has the same leading shape.  Targets below the axis use the exact
    slope -1 extension; targets above clamp to the top node.
    """
    lo = s_axis[0]
    t = np.minimum(targets, s_axis[-1])
    below = t < lo
    tc = np.maximum(t, lo)
    idx = np.clip(np.searchsorted(s_axis, tc, side="right") - 1,
                  0, s_axis.size - 2)
    frac = (tc - s_axis[idx]) / (s_axis[idx + 1] - s_axis[idx])
    lead = np.take_along_axis(rows, idx, axis=-1)
    trail = np.take_along_axis(rows, idx + 1, axis=-1)
    out = lead * (1.0 - frac) + trail * frac
    if below.any():
        out = np.where(below, rows[..., :1] + (lo - t), out)
    return out


def cvar_inner_backup(model: SystemModel, next_table: ValueTable,
                      x, s: float, u: float) -> float:
    """One augmented backup: E_w J_{t+1}(f(x,u,w), s - c'(x,u)).

    next_table is a J table over (state axes..., s axis); next states are
    clamped into the grid box and evaluated by multilinear interpolation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
    s_axis = next_table.axes[-1]
    state_axes = next_table.axes[:-1]
    cshift = float(np.asarray(model.shifted_stage_cost(x, u)).ravel()[0])
    target = np.array([[float(s) - cshift]])
    total = 0.0
    for w, p in zip(model.disturbance.support,
                    model.disturbance.probabilities):
        nxt = model.step(x, u, w)
        corners, weights = interpolation_weights(state_axes, nxt)
        rows = next_table.values.reshape(-1, s_axis.size)[corners[0]]
        row = weights[0] @ rows
        total += p * float(_budget_eval(row[None, :], s_axis, target)[0, 0])
    return total


def estimate_table_bytes(model: SystemModel, n_s_nodes: int) -> int:
    """Rough memory footprint of the augmented solve (tables + buffers)."""
    m = int(np.prod(model.state_grid.shape))
    n = model.horizon
    j_bytes = (n + 1) * m * n_s_nodes * 8
    pol_bytes = n * m * n_s_nodes * 2
    work = 4 * m * n_s_nodes * 8
    return j_bytes + pol_bytes + work


def solve_cvar_inner(model: SystemModel, s_resolution: int,
                     memory_budget: int = DEFAULT_MEMORY_BUDGET,
                     cache: TransitionCache | None = None
                     ) -> CvarInnerSolution:
    """Backward induction for J_t(x, s) on the augmented grid.

    Control ties break toward the smallest index.  Refuses to run if the
    estimated table memory exceeds `memory_budget`.
    """
    s_grid = build_s_grid(model, s_resolution)
    s_axis = s_grid.axes[0]
    ns = s_axis.size
    required = estimate_table_bytes(model, ns)
    if required > memory_budget:
        raise MemoryBudgetError(required, memory_budget)

    cache = cache or TransitionCache(model)
    m = cache.n_nodes
    n = model.horizon
    state_shape = model.state_grid.shape
    stage_shift = cache.stage - model.cost_lower          # (nu, M)
    terminal_shift = cache.terminal - model.cost_lower    # (M,)

    j_tables = [None] * (n + 1)
    policy = [None] * n
    flat = np.maximum(terminal_shift[:, None] - s_axis[None, :], 0.0)
    j_tables[n] = flat.reshape(*state_shape, ns)

    for t in range(n - 1, -1, -1):
        best_vals = None
        best_idx = None
        for iu in range(model.controls.size):
            targets = s_axis[None, :] - stage_shift[iu][:, None]   # (M, ns)
            acc = np.zeros((m, ns))
            corners = cache.corners[iu]
            weights = cache.weights[iu]
            for k, p in enumerate(cache.probs):
                rows = (flat[corners[k]] * weights[k][:, :, None]).sum(axis=1)
                acc += p * _budget_eval(rows, s_axis, targets)
            if best_vals is None:
                best_vals = acc
                best_idx = np.zeros((m, ns), dtype=np.int16)
            else:
                better = acc < best_vals
                best_vals = np.where(better, acc, best_vals)
                best_idx = np.where(better, np.int16(iu), best_idx)
        flat = best_vals
        j_tables[t] = flat.reshape(*state_shape, ns)
        policy[t] = best_idx.reshape(*state_shape, ns)

    return CvarInnerSolution(model=model, s_grid=s_grid,
                             j_tables=j_tables, policy=policy)


def _scan_budget(objective: np.ndarray, s_values: np.ndarray):
    """Exact min plus the smallest minimizer within float-noise tolerance."""
    m = objective.min(axis=-1)
    tol = _TIE_TOL * (1.0 + np.abs(m))
    hit = objective <= (m + tol)[..., None]
    j = hit.argmax(axis=-1)
    return m, s_values[j]


def outer_minimize(inner: CvarInnerSolution, alpha: float) -> CvarValue:
    """Scan s over the non-negative budget nodes: min s + (1/alpha) J0."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    s_axis = inner.s_axis
    nonneg = s_axis >= 0.0
    s_vals = s_axis[nonneg]
    j0 = inner.j_tables[0][..., nonneg]
    objective = s_vals + j0 / alpha
    w_star, budgets = _scan_budget(objective, s_vals)
    values = ValueTable(0, inner.state_axes,
                        inner.model.lower_bound_b + w_star)
    return CvarValue(alpha=alpha, values=values, budgets=budgets)


def initial_budget(inner: CvarInnerSolution, alpha: float, x0) -> float:
    """Minimizing budget s*_{alpha, x0} for one (possibly off-node) state."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    s_axis = inner.s_axis
    nonneg = s_axis >= 0.0
    s_vals = s_axis[nonneg]
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).reshape(1, -1)
    corners, weights = interpolation_weights(inner.state_axes, x0)
    rows = inner.j_tables[0].reshape(-1, s_axis.size)[corners[0]]
    j0 = weights[0] @ rows
    objective = s_vals + j0[nonneg] / alpha
    _, budget = _scan_budget(objective[None, :], s_vals)
    return float(budget[0])


def deploy_augmented_policy(inner: CvarInnerSolution, alpha: float, x0,
                            rng: np.random.Generator) -> Trajectory:
    """Roll out the augmented policy once from x0 with budget s*_{alpha,x0}.

    The control is looked up at the nearest augmented grid node; the
    budget itself evolves exactly (s <- s - c'(x, u), never snapped).
    """
    model = inner.model
    n = model.horizon
    d = len(inner.state_axes)
    states = np.zeros((n + 1, d))
    budgets = np.zeros(n + 1)
    controls = np.zeros(n)
    states[0] = np.atleast_1d(np.asarray(x0, dtype=float))
    budgets[0] = initial_budget(inner, alpha, states[0])

    cum = model.disturbance.cumulative()
    support = model.disturbance.support
    s_axis = inner.s_axis
    z = 0.0
    for t in range(n):
        x = states[t]
        node = tuple(int(nearest_node_indices(ax, x[i]))
                     for i, ax in enumerate(inner.state_axes))
        s_node = int(nearest_node_indices(s_axis, budgets[t]))
        iu = int(inner.policy[t][node + (s_node,)])
        u = float(model.controls[iu])
        controls[t] = u
        xb = x.reshape(1, -1)
        c = float(np.asarray(model.stage_cost(xb, u)).ravel()[0])
        z += c
        k = min(int(np.searchsorted(cum, rng.random(), side="right")),
                support.size - 1)
        states[t + 1] = model.step(xb, u, support[k])[0]
        budgets[t + 1] = budgets[t] - (c - model.cost_lower)
    z += float(np.asarray(model.terminal_cost(states[-1:])).ravel()[0])
    return Trajectory(states=states, budgets=budgets, controls=controls,
                      cost=z)
