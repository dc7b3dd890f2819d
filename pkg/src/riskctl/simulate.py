"""Monte Carlo rollout of solved policies and trade-off statistics.

Every trajectory draws its disturbances from its own counter-based
Philox stream keyed by (seed, trajectory index), so the resulting sample
sets are bit-exact regardless of how the work is chunked across threads.
Controls are looked up at the nearest grid node of the continuous state
(no re-optimization off-grid); this matches tabular deployment and is
recorded in the run manifest as a fidelity knob.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cvar import CvarInnerSolution, initial_budget
from .errors import InputError, ParameterError
from .eu import EuSolution
from .model import SystemModel, nearest_node_indices
from .risk import CostSampleSet, EmpiricalStats, empirical_stats

__all__ = ["simulate_eu", "simulate_cvar", "simulate_markov_policy",
           "tradeoff_table", "TradeoffRow"]


def _trajectory_uniforms(seed: int, n: int, steps: int,
                         jobs: int = 1) -> np.ndarray:
    """Per-trajectory uniforms, row i from Philox keyed by (seed, i)."""
    out = np.empty((n, steps))
    seed = int(seed)

    def fill(lo: int, hi: int):
        for i in range(lo, hi):
            key = (seed << 64) | i
            out[i] = np.random.Generator(np.random.Philox(key=key)).random(steps)

    jobs = max(1, int(jobs))
    if jobs == 1 or n < 2 * jobs:
        fill(0, n)
    else:
        bounds = np.linspace(0, n, jobs + 1).astype(int)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda j: fill(bounds[j], bounds[j + 1]),
                          range(jobs)))
    return out


def _atom_indices(model: SystemModel, uniforms: np.ndarray) -> np.ndarray:
    cum = model.disturbance.cumulative()
    idx = np.searchsorted(cum, uniforms, side="right")
    return np.minimum(idx, model.disturbance.support.size - 1)


def _nearest_state_nodes(axes, states: np.ndarray) -> tuple[np.ndarray, ...]:
    return tuple(nearest_node_indices(ax, states[:, i])
                 for i, ax in enumerate(axes))


def simulate_markov_policy(model: SystemModel, policy_indices, x0, n: int,
                           seed: int, jobs: int = 1) -> CostSampleSet:
    """n independent rollouts under a tabular state-feedback policy."""
    if n < 1:
        raise ParameterError(f"trajectory count must be >= 1, got {n}")
    uniforms = _trajectory_uniforms(seed, n, model.horizon, jobs)
    atoms = _atom_indices(model, uniforms)
    support = model.disturbance.support
    axes = model.state_grid.axes

    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    states = np.tile(x0, (n, 1))
    z = np.zeros(n)
    for t in range(model.horizon):
        node = _nearest_state_nodes(axes, states)
        u = model.controls[policy_indices[t][node]]
        z += np.asarray(model.stage_cost(states, u), dtype=float)
        states = model.step(states, u, support[atoms[:, t]])
    z += np.asarray(model.terminal_cost(states), dtype=float)
    return CostSampleSet(samples=z, seed=seed)


def simulate_eu(model: SystemModel, solution: EuSolution, x0, n: int,
                seed: int, jobs: int = 1) -> CostSampleSet:
    """n independent rollouts under the greedy EU policy from x0."""
    return simulate_markov_policy(model, solution.policy.indices, x0, n,
                                  seed, jobs)


def simulate_cvar(model: SystemModel, inner: CvarInnerSolution, alpha: float,
                  x0, n: int, seed: int, jobs: int = 1) -> CostSampleSet:
    """n independent rollouts of the augmented CVaR policy from x0.

    The budget starts at s*_{alpha, x0}, evolves exactly, and only the
    control lookup snaps to the nearest augmented node.
    """
    if n < 1:
        raise ParameterError(f"trajectory count must be >= 1, got {n}")
    uniforms = _trajectory_uniforms(seed, n, model.horizon, jobs)
    atoms = _atom_indices(model, uniforms)
    support = model.disturbance.support
    axes = inner.state_axes
    s_axis = inner.s_axis

    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    states = np.tile(x0, (n, 1))
    budgets = np.full(n, initial_budget(inner, alpha, x0))
    z = np.zeros(n)
    for t in range(model.horizon):
        node = _nearest_state_nodes(axes, states)
        s_node = nearest_node_indices(s_axis, budgets)
        u = model.controls[inner.policy[t][node + (s_node,)]]
        c = np.asarray(model.stage_cost(states, u), dtype=float)
        z += c
        budgets -= c - model.cost_lower
        states = model.step(states, u, support[atoms[:, t]])
    z += np.asarray(model.terminal_cost(states), dtype=float)
    return CostSampleSet(samples=z, seed=seed)


@dataclass(frozen=True)
class TradeoffRow:
    parameter: float
    stats: EmpiricalStats


def tradeoff_table(sample_sets: Mapping[float, CostSampleSet],
                   alphas: Sequence[float] | None) -> list[TradeoffRow]:
    """One row of empirical statistics per swept parameter, sorted."""
    if not sample_sets:
        raise InputError("need at least one sample set")
    alphas = list(alphas) if alphas is not None else []
    rows = []
    for param in sorted(sample_sets):
        stats = empirical_stats(sample_sets[param], alphas)
        rows.append(TradeoffRow(parameter=float(param), stats=stats))
    return rows
