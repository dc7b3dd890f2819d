"""Risk-neutral baseline DP and the closed-form CVaR upper bound.

The baseline minimizes the expected translated cost E(Z'), which is the
quantity the upper bound  b_lo + (1/alpha) J'(x)  is built from.  It is a
standalone expectation recursion rather than a theta -> 0 limit of the
exponential-utility solver, so baseline error is not conflated with
limit error.
"""

from __future__ import annotations

import numpy as np

from ._cache import TransitionCache
from .errors import ParameterError
from .model import PolicyTable, SystemModel, ValueTable

__all__ = ["solve_risk_neutral", "cvar_upper_bound"]


def solve_risk_neutral(model: SystemModel,
                       cache: TransitionCache | None = None
                       ) -> tuple[list[ValueTable], PolicyTable]:
    """Expectation DP on the translated costs c', c_N' (values >= 0)."""
    cache = cache or TransitionCache(model)
    axes = model.state_grid.axes
    shape = model.state_grid.shape
    n = model.horizon
    stage = cache.stage - model.cost_lower
    p = cache.probs

    tables = [None] * (n + 1)
    flat_next = cache.terminal - model.cost_lower
    tables[n] = ValueTable(n, axes, flat_next.reshape(shape))
    policy_idx = [None] * n
    for t in range(n - 1, -1, -1):
        per_u = np.stack([
            stage[iu] + p @ cache.next_values(iu, flat_next)
            for iu in range(model.controls.size)])
        best = per_u.argmin(axis=0)
        flat_next = per_u[best, np.arange(cache.n_nodes)]
        tables[t] = ValueTable(t, axes, flat_next.reshape(shape))
        policy_idx[t] = best.astype(np.int16).reshape(shape)

    policy = PolicyTable(axes=axes, indices=policy_idx,
                         controls=model.controls)
    return tables, policy


def cvar_upper_bound(jprime: ValueTable, alpha: float,
                     b_lower: float) -> ValueTable:
    """Elementwise bound b_lo + (1/alpha) J'(x) on the CVaR optimum."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    return ValueTable(jprime.t, jprime.axes,
                      b_lower + jprime.values / alpha)
