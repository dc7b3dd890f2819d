"""Exponential-utility optimal control by backward value iteration.

Two variants of the recursion are provided.  The raw variant iterates on
the original costs and stabilizes every backup with a max-shift before
exponentiating, so it stays finite for any theta < 0.  The nonnegative
variant follows the classical formulation restricted to the translated
costs c' = c - d_lo >= 0: the expectation of exp((-theta/2) V') is formed
directly, which is exactly the computation whose dynamic range collapses
as |theta| grows.  Comparing the two stability ranges is the point of
keeping both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._cache import TransitionCache
from .errors import InstabilityError, ParameterError
from .model import (PolicyTable, SystemModel, ValueTable, interpolate_many)

__all__ = ["EuSolution", "ProbeResult", "eu_backup", "solve_eu",
           "stable_theta_probe"]

RAW = "raw"
NONNEGATIVE = "nonnegative"
_VARIANTS = (RAW, NONNEGATIVE)


@dataclass
class EuSolution:
    """Value tables (t = 0..N) and greedy policy for one theta."""

    theta: float
    variant: str
    value_tables: list[ValueTable]
    policy: PolicyTable
    b_lower: float

    @property
    def optimal_values(self) -> np.ndarray:
        """Optimal certainty-equivalent cost on the grid, in original units.

        The nonnegative variant iterates on translated costs, so its
        reported value is b_lower + V'_0.
        """
        v0 = self.value_tables[0].values
        if self.variant == NONNEGATIVE:
            return self.b_lower + v0
        return v0


@dataclass
class ProbeResult:
    theta: float
    raw: str
    nonnegative: str


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if theta >= 0:
        raise ParameterError(f"theta must be negative, got {theta}")
    return theta


def eu_backup(model: SystemModel, next_table: ValueTable, theta: float,
              x, u: float) -> float:
    """One stabilized backup: c(x,u) + (-2/theta) log E exp((-theta/2) V+).

    Next-state values come from clamping f(x, u, w) into the grid box and
    interpolating next_table; the inner sum is max-shifted.
    """
    theta = _check_theta(theta)
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
    nxt = np.stack([model.step(x, u, w)[0]
                    for w in model.disturbance.support])
    vals = interpolate_many(next_table, nxt)
    y = (-theta / 2.0) * vals
    m = y.max()
    total = float(model.disturbance.probabilities @ np.exp(y - m))
    c = float(np.asarray(model.stage_cost(x, u)).ravel()[0])
    out = c + (-2.0 / theta) * (m + math.log(total))
    if not math.isfinite(out):
        raise InstabilityError(theta, next_table.t - 1, tuple(x[0]), u)
    return out


def _backup_grid(cache: TransitionCache, iu: int, flat_next: np.ndarray,
                 theta: float, shifted: bool, stage: np.ndarray,
                 t: int) -> np.ndarray:
    """Whole-grid backup for one control; raises on non-finite iterates."""
    vals = cache.next_values(iu, flat_next)            # (K, M)
    y = (-theta / 2.0) * vals
    p = cache.probs
    if shifted:
        m = y.max(axis=0)
        total = p @ np.exp(y - m)
        out = stage + (-2.0 / theta) * (m + np.log(total))
    else:
        with np.errstate(over="ignore"):
            total = p @ np.exp(y)
        if not np.all(np.isfinite(total)):
            bad = int(np.flatnonzero(~np.isfinite(total))[0])
            raise InstabilityError(theta, t, tuple(cache.nodes[bad]),
                                   cache.model.controls[iu])
        out = stage + (-2.0 / theta) * np.log(total)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise InstabilityError(theta, t, tuple(cache.nodes[bad]),
                               cache.model.controls[iu])
    return out


def solve_eu(model: SystemModel, theta: float, variant: str = RAW,
             cache: TransitionCache | None = None) -> EuSolution:
    """Backward recursion for the exponential-utility optimal value.

    Ties in the control minimization break toward the smallest control
    index.  A non-finite intermediate aborts the solve with an
    InstabilityError identifying the offending (t, x, u).
    """
    theta = _check_theta(theta)
    if variant not in _VARIANTS:
        raise ParameterError(f"variant must be one of {_VARIANTS}")
    cache = cache or TransitionCache(model)
    axes = model.state_grid.axes
    shape = model.state_grid.shape
    n = model.horizon

    if variant == NONNEGATIVE:
        stage = cache.stage - model.cost_lower
        terminal = cache.terminal - model.cost_lower
    else:
        stage = cache.stage
        terminal = cache.terminal

    tables = [None] * (n + 1)
    tables[n] = ValueTable(n, axes, terminal.reshape(shape))
    policy_idx = [None] * n
    flat_next = terminal
    for t in range(n - 1, -1, -1):
        per_u = np.stack([
            _backup_grid(cache, iu, flat_next, theta,
                         variant == RAW, stage[iu], t)
            for iu in range(model.controls.size)])
        best = per_u.argmin(axis=0)
        flat_next = per_u[best, np.arange(cache.n_nodes)]
        tables[t] = ValueTable(t, axes, flat_next.reshape(shape))
        policy_idx[t] = best.astype(np.int16).reshape(shape)

    policy = PolicyTable(axes=axes, indices=policy_idx,
                         controls=model.controls)
    return EuSolution(theta=theta, variant=variant, value_tables=tables,
                      policy=policy, b_lower=model.lower_bound_b)


def stable_theta_probe(model: SystemModel, theta_list) -> list[ProbeResult]:
    """Solve at each theta in both variants and record stable/unstable."""
    cache = TransitionCache(model)
    results = []
    for theta in theta_list:
        status = {}
        for variant in _VARIANTS:
            try:
                solve_eu(model, theta, variant, cache=cache)
                status[variant] = "stable"
            except InstabilityError:
                status[variant] = "unstable"
        results.append(ProbeResult(theta=float(theta), raw=status[RAW],
                                   nonnegative=status[NONNEGATIVE]))
    return results
