"""Discrete-time stochastic control systems on rectangular grids.

A SystemModel bundles the horizon, dynamics, stage/terminal costs, the
state grid, the finite control set, and a finite disturbance table.  The
cost bounds used by the solvers are computed at construction time by an
exhaustive sweep over grid states and controls, so the translated cost
c' = c - d_lo is non-negative by construction.

Dynamics and cost callables must broadcast: states are arrays of shape
(..., dim) and controls/disturbances are scalars or arrays of shape
(...).  All grid types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError, ModelError

__all__ = [
    "Grid",
    "DisturbanceTable",
    "SystemModel",
    "ValueTable",
    "PolicyTable",
    "interpolate",
    "interpolate_many",
    "clamp_state",
    "derived_bounds",
    "nearest_node_indices",
]

_PROB_TOL = 1e-12


class Grid:
    """Rectangular grid given by per-axis sorted node coordinates."""

    def __init__(self, axes):
        axes = tuple(np.asarray(ax, dtype=float) for ax in axes)
        if not axes:
            raise ModelError("grid needs at least one axis")
        for ax in axes:
            if ax.ndim != 1 or ax.size < 2:
                raise ModelError("each grid axis needs >= 2 nodes")
            if not np.all(np.isfinite(ax)):
                raise ModelError("grid nodes must be finite")
            if not np.all(np.diff(ax) > 0):
                raise ModelError("grid nodes must be strictly increasing")
        self.axes = axes

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.size for ax in self.axes)

    @property
    def lower(self) -> np.ndarray:
        return np.array([ax[0] for ax in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([ax[-1] for ax in self.axes])

    def nodes(self) -> np.ndarray:
        """All grid nodes as an (n_nodes, ndim) array in C order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def clip(self, points: np.ndarray) -> np.ndarray:
        """Project points (componentwise) onto the grid bounding box."""
        pts = np.asarray(points, dtype=float)
        return np.clip(pts, self.lower, self.upper)

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.shape == other.shape and
                all(np.array_equal(a, b)
                    for a, b in zip(self.axes, other.axes)))

    def __repr__(self):
        return f"Grid(shape={self.shape})"


@dataclass(frozen=True)
class DisturbanceTable:
    """Finite disturbance support with probabilities, constant in (x, u)."""

    support: np.ndarray
    probabilities: np.ndarray

    def __init__(self, support, probabilities):
        support = np.asarray(support, dtype=float).ravel()
        probabilities = np.asarray(probabilities, dtype=float).ravel()
        if support.size != probabilities.size or support.size == 0:
            raise InputError("support and probabilities must match and be non-empty")
        if (probabilities < 0).any():
            raise InputError("disturbance probabilities must be non-negative")
        if abs(probabilities.sum() - 1.0) > _PROB_TOL:
            raise InputError(
                f"disturbance probabilities sum to {probabilities.sum()!r}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probabilities", probabilities)

    def moments(self) -> tuple[float, float, float]:
        """(mean, variance, standardized skewness) of the table."""
        w, p = self.support, self.probabilities
        mean = float(w @ p)
        var = float(((w - mean) ** 2) @ p)
        if var == 0:
            return mean, 0.0, 0.0
        skew = float(((w - mean) ** 3) @ p) / var**1.5
        return mean, var, skew

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.probabilities)


class SystemModel:
    """Finite-horizon stochastic control system on a state grid.

    Stage and terminal cost bounds (cost_lower, cost_upper) are found by
    sweeping all grid nodes and controls at construction; models whose
    costs are unbounded on the grid cannot be represented.
    """

    def __init__(self, horizon: int,
                 dynamics: Callable,
                 stage_cost: Callable,
                 terminal_cost: Callable,
                 state_grid: Grid,
                 controls,
                 disturbance: DisturbanceTable,
                 name: str = ""):
        if horizon < 1:
            raise ModelError("horizon must be a positive integer")
        self.horizon = int(horizon)
        self.dynamics = dynamics
        self.stage_cost = stage_cost
        self.terminal_cost = terminal_cost
        self.state_grid = state_grid
        self.controls = np.asarray(controls, dtype=float).ravel()
        if self.controls.size == 0:
            raise ModelError("control set must be non-empty")
        self.disturbance = disturbance
        self.name = name

        nodes = state_grid.nodes()
        lo, hi = np.inf, -np.inf
        for u in self.controls:
            c = np.asarray(stage_cost(nodes, u), dtype=float)
            if not np.all(np.isfinite(c)):
                raise ModelError(f"stage cost non-finite at control {u}")
            lo = min(lo, float(c.min()))
            hi = max(hi, float(c.max()))
        cn = np.asarray(terminal_cost(nodes), dtype=float)
        if not np.all(np.isfinite(cn)):
            raise ModelError("terminal cost non-finite on the grid")
        self.cost_lower = min(lo, float(cn.min()))
        self.cost_upper = max(hi, float(cn.max()))

    @property
    def lower_bound_b(self) -> float:
        """Lower bound on the cumulative cost: (N+1) * cost_lower."""
        return (self.horizon + 1) * self.cost_lower

    @property
    def cost_span_a(self) -> float:
        """Upper bound on the translated cumulative cost: (N+1)(d_hi - d_lo)."""
        return (self.cost_upper - self.cost_lower) * (self.horizon + 1)

    def shifted_stage_cost(self, states, u):
        """Translated stage cost c' = c - cost_lower (non-negative on grid)."""
        return np.asarray(self.stage_cost(states, u), dtype=float) - self.cost_lower

    def shifted_terminal_cost(self, states):
        return np.asarray(self.terminal_cost(states), dtype=float) - self.cost_lower

    def step(self, states, u, w):
        """One dynamics step with the output clamped into the grid box."""
        nxt = np.asarray(self.dynamics(states, u, w), dtype=float)
        return self.state_grid.clip(nxt)

    def __repr__(self):
        return (f"SystemModel(name={self.name!r}, N={self.horizon}, "
                f"grid={self.state_grid.shape}, "
                f"controls={self.controls.size}, "
                f"atoms={self.disturbance.support.size})")


@dataclass
class ValueTable:
    """Values over grid nodes at one time index."""

    t: int
    axes: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        self.axes = tuple(np.asarray(ax, dtype=float) for ax in self.axes)
        self.values = np.asarray(self.values, dtype=float)
        shape = tuple(ax.size for ax in self.axes)
        if self.values.shape != shape:
            raise InputError(
                f"value array shape {self.values.shape} != grid shape {shape}")


@dataclass
class PolicyTable:
    """Per-time-step arrays of control indices over grid nodes."""

    axes: tuple[np.ndarray, ...]
    indices: list[np.ndarray]
    controls: np.ndarray

    def __post_init__(self):
        n_controls = self.controls.size
        for arr in self.indices:
            if arr.min() < 0 or arr.max() >= n_controls:
                raise InputError("policy index outside the control set")

    def control_values(self, t: int) -> np.ndarray:
        return self.controls[self.indices[t]]


def clamp_state(model: SystemModel, state) -> np.ndarray:
    """Componentwise projection of a state onto the grid bounding box."""
    return model.state_grid.clip(np.asarray(state, dtype=float))


def derived_bounds(model: SystemModel) -> tuple[float, float]:
    """(b_lo, a_hi): cumulative-cost lower bound and translated-cost span."""
    if model.cost_lower > model.cost_upper:
        raise ModelError("cost lower bound exceeds upper bound")
    return model.lower_bound_b, model.cost_span_a


def _axis_weights(axis: np.ndarray, coords: np.ndarray):
    """Left node index and right-node weight for 1-D linear interpolation."""
    x = np.clip(coords, axis[0], axis[-1])
    idx = np.searchsorted(axis, x, side="right") - 1
    idx = np.clip(idx, 0, axis.size - 2)
    frac = (x - axis[idx]) / (axis[idx + 1] - axis[idx])
    return idx, frac


def interpolation_weights(axes, points: np.ndarray):
    """Corner flat-indices and weights for multilinear interpolation.

    points has shape (n, ndim); returns (corners, weights), each of shape
    (n, 2**ndim), where corners index the flattened value array.
    """
    axes = tuple(np.asarray(ax, dtype=float) for ax in axes)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ndim = len(axes)
    if pts.shape[-1] != ndim:
        raise InputError(f"point dimension {pts.shape[-1]} != grid dim {ndim}")
    n = pts.shape[0]
    shape = tuple(ax.size for ax in axes)
    strides = np.array(
        [int(np.prod(shape[d + 1:])) for d in range(ndim)], dtype=np.int64)

    corners = np.zeros((n, 1), dtype=np.int64)
    weights = np.ones((n, 1))
    for d in range(ndim):
        idx, frac = _axis_weights(axes[d], pts[:, d])
        lo = idx * strides[d]
        hi = (idx + 1) * strides[d]
        corners = np.concatenate(
            [corners + lo[:, None], corners + hi[:, None]], axis=1)
        weights = np.concatenate(
            [weights * (1.0 - frac)[:, None], weights * frac[:, None]], axis=1)
    return corners, weights


def interpolate_many(table: ValueTable, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at many points (clamped into the box)."""
    corners, weights = interpolation_weights(table.axes, points)
    flat = table.values.ravel()
    return (flat[corners] * weights).sum(axis=1)


def interpolate(table: ValueTable, point) -> float:
    """Multilinear interpolation at a single point."""
    pt = np.atleast_1d(np.asarray(point, dtype=float)).reshape(1, -1)
    return float(interpolate_many(table, pt)[0])


def nearest_node_indices(axis: np.ndarray, coords) -> np.ndarray:
    """Index of the nearest grid node along one axis (ties go low)."""
    x = np.clip(np.asarray(coords, dtype=float), axis[0], axis[-1])
    idx = np.searchsorted(axis, x, side="right") - 1
    idx = np.clip(idx, 0, axis.size - 2)
    right_closer = (axis[idx + 1] - x) < (x - axis[idx])
    return idx + right_closer.astype(np.int64)
