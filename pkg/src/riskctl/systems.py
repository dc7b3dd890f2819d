"""Benchmark systems: thermostatic regulator, two-tank stormwater, and
the one-shot quadratic example.

All physical constants live here.  Dynamics and cost callables broadcast
over leading axes (states are (..., dim) arrays, controls/disturbances
scalars or (...) arrays), which is what the grid solvers and the
vectorized simulator rely on.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import optimize, stats

from .errors import InputError, ParameterError
from .model import DisturbanceTable, Grid, SystemModel
from .risk import FiniteDistribution, cvar_exact

__all__ = [
    "match_moments",
    "make_thermostat",
    "make_stormwater",
    "pump_rate",
    "pedagogical_disturbance",
    "pedagogical_curves",
    "SYSTEM_BUILDERS",
]


def match_moments(support, mean: float, variance: float,
                  skewness: float) -> DisturbanceTable:
    """Probabilities on a fixed support matching three moments exactly.

    Solves min ||p - p0||^2 subject to the four linear moment constraints
    (total mass, mean, central variance, central third moment), seeding
    p0 with Gaussian weights so the corrected solution stays positive for
    reasonable targets.
    """
    support = np.asarray(support, dtype=float).ravel()
    m3 = skewness * variance**1.5
    a = np.vstack([np.ones_like(support), support,
                   (support - mean) ** 2, (support - mean) ** 3])
    b = np.array([1.0, mean, variance, m3])
    p0 = np.exp(-0.5 * (support - mean) ** 2 / variance)
    p0 /= p0.sum()
    p = p0 + a.T @ np.linalg.solve(a @ a.T, b - a @ p0)
    if (p < 0).any():
        raise InputError(
            "support cannot match the requested moments with "
            "non-negative probabilities")
    return DisturbanceTable(support=support, probabilities=p / p.sum())


# ---------------------------------------------------------------------------
# Thermostatic regulator


THERMOSTAT_PARAMS = {
    "b": 32.0,            # temperature shift, deg C
    "capacitance": 2.0,   # kWh / deg C
    "eta": 0.7,           # control efficiency
    "power": 14.0,        # kW
    "resistance": 2.0,    # deg C / kW
    "dt_hours": 5.0 / 60.0,
    "horizon": 12,
    "band": (20.0, 21.0),
}


def _default_thermostat_disturbance() -> DisturbanceTable:
    # right-skewed, zero-mean; the published study shows only the shape
    return match_moments(np.linspace(-0.4, 0.5, 10),
                         mean=0.0, variance=0.05, skewness=0.8)


def make_thermostat(disturbance: DisturbanceTable | None = None) -> SystemModel:
    """Room-temperature regulation with a band-deviation cost.

    x+ = a x + (1 - a)(b - eta R P u) + w with a = exp(-dt / (C R));
    cost max(x - 21, 20 - x) penalizes leaving the comfort band [20, 21].
    """
    p = THERMOSTAT_PARAMS
    a = math.exp(-p["dt_hours"] / (p["capacitance"] * p["resistance"]))
    pull = p["eta"] * p["resistance"] * p["power"]
    lo_band, hi_band = p["band"]

    def dynamics(x, u, w):
        x = np.asarray(x, dtype=float)
        target = p["b"] - pull * np.asarray(u, dtype=float)
        nxt = a * x[..., 0] + (1.0 - a) * target + np.asarray(w, dtype=float)
        return nxt[..., None]

    def stage_cost(x, u):
        x = np.asarray(x, dtype=float)[..., 0]
        return np.maximum(x - hi_band, lo_band - x)

    def terminal_cost(x):
        x = np.asarray(x, dtype=float)[..., 0]
        return np.maximum(x - hi_band, lo_band - x)

    grid = Grid((np.round(np.arange(180, 231) * 0.1, 10),))
    controls = np.round(np.arange(11) * 0.1, 10)
    table = disturbance or _default_thermostat_disturbance()
    return SystemModel(horizon=p["horizon"], dynamics=dynamics,
                       stage_cost=stage_cost, terminal_cost=terminal_cost,
                       state_grid=grid, controls=controls,
                       disturbance=table, name="thermostat")


# ---------------------------------------------------------------------------
# Two-tank stormwater system


STORMWATER_PARAMS = {
    "area": (30000.0, 10000.0),        # ft^2
    "discharge_coeff": 0.61,
    "dt_seconds": 300.0,               # 5 min
    "eps": 1.0 / 12.0,                 # ft
    "gravity": 32.2,                   # ft / s^2
    "level_max": (5.5, 7.0),           # ft
    "horizon": 48,                     # 4 h
    "n_cs_outlets": (3, 1),
    "pump_max": 10.0,                  # cfs
    "r_cs": (0.25, 0.375),             # ft
    "r_storm": 1.0 / 3.0,              # ft
    "z_pump": 1.0,                     # ft
    "z_cs": (3.0, 4.0),                # ft
    "z_storm": 1.0,                    # ft
}


def _orifice_max(radius: float, head: float) -> float:
    p = STORMWATER_PARAMS
    return (p["discharge_coeff"] * math.pi * radius**2
            * math.sqrt(2.0 * p["gravity"] * head))


def _linear_outflow(level, q_max: float, z_outlet: float, level_max: float):
    """Regulated outflow: zero at/below the outlet, linear up to q_max."""
    level = np.asarray(level, dtype=float)
    headroom = np.minimum(level_max - level, level_max - z_outlet)
    return q_max - q_max / (level_max - z_outlet) * headroom


def combined_sewer_outflow(levels) -> np.ndarray:
    """Total combined-sewer discharge rate (cfs) at tank levels (..., 2)."""
    p = STORMWATER_PARAMS
    levels = np.asarray(levels, dtype=float)
    total = 0.0
    for i in range(2):
        q_max = _orifice_max(p["r_cs"][i], p["level_max"][i] - p["z_cs"][i])
        total = total + p["n_cs_outlets"][i] * _linear_outflow(
            levels[..., i], q_max, p["z_cs"][i], p["level_max"][i])
    return total


def storm_sewer_outflow(level2) -> np.ndarray:
    """Storm-sewer discharge rate (cfs) from tank 2."""
    p = STORMWATER_PARAMS
    q_max = _orifice_max(p["r_storm"], p["level_max"][1] - p["z_storm"])
    return _linear_outflow(level2, q_max, p["z_storm"], p["level_max"][1])


def pump_rate(x, u) -> np.ndarray:
    """Signed pump flow (cfs): u >= 0 moves water tank 2 -> tank 1.

    Proportional to u at full head, zero when the source tank is below
    the pumping threshold, with a linear start-up ramp of half-width eps
    around the threshold keeping the rate continuous in the level.
    """
    p = STORMWATER_PARAMS
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    zp, eps, qp = p["z_pump"], p["eps"], p["pump_max"]
    source = np.where(u < 0, x[..., 0], x[..., 1])
    ramp = (u * qp / (2.0 * eps)) * (source + eps - zp)
    full = u * qp
    rate = np.where(source < zp - eps, 0.0,
                    np.where(source <= zp + eps, ramp, full))
    return rate


def make_stormwater(disturbance: DisturbanceTable | None = None) -> SystemModel:
    """Two connected tanks; cost is combined-sewer volume per step.

    Levels integrate net inflow over a 5-minute step and are clamped to
    the tank tops; the stage cost converts discharge rate times step
    length into hundreds of cubic feet.
    """
    p = STORMWATER_PARAMS
    a1, a2 = p["area"]
    dt = p["dt_seconds"]

    def dynamics(x, u, w):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        q_pump = pump_rate(x, u)
        q_cso1 = p["n_cs_outlets"][0] * _linear_outflow(
            x[..., 0], _orifice_max(p["r_cs"][0],
                                    p["level_max"][0] - p["z_cs"][0]),
            p["z_cs"][0], p["level_max"][0])
        q_cso2 = p["n_cs_outlets"][1] * _linear_outflow(
            x[..., 1], _orifice_max(p["r_cs"][1],
                                    p["level_max"][1] - p["z_cs"][1]),
            p["z_cs"][1], p["level_max"][1])
        f1 = (w - q_cso1 + q_pump) / a1
        f2 = (w - q_cso2 - q_pump - storm_sewer_outflow(x[..., 1])) / a2
        return np.stack([x[..., 0] + f1 * dt, x[..., 1] + f2 * dt], axis=-1)

    def stage_cost(x, u):
        return combined_sewer_outflow(x) * dt * 0.01

    def terminal_cost(x):
        return combined_sewer_outflow(x) * dt * 0.01

    grid = Grid((np.round(np.arange(56) * 0.1, 10),
                 np.round(np.arange(71) * 0.1, 10)))
    table = disturbance or match_moments(
        np.arange(2.0, 6.51, 0.5), mean=4.0, variance=1.2, skewness=0.72)
    return SystemModel(horizon=p["horizon"], dynamics=dynamics,
                       stage_cost=stage_cost, terminal_cost=terminal_cost,
                       state_grid=grid, controls=np.array([-1.0, 0.0, 1.0]),
                       disturbance=table, name="stormwater")


# ---------------------------------------------------------------------------
# One-shot quadratic example


@lru_cache(maxsize=4)
def pedagogical_disturbance(n_atoms: int = 1001) -> tuple[float, ...]:
    """Equiprobable atoms of a skewed disturbance (skewness about -0.5).

    Midpoint-quantile discretization of a skew normal, then standardized
    so the atoms have mean 0 and variance 1 exactly.
    """
    def standardized_skewness(shape):
        d = shape / math.sqrt(1.0 + shape**2)
        num = (4.0 - math.pi) / 2.0 * (d * math.sqrt(2.0 / math.pi)) ** 3
        return num / (1.0 - 2.0 * d**2 / math.pi) ** 1.5

    shape = optimize.brentq(lambda a: standardized_skewness(a) + 0.5,
                            -20.0, -0.01)
    q = (np.arange(n_atoms) + 0.5) / n_atoms
    w = stats.skewnorm.ppf(q, shape)
    w = (w - w.mean()) / w.std()
    return tuple(w)


def pedagogical_curves(u_grid, gammas, alphas,
                       n_atoms: int = 1001) -> list[dict]:
    """Mean/variance/certainty-equivalent/CVaR of u^2 + (W + u)^2 per u.

    Mean and variance use the closed forms in the disturbance moments
    (EW = 0, EW^2 = 1, EW^3 = -0.5; EW^4 from the atom table); CVaR is
    exact on the discretized disturbance pushed through the cost.
    """
    u_grid = np.asarray(u_grid, dtype=float).ravel()
    if u_grid.size == 0 or u_grid.min() < 0 or u_grid.max() > 0.25:
        raise ParameterError("u grid must lie in [0, 0.25]")
    w = np.array(pedagogical_disturbance(n_atoms))
    ew3 = -0.5
    ew4 = float((w**4).mean())
    var_w2 = ew4 - 1.0
    probs = np.full(w.size, 1.0 / w.size)

    rows = []
    for u in u_grid:
        mean = 2.0 * u**2 + 1.0
        variance = var_w2 + 4.0 * u**2 + 4.0 * u * ew3
        row = {"u": float(u), "mean": mean, "variance": variance}
        for g in gammas:
            row[f"ce_{g:g}"] = mean + float(g) * variance
        cost = u**2 + (w + u) ** 2
        dist = FiniteDistribution(zip(cost, probs))
        for a in alphas:
            row[f"cvar_{a:g}"] = cvar_exact(dist, float(a))
        rows.append(row)
    return rows


SYSTEM_BUILDERS = {
    "thermostat": make_thermostat,
    "stormwater": make_stormwater,
}
