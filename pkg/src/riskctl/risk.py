"""Risk functionals on finite distributions and on Monte Carlo sample sets.

Exact evaluation (exponential utility, CVaR) operates on finite
distributions given as atom/probability lists.  Empirical estimation
(VaR, CVaR, expected exceedance) operates on sample arrays.  All
functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, InputError, ParameterError

__all__ = [
    "FiniteDistribution",
    "CostSampleSet",
    "EmpiricalStats",
    "exponential_utility",
    "cvar_exact",
    "var_estimate",
    "cvar_estimate",
    "empirical_stats",
    "certainty_equivalent",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class FiniteDistribution:
    """A finitely supported cost distribution: list of (value, probability)."""

    atoms: tuple[tuple[float, float], ...]

    def __init__(self, atoms):
        atoms = tuple((float(v), float(p)) for v, p in atoms)
        if not atoms:
            raise InputError("distribution needs at least one atom")
        probs = np.array([p for _, p in atoms])
        if (probs < 0).any():
            raise InputError("atom probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise InputError(f"atom probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "atoms", atoms)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    def mean(self) -> float:
        return float(self.values @ self.probabilities)

    def variance(self) -> float:
        v, p = self.values, self.probabilities
        return float(((v - v @ p) ** 2) @ p)

    def shifted(self, offset: float) -> "FiniteDistribution":
        return FiniteDistribution((v + offset, p) for v, p in self.atoms)


@dataclass(frozen=True)
class CostSampleSet:
    """Simulated cost realizations plus the seed that produced them."""

    samples: np.ndarray
    seed: int

    def __init__(self, samples, seed):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0:
            raise InputError("sample set must be non-empty")
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise InputError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "seed", seed)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class EmpiricalStats:
    """Summary statistics of a cost sample set at one or more CVaR levels."""

    mean: float
    variance: float
    var_at: Mapping[float, float] = field(default_factory=dict)
    cvar_at: Mapping[float, float] = field(default_factory=dict)
    exceedance_at: Mapping[float, float] = field(default_factory=dict)


def _as_samples(samples) -> np.ndarray:
    if isinstance(samples, CostSampleSet):
        return samples.samples
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise InputError("sample set must be non-empty")
    return arr


def exponential_utility(dist: FiniteDistribution, theta: float,
                        lower_bound_b: float = 0.0) -> float:
    """Certainty equivalent of a cost under the exponential risk map.

    Evaluates  b + (-2/theta) * log sum_k p_k exp((-theta/2) (z_k - b))
    for theta < 0, where b is a lower bound on the atoms.  The inner sum
    is always computed with a max-shift (log-sum-exp), so the result is
    finite for any finite theta and invariant to the choice of b.
    """
    theta = float(theta)
    if theta >= 0:
        raise ParameterError(f"theta must be negative, got {theta}")
    v = dist.values
    p = dist.probabilities
    if (v < lower_bound_b).any():
        raise DomainError(
            f"atom below stated lower bound {lower_bound_b}: {v.min()}"
        )
    y = (-theta / 2.0) * (v - lower_bound_b)
    m = y.max()
    total = float(p @ np.exp(y - m))
    return float(lower_bound_b + (-2.0 / theta) * (m + math.log(total)))


def cvar_exact(dist: FiniteDistribution, alpha: float) -> float:
    """Exact CVaR of a finite distribution at level alpha in (0, 1].

    Uses the variational form  inf_s ( s + (1/alpha) E max(Z - s, 0) );
    for a finite distribution the infimum is attained at an atom value,
    so the scan runs over the atom values (plus 0).
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    v = dist.values
    p = dist.probabilities
    candidates = np.append(v, 0.0)
    best = math.inf
    for s in candidates:
        obj = s + (p @ np.maximum(v - s, 0.0)) / alpha
        if obj < best:
            best = obj
    return float(best)


def var_estimate(samples, alpha: float) -> float:
    """Empirical VaR: the left-side (1-alpha) quantile of the samples.

    Convention: with the samples sorted ascending, returns z_(k) for
    k = max(1, ceil((1-alpha) n)), i.e. inf{z : F_hat(z) >= 1-alpha}.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    z = np.sort(_as_samples(samples))
    n = z.size
    k = max(1, math.ceil((1.0 - alpha) * n))
    return float(z[k - 1])


def cvar_estimate(samples, alpha: float) -> float:
    """Empirical CVaR via the sample variational form.

    Minimizes  s + (1/alpha) mean(max(z - s, 0))  over s in the sample
    values; the sample objective is piecewise linear with breakpoints at
    the samples, so this scan is exact.  When alpha * n is an integer the
    result equals the average of the top ceil(alpha * n) order statistics.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    z = np.sort(_as_samples(samples))
    # suffix sums give mean(max(z - s, 0)) in O(1) per candidate s = z[i]
    n = z.size
    suffix = np.concatenate([np.cumsum(z[::-1])[::-1], [0.0]])
    idx = np.arange(n)
    excess = (suffix[idx] - (n - idx) * z[idx]) / n
    objective = z + excess / alpha
    return float(objective.min())


def empirical_stats(samples, alphas: Sequence[float]) -> EmpiricalStats:
    """Mean, unbiased variance, and per-level VaR/CVaR/exceedance."""
    z = _as_samples(samples)
    if z.size < 2:
        raise InputError("variance needs at least two samples")
    mean = float(z.mean())
    variance = float(z.var(ddof=1))
    var_at, cvar_at, exceedance_at = {}, {}, {}
    for alpha in alphas:
        a = float(alpha)
        if a < 1.0:
            q = var_estimate(z, a)
        else:
            # alpha = 1: CVaR degenerates to the mean; report the min as VaR
            q = float(z.min())
        var_at[a] = q
        exceedance_at[a] = float(np.maximum(z - q, 0.0).mean())
        cvar_at[a] = cvar_estimate(z, a)
    return EmpiricalStats(mean=mean, variance=variance, var_at=var_at,
                          cvar_at=cvar_at, exceedance_at=exceedance_at)


def certainty_equivalent(mean: float, variance: float, gamma: float) -> float:
    """Mean-variance certainty equivalent: mean + gamma * variance."""
    if variance < 0:
        raise DomainError(f"variance must be non-negative, got {variance}")
    if gamma < 0:
        raise ParameterError(f"gamma must be non-negative, got {gamma}")
    return float(mean + gamma * variance)
