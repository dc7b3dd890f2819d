"""Grid-based risk-averse stochastic optimal control.

Solvers for exponential-utility and CVaR optimal control on finite
horizons, a risk-neutral baseline with a closed-form CVaR upper bound,
Monte Carlo policy evaluation, and risk-sensitive safe sets.
"""

__version__ = "0.1.0"

from .cvar import (CvarInnerSolution, CvarValue, Trajectory, build_s_grid,
                   cvar_inner_backup, deploy_augmented_policy, outer_minimize,
                   solve_cvar_inner)
from .errors import (DomainError, InputError, InstabilityError,
                     MemoryBudgetError, ModelError, ParameterError,
                     RiskctlError)
from .eu import EuSolution, eu_backup, solve_eu, stable_theta_probe
from .model import (DisturbanceTable, Grid, PolicyTable, SystemModel,
                    ValueTable, clamp_state, derived_bounds, interpolate)
from .neutral import cvar_upper_bound, solve_risk_neutral
from .risk import (CostSampleSet, EmpiricalStats, FiniteDistribution,
                   certainty_equivalent, cvar_estimate, cvar_exact,
                   empirical_stats, exponential_utility, var_estimate)
from .safesets import export_mask_csv, nesting_check, sublevel_mask
from .simulate import simulate_cvar, simulate_eu, tradeoff_table
from .systems import (make_stormwater, make_thermostat, pedagogical_curves,
                      pump_rate)

__all__ = [name for name in dir() if not name.startswith("_")]
