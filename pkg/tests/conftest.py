import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from riskctl.cvar import solve_cvar_inner
from riskctl.neutral import solve_risk_neutral
from riskctl.systems import make_stormwater, make_thermostat

import toys


@pytest.fixture(scope="session")
def thermostat():
    return make_thermostat()


@pytest.fixture(scope="session")
def stormwater():
    return make_stormwater()


@pytest.fixture(scope="session")
def thermostat_rn(thermostat):
    """Risk-neutral value tables and policy (translated costs)."""
    return solve_risk_neutral(thermostat)


@pytest.fixture(scope="session")
def thermostat_inner(thermostat):
    """CVaR inner solution at budget spacing 0.5 (resolution 65)."""
    return solve_cvar_inner(thermostat, 65)


@pytest.fixture(scope="session")
def toy3():
    return toys.make_toy3()


@pytest.fixture(scope="session")
def toy2():
    return toys.make_toy2()


@pytest.fixture(scope="session")
def toy_det():
    return toys.make_toy_det()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def bootstrap_se(samples, statistic, n_boot=200, seed=0):
    """Bootstrap standard error of a statistic of an i.i.d. sample."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    vals = np.empty(n_boot)
    n = len(samples)
    for b in range(n_boot):
        vals[b] = statistic(samples[rng.integers(0, n, size=n)])
    return float(vals.std(ddof=1))
