"""Exception types shared across the solver and CLI layers."""


class RiskctlError(Exception):
    """Base class for all riskctl errors."""


class ParameterError(RiskctlError, ValueError):
    """A risk-aversion or configuration parameter is out of range."""


class DomainError(RiskctlError, ValueError):
    """An input value violates a mathematical precondition."""


class InputError(RiskctlError, ValueError):
    """Malformed user input (empty sample sets, mismatched grids, ...)."""


class ModelError(RiskctlError, ValueError):
    """A system model fails validation (degenerate costs, bad grids, ...)."""


class InstabilityError(RiskctlError, ArithmeticError):
    """A value-iteration intermediate became non-finite.

    Carries enough context to locate the first offending backup: the
    risk-aversion level, the time index, the state node, and the control.
    """

    def __init__(self, theta, t=None, state=None, control=None):
        self.theta = theta
        self.t = t
        self.state = state
        self.control = control
        where = ""
        if t is not None:
            where = f" at t={t}, x={state}, u={control}"
        super().__init__(
            f"non-finite value iterate for theta={theta}{where}; "
            f"|theta| is too large for this cost range in float64"
        )


class MemoryBudgetError(RiskctlError, MemoryError):
    """A solve was refused because its table estimate exceeds the budget."""

    def __init__(self, required_bytes, budget_bytes):
        self.required_bytes = int(required_bytes)
        self.budget_bytes = int(budget_bytes)
        super().__init__(
            f"augmented value tables need {self.required_bytes} bytes but the "
            f"memory budget is {self.budget_bytes} bytes; coarsen the budget "
            f"grid (s resolution) or raise the budget"
        )
