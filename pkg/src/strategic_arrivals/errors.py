"""Exception hierarchy shared by the solvers."""


class StrategicArrivalsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(StrategicArrivalsError, ValueError):
    """An argument lies outside the domain of the function."""


class DivergentIntegralError(StrategicArrivalsError, ArithmeticError):
    """The kernel integral does not converge (e.g. n_v = v at v = 0)."""


class SingularityError(StrategicArrivalsError, ArithmeticError):
    """A formula divides by a vanishing weight derivative or weight."""


class InfeasiblePricingError(StrategicArrivalsError, ValueError):
    """A grade pricing function cannot serve every customer type."""


class InfeasibleThresholdsError(StrategicArrivalsError, ValueError):
    """Thresholds imply a non-increasing price ladder."""


class NoEquilibriumError(StrategicArrivalsError, RuntimeError):
    """The threshold system has no ordered solution for the given prices."""

    def __init__(self, message, equation=None):
        super().__init__(message)
        self.equation = equation


class EmptyQueueError(NoEquilibriumError):
    """Some queue would receive no customers at equilibrium."""

    def __init__(self, message, queue):
        super().__init__(message)
        self.queue = queue


class NonConvergenceError(StrategicArrivalsError, RuntimeError):
    def __init__(self, message, iterations, cycle_length=None):
        super().__init__(message)
        self.iterations = iterations
        self.cycle_length = cycle_length


class UnsupportedError(StrategicArrivalsError, ValueError):
    pass


class ConfigError(StrategicArrivalsError, ValueError):
    """Invalid scenario configuration.

    ``field`` is a dotted path into the config document; ``line`` and
    ``context`` are set for parse errors.
    """

    def __init__(self, message, field=None, value=None, line=None, context=None):
        super().__init__(message)
        self.field = field
        self.value = value
        self.line = line
        self.context = context

    def to_dict(self):
        out = {"error": "config", "message": str(self)}
        for key in ("field", "value", "line", "context"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


class AssumptionWarning(UserWarning):
    """A sufficient condition for the equilibrium characterization fails."""


class UnboundedRevenueWarning(UserWarning):
    """Revenue keeps increasing towards the top of the type support."""
