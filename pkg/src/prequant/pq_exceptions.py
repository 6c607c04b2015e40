#!/usr/bin/env python3


class PrequantError(Exception):
    pass


# > Configuration: exit code 2
class ConfigError(PrequantError, ValueError):
    pass


class UnknownScenarioError(ConfigError):
    pass


# > Broken preconditions of an operation
class ContractError(PrequantError, ValueError):
    pass


class DomainError(ContractError):
    pass


class ChartMismatchError(ContractError):
    pass


class TopDegreeError(ContractError):
    pass


class DegreeOverflowError(ContractError):
    pass


class DegreeZeroError(ContractError):
    pass


class DimensionMismatchError(ContractError):
    pass


class RegionEscapeError(ContractError):
    pass


class NotStarShapedError(ContractError):
    pass


class NotClosedError(ContractError):
    pass


class UnknownRegionError(ContractError):
    pass


class OpenPathError(ContractError):
    pass


class RegionScheduleError(ContractError):
    pass


class HermitianViolationError(ContractError):
    pass


class SingularLevelError(ContractError):
    pass


class PoleDecayError(ContractError):
    pass


class CohomologyObstructionError(ContractError):
    def __init__(self, integral: complex, message: str = "") -> None:
        self.integral = integral
        super().__init__(message or f"closed form has nonzero total integral {integral!r}, no global primitive")


class CurvatureMismatchError(ContractError):
    def __init__(self, residual: float, tolerance: float) -> None:
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f"not the same curvature: residual {residual:.3e} exceeds {tolerance:.1e}")


class NonIntegralPeriodError(ContractError):
    def __init__(self, period: complex, nearest_multiple: int) -> None:
        self.period = period
        self.nearest_multiple = nearest_multiple
        super().__init__(
            f"period {period!r} is not in 2*pi*Z, nearest integer multiple is {nearest_multiple} (2*pi*{nearest_multiple})"
        )


class NonIntegralClassError(ContractError):
    def __init__(self, integral: float) -> None:
        self.integral = integral
        super().__init__(f"total symplectic area {integral!r} is not in 2*pi*Z")


class H1ObstructionError(ContractError):
    """Raised when a closed 1-form has a nonzero period, so that it has no global potential."""

    def __init__(self, loop, period: complex) -> None:
        self.loop = loop
        self.period = period
        super().__init__(f"nonzero period {period!r} on {loop}: the form is closed but not exact")


# > Internal numerical failures: exit code 3
class NumericalError(PrequantError, ArithmeticError):
    pass


class DegenerateFormError(NumericalError):
    pass


class ChartEscapeError(NumericalError):
    def __init__(self, sample, message: str = "") -> None:
        self.sample = sample
        super().__init__(message or f"trajectory escaped the chart at {sample}")


class ShrinkRadiusError(NumericalError):
    def __init__(self, radius: float, suggested_radius: float) -> None:
        self.radius = radius
        self.suggested_radius = suggested_radius
        super().__init__(
            f"Moser flow escapes the ball of radius {radius}, retry with radius {suggested_radius}"
        )


class PathDependenceError(NumericalError):
    pass


class JacobianError(NumericalError):
    pass


class RefinementError(NumericalError):
    pass


class IndependenceFailureError(NumericalError):
    pass
