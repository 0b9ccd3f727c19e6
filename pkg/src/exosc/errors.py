"""Exception hierarchy shared by all modules."""


class ExoscError(Exception):
    """Base class; ``exit_code`` is used by the command line front end."""

    exit_code = 3


class ValidationError(ExoscError, ValueError):
    exit_code = 2


class ConditionViolated(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class EmptyWindow(ExoscError):
    pass


class InvalidChartPoint(ValidationError):
    pass


class OutsideOverlap(ValidationError):
    pass


class OverflowGuard(ExoscError, OverflowError):
    pass


class OnSwitchingManifold(ExoscError):
    pass


class IntegrationFailure(ExoscError):
    pass


class MaxStepsExceeded(IntegrationFailure):
    pass


class StepUnderflow(IntegrationFailure):
    pass


class NoReturn(ExoscError):
    pass


class NoConvergence(ExoscError):
    pass
