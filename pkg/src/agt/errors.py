"""Exception hierarchy shared by every solver module."""


class AgtError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(AgtError):
    pass


class NonPositiveWeight(ValidationError):
    pass


class MissingSelfLoop(ValidationError):
    pass


class GoalUnreachable(ValidationError):
    pass


class PriorNotNormalized(ValidationError):
    pass


class IllegalAction(AgtError):
    pass


class NoOutgoingEdge(AgtError):
    pass


class DepthCapExceeded(AgtError):
    pass


class SizeLimitExceeded(AgtError):
    pass


class ConfigInvalid(AgtError):
    pass


class IterationBudgetExhausted(AgtError):
    """CFR ran out of iterations; ``best_gap`` holds the smallest gap seen."""

    def __init__(self, message, best_gap=float("inf"), result=None):
        super().__init__(message)
        self.best_gap = best_gap
        self.result = result


class OuterBudgetExhausted(AgtError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NonConvergence(AgtError):
    pass


class DegenerateValue(AgtError):
    pass


class StrategyDomainMismatch(AgtError):
    pass


class UnknownFormat(AgtError):
    pass
