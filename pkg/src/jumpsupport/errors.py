"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so the CLI can map
them to exit code 2; configuration problems use :class:`ConfigError`.
"""


class JumpSupportError(Exception):
    pass


class NumericalError(JumpSupportError):
    pass


class ConfigError(JumpSupportError):
    pass


class NotAnalyzableError(JumpSupportError):
    """The model variant has no closed-form integrability analysis."""


class DivergenceError(NumericalError):
    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class QuadratureError(NumericalError):
    pass


class BlowUpError(NumericalError):
    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class InfeasibleTiltError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class IterationCapError(NumericalError):
    pass


class InadmissibleJumpError(JumpSupportError):
    pass


class GapViolationError(JumpSupportError, ValueError):
    pass


class ConeConditionError(JumpSupportError):
    pass


class AssumptionError(JumpSupportError):
    """Sampled Lipschitz/growth quotients exceed the declared constants."""
