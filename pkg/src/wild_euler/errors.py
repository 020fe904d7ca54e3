"""Exception hierarchy shared by all modules."""


class WildEulerError(Exception):
    """Base class for every error raised by this package."""


class InvalidField(WildEulerError, ValueError):
    pass


class NotSwirlFree(WildEulerError, ValueError):
    pass


class InvalidDomain(WildEulerError, ValueError):
    pass


class GridTooCoarse(WildEulerError, ValueError):
    pass


class GridMismatch(WildEulerError, ValueError):
    pass


class UnknownWeakForm(WildEulerError, KeyError):
    pass


class DegenerateDensity(WildEulerError, ValueError):
    pass


class NotInCone(WildEulerError, ValueError):
    pass


class DegenerateDirection(WildEulerError, ValueError):
    pass


class NegativeChi(WildEulerError, ValueError):
    pass


class IntegrationDiverged(WildEulerError, ArithmeticError):
    pass


class NoWindow(WildEulerError):
    pass


class FanTooFast(WildEulerError, ValueError):
    pass


class FanUnresolved(WildEulerError):
    pass


class Saturated(WildEulerError):
    """No grid point has a positive gap left to fill."""


class StepRejected(WildEulerError):
    """Hull constraint still violated after the allowed amplitude halvings."""


class ConfigError(WildEulerError, ValueError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class IoError(WildEulerError, OSError):
    pass
