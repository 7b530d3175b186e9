"""Exception types raised by sellab."""


class SelLabError(Exception):
    """Base class for all sellab errors."""


class SingularMatrix(SelLabError):
    pass


class NonConvergent(SelLabError):
    pass


class DomainError(SelLabError, ValueError):
    pass


class SingularityOutOfDomain(DomainError):
    pass


class DimensionMismatch(SelLabError, ValueError):
    pass


class TruncationTooSmall(SelLabError):
    pass


class StepTooLarge(SelLabError, ValueError):
    pass


class DegenerateParams(SelLabError, ValueError):
    pass


class NearSingularSystem(SelLabError):
    pass


class NotPhaseSymmetric(SelLabError):
    pass


class NormalizationFailed(SelLabError):
    pass


class ConfigError(SelLabError, ValueError):
    pass
