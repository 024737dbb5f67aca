"""Exception hierarchy. Each error carries a category used for CLI exit codes."""


class ManeuverError(Exception):
    category = "internal"


class ConfigError(ManeuverError, ValueError):
    category = "config"


class NumericalError(ManeuverError, ArithmeticError):
    category = "numerical"


class SingularInnovationError(NumericalError):
    """Innovation covariance is not positive definite."""


class DegenerateBankError(NumericalError):
    """Every model likelihood vanished in the same step."""


class DomainError(NumericalError, ValueError):
    """Argument outside the region where a model is defined."""


class CalibrationError(NumericalError):
    pass


class ReportIOError(ManeuverError, OSError):
    category = "io"


EXIT_CODES = {"config": 2, "numerical": 3, "io": 4, "internal": 1}
