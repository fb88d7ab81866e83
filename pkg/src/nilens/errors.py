"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration; carries the full list of violations."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericsError(RuntimeError):
    """Base class for failures of the numerical machinery."""


class QuadratureError(NumericsError):
    """Adaptive integration did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        if achieved is not None:
            message = f"{message} (achieved error {achieved:.3e})"
        self.achieved = achieved
        super().__init__(message)


class PoleError(NumericsError):
    """An interface or slab denominator vanished on the integration path."""

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{message} at k_perp = {location}"
        self.location = location
        super().__init__(message)


class FitError(NumericsError):
    """Material fitting failed; carries the residual of the best candidate."""

    def __init__(self, message, residual=None):
        if residual is not None:
            message = f"{message} (residual {residual})"
        self.residual = residual
        super().__init__(message)


class ConvergenceError(NumericsError):
    """A difference quotient or refinement loop failed to stabilize."""


class GridRangeError(NumericsError):
    """A requested feature lies outside the supplied grid."""


class SingularityError(ValueError):
    """Evaluation requested at a point where the quantity diverges."""
