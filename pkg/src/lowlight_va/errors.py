"""Exception hierarchy. Validation-type errors map to CLI exit code 1."""


class LowlightError(Exception):
    """Base class for all package errors."""


class ValidationError(LowlightError):
    """Input data or parameters are invalid; nothing was computed."""


class ParameterError(ValidationError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ProfileParseError(ValidationError):
    def __init__(self, path, message):
        self.path = path
        where = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"profile schema violation at {where}: {message}")


class ProfileValidationError(ValidationError):
    def __init__(self, invariant, indices=()):
        self.invariant = invariant
        self.indices = tuple(indices)
        msg = invariant
        if self.indices:
            msg += f" (indices {list(self.indices)})"
        super().__init__(msg)


class ConfigurationError(ValidationError):
    """Bad configuration index, trace length, or simulation settings."""


class DomainError(LowlightError, ValueError):
    """Argument outside the mathematical domain of a cost function."""
