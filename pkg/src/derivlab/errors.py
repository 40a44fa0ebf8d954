"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the domain of the operation."""


class SizeError(ValueError):
    """A requested computation exceeds a configured size cap."""


class ModeError(ValueError):
    """The requested evaluation mode cannot be used for this input."""
