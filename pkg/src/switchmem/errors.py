"""Exception types raised across the package."""


class SwitchMemError(Exception):
    """Base class for all package errors."""


class InvalidStateError(SwitchMemError, ValueError):
    """A matrix fails the density-matrix invariants."""


class InvalidChannelError(SwitchMemError, ValueError):
    """A Kraus set violates completeness beyond tolerance."""


class InvalidParameterError(SwitchMemError, ValueError):
    """Rates, times or coefficients outside their admissible domain."""


class SizeLimitError(SwitchMemError, ValueError):
    """An enumeration would exceed the configured size cap."""


class DegeneratePostSelectionError(SwitchMemError, ArithmeticError):
    """The post-selected branch has (numerically) zero probability."""


class SingularMapError(SwitchMemError, ArithmeticError):
    """The transfer matrix cannot be inverted."""


class BranchError(SwitchMemError, ArithmeticError):
    """A logarithm would be taken of a nonpositive transfer factor."""
