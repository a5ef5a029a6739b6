"""Exception hierarchy shared across the package."""


class UltragramError(Exception):
    """Base class for all errors raised by this package."""


class InputFormatError(UltragramError):
    """Input could not be parsed into a valid distance matrix."""


class NotMetricError(UltragramError):
    """The triangle inequality fails but the operation needs a metric."""


class NotUltrametricError(UltragramError):
    """The strong triangle inequality fails but the operation needs an ultrametric."""


class DegenerateSpaceError(UltragramError):
    """Closed-form operation refused: the base point sits inside the only
    coterie and that coterie has exactly two points. Reorder first."""


class NumericError(UltragramError):
    """A numeric routine failed to reach its accuracy target."""


class NotPositiveSemidefiniteError(NumericError):
    """An embedding was requested but the Gramian is not positive semidefinite."""


class UnboundedExtensionError(UltragramError):
    """The exponent-extension formula is undefined: all distances are equal,
    so the extension interval is unbounded."""
