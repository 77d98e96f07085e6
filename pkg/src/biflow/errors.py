"""Exception types shared across the package."""


class UnsupportedOrderError(ValueError):
    """A derivative order outside the implemented range was requested."""


class InvalidTimeError(ValueError):
    """A kernel or semigroup evaluation was requested at a non-positive time."""


class QuadratureResidualError(RuntimeError):
    """The imaginary residual of an oscillatory quadrature exceeded tolerance.

    Signals that the node density is insufficient for the requested point.
    """


class ScaleUnresolvableError(ValueError):
    """A norm scan was asked for scales the grid or time axis cannot resolve."""


class TimeMisalignedError(ValueError):
    """A Duhamel evaluation time does not lie on the stored frame grid."""


class ManifoldTubeExitError(RuntimeError):
    """An iterate left the tubular neighbourhood where the projection is valid.

    Carries the offending location and distance so runs can report where the
    data got too rough for the small-data regime.
    """

    def __init__(self, message, location=None, radius=None):
        super().__init__(message)
        self.location = location
        self.radius = radius


class ContractionFailureError(RuntimeError):
    """Successive Picard differences stopped contracting."""


class ConfigError(ValueError):
    """A run configuration failed to parse or validate."""
