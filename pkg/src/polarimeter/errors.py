"""Exception hierarchy shared by every module of the package."""


class PolarimeterError(Exception):
    """Base class for all errors raised by :mod:`polarimeter`."""


class PreconditionError(PolarimeterError, ValueError):
    """An argument violates a documented precondition."""


class GeometryError(PolarimeterError, ValueError):
    """The beamline layout is physically inconsistent."""


class ConfigError(PolarimeterError, ValueError):
    """A run configuration violates the documented schema."""


class StepSizeError(PolarimeterError, ValueError):
    """The integrator step is too coarse for the fastest frequency in the profile."""


class ResourceLimitError(PolarimeterError, RuntimeError):
    """A requested computation exceeds the configured work budget."""


class NoOscillationError(PolarimeterError, ValueError):
    """Fitted amplitude is statistically indistinguishable from zero."""
