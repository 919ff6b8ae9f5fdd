"""Neutron polarimeter simulation: Larmor and zero-field spinor precession."""
from .errors import (
    ConfigError,
    GeometryError,
    NoOscillationError,
    PolarimeterError,
    PreconditionError,
    ResourceLimitError,
    StepSizeError,
)
from .spinor import (
    DEFAULT_CONSTANTS,
    PhysicalConstants,
    larmor_frequency,
    polarization_of,
    projection_intensity,
    rotation_propagator,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GeometryError", "NoOscillationError", "PolarimeterError", "PreconditionError",
    "ResourceLimitError", "StepSizeError", "DEFAULT_CONSTANTS", "PhysicalConstants", "larmor_frequency",
    "polarization_of", "projection_intensity", "rotation_propagator",
]
