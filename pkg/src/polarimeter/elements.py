"""
Beamline elements and their analytic lab-frame propagators.

Times are lab times along the neutron worldline, ``t = t_origin + x / v``.
All elements except the RF flipper are thin (zero duration).  The RF flipper
propagator uses the rotating-wave approximation: only the field component
co-rotating with the Larmor precession is kept, which makes the rotating
frame Hamiltonian static.
"""
from dataclasses import dataclass, field, replace
import math
from typing import Mapping, NamedTuple, Optional

import numpy as np

from .errors import GeometryError, PreconditionError
from .spinor import (
    DEFAULT_CONSTANTS,
    IDENTITY,
    X_HAT,
    Y_HAT,
    Z_HAT,
    PhysicalConstants,
    larmor_frequency,
    projection_intensity,
    rotation_propagator,
    spinor_along,
)

RF_POLARIZATIONS = ("linear", "rotating")


@dataclass(frozen=True)
class BeamParameters:
    """
    Monochromatic beam.

    ``wavelength`` may be ``None``; when given it must agree with
    ``velocity`` through ``v = h / (m_n lambda)`` to within 1 %.
    """

    velocity: float = 1990.0
    wavelength: Optional[float] = 1.99e-10
    incident_polarization: float = 0.98

    def __post_init__(self):
        if not self.velocity > 0:
            raise PreconditionError(f"velocity must be positive, got {self.velocity!r}")
        if not 0.0 < self.incident_polarization <= 1.0:
            raise PreconditionError(
                f"incident_polarization must lie in (0, 1], got {self.incident_polarization!r}")
        if self.wavelength is not None:
            if not self.wavelength > 0:
                raise PreconditionError(f"wavelength must be positive, got {self.wavelength!r}")
            v_expected = velocity_from_wavelength(self.wavelength)
            if abs(self.velocity - v_expected) > 0.01 * v_expected:
                raise PreconditionError(
                    f"velocity {self.velocity:g} m/s inconsistent with wavelength "
                    f"{self.wavelength:g} m (expects {v_expected:.1f} m/s)")

    @classmethod
    def from_wavelength(cls, wavelength, incident_polarization=0.98):
        return cls(velocity_from_wavelength(wavelength), wavelength, incident_polarization)

    def with_velocity(self, velocity):
        wavelength = None if self.wavelength is None else wavelength_from_velocity(velocity)
        return replace(self, velocity=velocity, wavelength=wavelength)


def velocity_from_wavelength(wavelength, constants=DEFAULT_CONSTANTS):
    return constants.planck / (constants.neutron_mass * wavelength)


def wavelength_from_velocity(velocity, constants=DEFAULT_CONSTANTS):
    return constants.planck / (constants.neutron_mass * velocity)


@dataclass(frozen=True, kw_only=True)
class Element:
    position: float
    translator_group: Optional[str] = None

    def duration(self, velocity):
        return 0.0


@dataclass(frozen=True, kw_only=True)
class Polarizer(Element):
    direction: tuple = tuple(Z_HAT)


@dataclass(frozen=True, kw_only=True)
class Analyzer(Element):
    direction: tuple = tuple(Z_HAT)


@dataclass(frozen=True, kw_only=True)
class PiHalfRotator(Element):
    axis: tuple = tuple(Y_HAT)
    angle: float = math.pi / 2


@dataclass(frozen=True, kw_only=True)
class DCFlipper(Element):
    axis: tuple = tuple(X_HAT)
    angle: float = math.pi
    enabled: bool = True


@dataclass(frozen=True, kw_only=True)
class RFFlipper(Element):
    """
    Resonant spin flipper: static field along z plus an oscillating field along x.

    Parameters
    ----------
    frequency : float or None
        Angular drive frequency in rad/s.  ``None`` tunes the drive to the
        Larmor frequency of the coil's static field.
    rf_phase : float
        Phase ``phi`` of the drive ``b1 cos(omega t + phi)``, referred to the
        shared clock origin.
    b1 : float or None
        Oscillating-field amplitude in tesla.  ``None`` selects flip mode,
        ``rabi_rate * transit_time = pi``.
    coil_length : float
        Coil extent along the beam in metres.
    local_static_field : float or None
        Static field inside the coil.  ``None`` uses the beamline guide field.
    rf_polarization : {"linear", "rotating"}
        Field geometry seen by the time-dependent integrator.  The analytic
        propagator keeps only the co-rotating half of either.
    """

    frequency: Optional[float] = None
    rf_phase: float = 0.0
    b1: Optional[float] = None
    coil_length: float = 0.02
    local_static_field: Optional[float] = None
    enabled: bool = True
    rf_polarization: str = "linear"

    def __post_init__(self):
        if not self.coil_length > 0:
            raise GeometryError(f"coil_length must be positive, got {self.coil_length!r}")
        if self.enabled and self.frequency is not None and not self.frequency > 0:
            raise PreconditionError(f"enabled RF flipper needs frequency > 0, got {self.frequency!r}")
        if self.rf_polarization not in RF_POLARIZATIONS:
            raise PreconditionError(f"rf_polarization must be one of {RF_POLARIZATIONS}")
        if self.local_static_field is not None and self.local_static_field < 0:
            raise PreconditionError("local_static_field must be non-negative")

    def duration(self, velocity):
        return self.coil_length / velocity

    def static_field(self, guide_field):
        return guide_field if self.local_static_field is None else self.local_static_field

    def drive_frequency(self, guide_field, constants=DEFAULT_CONSTANTS):
        if self.frequency is not None:
            return self.frequency
        return larmor_frequency(self.static_field(guide_field), constants)

    def rf_amplitude(self, velocity, constants=DEFAULT_CONSTANTS):
        """Linear amplitude ``b1``; its co-rotating half gives ``rabi_rate = gamma b1 / 2``."""
        if self.b1 is not None:
            return self.b1
        return 2.0 * math.pi / (constants.gamma_n * self.duration(velocity))

    def rabi_rate(self, velocity, constants=DEFAULT_CONSTANTS):
        return 0.5 * constants.gamma_n * self.rf_amplitude(velocity, constants)

    def detuning(self, guide_field, constants=DEFAULT_CONSTANTS):
        """``omega - omega_L(local field)`` in rad/s."""
        return self.drive_frequency(guide_field, constants) - larmor_frequency(
            self.static_field(guide_field), constants)


@dataclass(frozen=True)
class Beamline:
    """
    Ordered element list with a uniform guide field along z.

    ``translator_offsets`` maps a translator group id to a displacement in
    metres applied to every element of that group.
    """

    beam: BeamParameters
    guide_field: float
    elements: tuple
    translator_offsets: Mapping[str, float] = field(default_factory=dict)
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "translator_offsets", dict(self.translator_offsets))
        if self.guide_field < 0:
            raise PreconditionError("guide_field is a magnitude and must be non-negative")
        els = self.elements
        if len(els) < 2 or not isinstance(els[0], Polarizer) or not isinstance(els[-1], Analyzer):
            raise GeometryError("beamline must start with a Polarizer and end with an Analyzer")
        if sum(isinstance(e, Polarizer) for e in els) != 1 or sum(isinstance(e, Analyzer) for e in els) != 1:
            raise GeometryError("beamline must contain exactly one Polarizer and one Analyzer")
        for a, b in zip(els, els[1:]):
            if not b.position > a.position:
                raise GeometryError(
                    f"positions must increase strictly: {type(b).__name__} at {b.position} m "
                    f"follows {type(a).__name__} at {a.position} m")
        groups = {e.translator_group for e in els if e.translator_group is not None}
        unknown = set(self.translator_offsets) - groups
        if unknown:
            raise GeometryError(f"translator offsets for unknown groups: {sorted(unknown)}")

    @property
    def velocity(self):
        return self.beam.velocity

    def offset_of(self, element):
        if element.translator_group is None:
            return 0.0
        return self.translator_offsets.get(element.translator_group, 0.0)

    def with_offset(self, group, offset):
        offsets = dict(self.translator_offsets)
        offsets[group] = offset
        return replace(self, translator_offsets=offsets)

    def with_guide_field(self, guide_field):
        return replace(self, guide_field=guide_field)

    def with_beam(self, beam):
        return replace(self, beam=beam)

    def map_elements(self, kind, **changes):
        """Copy with ``changes`` applied to every element of class ``kind``."""
        els = tuple(replace(e, **changes) if isinstance(e, kind) else e for e in self.elements)
        return replace(self, elements=els)

    def of_type(self, kind):
        return [e for e in self.elements if isinstance(e, kind)]


class ScheduledElement(NamedTuple):
    element: Element
    entry_time: float
    exit_time: float


def element_schedule(beamline, t_origin=0.0):
    """Entry and exit times of every element, in beamline order."""
    v = beamline.velocity
    schedule = []
    for el in beamline.elements:
        entry = t_origin + (el.position + beamline.offset_of(el)) / v
        schedule.append(ScheduledElement(el, entry, entry + el.duration(v)))
    for prev, cur in zip(schedule, schedule[1:]):
        if cur.entry_time < prev.exit_time or cur.entry_time <= prev.entry_time:
            raise GeometryError(
                f"{type(cur.element).__name__} at {cur.element.position} m overlaps or precedes "
                f"{type(prev.element).__name__} at {prev.element.position} m after translation")
    return schedule


def drift_propagator(duration, field, constants=DEFAULT_CONSTANTS):
    """Free precession ``diag(exp(-i w T / 2), exp(+i w T / 2))`` in a z field."""
    if duration < 0:
        raise PreconditionError(f"drift duration must be non-negative, got {duration!r}")
    half = 0.5 * larmor_frequency(field, constants) * duration
    return np.diag([np.exp(-1j * half), np.exp(1j * half)])


def frame_rotation(omega, t):
    """Lab-from-rotating-frame map ``exp(-i omega t sigma_z / 2)``."""
    return np.diag([np.exp(-0.5j * omega * t), np.exp(0.5j * omega * t)])


def rabi_flip_probability(rabi_rate, detuning, duration):
    """Rabi formula ``(w1^2 / W^2) sin^2(W T / 2)`` with ``W^2 = w1^2 + delta^2``."""
    big = math.hypot(rabi_rate, detuning)
    if big == 0.0:
        return 0.0
    return (rabi_rate / big) ** 2 * math.sin(0.5 * big * duration) ** 2


def rf_propagator(entry_time, flipper, *, velocity, guide_field, constants=DEFAULT_CONSTANTS):
    """
    Lab-frame propagator of an RF flipper entered at ``entry_time``.

    Enabled flippers return ``R(t_exit) U_rot R(t_entry)^dagger`` with
    ``R(t) = exp(-i omega t sigma_z / 2)`` and ``U_rot`` the static rotating
    frame rotation about ``(w1 cos phi, w1 sin phi, w_L - omega)``.  A
    disabled flipper is a drift through its static field.
    """
    if entry_time < 0:
        raise PreconditionError(f"entry_time must be non-negative, got {entry_time!r}")
    tau = flipper.duration(velocity)
    b_static = flipper.static_field(guide_field)
    if not flipper.enabled:
        return drift_propagator(tau, b_static, constants)
    if flipper.b1 is not None and flipper.b1 == 0:
        raise PreconditionError("enabled RF flipper with b1 = 0")
    omega = flipper.drive_frequency(guide_field, constants)
    w1 = flipper.rabi_rate(velocity, constants)
    vec = np.array([w1 * math.cos(flipper.rf_phase), w1 * math.sin(flipper.rf_phase),
                    larmor_frequency(b_static, constants) - omega])
    big = float(np.linalg.norm(vec))
    u_rot = rotation_propagator(vec / big, big * tau)
    return frame_rotation(omega, entry_time + tau) @ u_rot @ frame_rotation(omega, entry_time).conj()


def dc_propagator(flipper):
    if not flipper.enabled:
        return IDENTITY.copy()
    return rotation_propagator(flipper.axis, flipper.angle)


def _element_operator(item, beamline):
    el = item.element
    if isinstance(el, RFFlipper):
        return rf_propagator(item.entry_time, el, velocity=beamline.velocity,
                             guide_field=beamline.guide_field, constants=beamline.constants)
    if isinstance(el, DCFlipper):
        return dc_propagator(el)
    if isinstance(el, PiHalfRotator):
        return rotation_propagator(el.axis, el.angle)
    if isinstance(el, (Polarizer, Analyzer)):
        return IDENTITY
    raise TypeError(f"unknown element {el!r}")


def analyzer_intensity(state, beamline):
    """Detected intensity ``1/2 + P_eff (2 T - 1) / 2`` for analyzer transmission ``T``."""
    analyzer = beamline.elements[-1]
    p_eff = beamline.beam.incident_polarization
    transmission = projection_intensity(state, analyzer.direction)
    return 0.5 + 0.5 * p_eff * (2.0 * transmission - 1.0)


def propagate(beamline, t_origin=0.0):
    """
    Evolve the polarizer eigenstate through the beamline.

    Returns
    -------
    state : ndarray
        Spinor arriving at the analyzer.
    intensity : float
        Analyzer transmission scaled by the incident polarization.
    """
    schedule = element_schedule(beamline, t_origin)
    state = spinor_along(beamline.elements[0].direction)
    t = schedule[0].exit_time
    for item in schedule[1:-1]:
        state = drift_propagator(item.entry_time - t, beamline.guide_field, beamline.constants) @ state
        state = _element_operator(item, beamline) @ state
        t = item.exit_time
    state = drift_propagator(schedule[-1].entry_time - t, beamline.guide_field, beamline.constants) @ state
    return state, analyzer_intensity(state, beamline)
