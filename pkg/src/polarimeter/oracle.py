"""
Brute-force lab-frame integration of the spin dynamics along the neutron worldline.

The Hamiltonian is ``H(t) = (hbar gamma_n / 2) sigma . B(t)`` with the full
oscillating RF field, so no rotating-wave approximation enters.  The same
field profile can be integrated classically, ``dP/dt = gamma_n B x P``, for
a quantum/classical cross-check.
"""
from dataclasses import dataclass, replace
import math
from typing import NamedTuple, Optional

import numba as nb
import numpy as np

from .elements import (
    DCFlipper,
    PiHalfRotator,
    RFFlipper,
    analyzer_intensity,
    drift_propagator,
    element_schedule,
)
from .errors import GeometryError, PreconditionError, StepSizeError
from .spinor import DEFAULT_CONSTANTS, Z_HAT, rotation_propagator, spinor_along, su2_axis_angle

METHODS = {"rk4": 0, "magnus2": 1}
_CONTIGUITY_TOL = 1e-14  # seconds


@dataclass(frozen=True)
class RFTerm:
    amplitude: float
    frequency: float
    phase: float = 0.0
    axis: tuple = (1.0, 0.0, 0.0)
    polarization: str = "linear"

    def __post_init__(self):
        if self.polarization not in ("linear", "rotating"):
            raise PreconditionError(f"unknown RF polarization {self.polarization!r}")
        a = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise PreconditionError("RF axis must be a unit vector")
        if self.polarization == "rotating" and np.linalg.norm(np.cross(Z_HAT, a)) < 1e-9:
            raise PreconditionError("rotating RF field needs an axis transverse to z")

    def second_axis(self):
        e2 = np.cross(Z_HAT, np.asarray(self.axis, dtype=float))
        n = np.linalg.norm(e2)
        return e2 / n if n > 0 else e2


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    static: tuple
    rf: Optional[RFTerm] = None

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise PreconditionError(f"segment needs t_end > t_start, got [{self.t_start}, {self.t_end}]")
        object.__setattr__(self, "static", tuple(float(b) for b in self.static))

    @property
    def duration(self):
        return self.t_end - self.t_start


@dataclass(frozen=True)
class FieldProfile:
    """Piecewise field ``B(t)`` made of contiguous segments."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise PreconditionError("empty field profile")
        for a, b in zip(segs, segs[1:]):
            if abs(b.t_start - a.t_end) > _CONTIGUITY_TOL:
                raise PreconditionError(
                    f"segments not contiguous: gap/overlap of {b.t_start - a.t_end:.3e} s at t = {a.t_end:.9e}")

    @property
    def t_start(self):
        return self.segments[0].t_start

    @property
    def t_end(self):
        return self.segments[-1].t_end

    def shifted(self, dt):
        """Same field history delayed by ``dt``; RF phases are adjusted so ``B'(t) = B(t - dt)``."""
        segs = []
        for s in self.segments:
            rf = None if s.rf is None else replace(s.rf, phase=s.rf.phase - s.rf.frequency * dt)
            segs.append(Segment(s.t_start + dt, s.t_end + dt, s.static, rf))
        return FieldProfile(tuple(segs))

    def field_at(self, t):
        for s in self.segments:
            if s.t_start <= t <= s.t_end:
                b = np.array(s.static)
                if s.rf is not None:
                    arg = s.rf.frequency * t + s.rf.phase
                    if s.rf.polarization == "rotating":
                        b = b + 0.5 * s.rf.amplitude * (math.cos(arg) * np.asarray(s.rf.axis)
                                                        + math.sin(arg) * s.rf.second_axis())
                    else:
                        b = b + s.rf.amplitude * math.cos(arg) * np.asarray(s.rf.axis)
                return b
        raise PreconditionError(f"t = {t} outside profile")

    def characteristic_rates(self, constants=DEFAULT_CONSTANTS):
        """Largest Larmor, Rabi and RF angular frequencies occurring in the profile."""
        g = constants.gamma_n
        rates = {"Larmor": 0.0, "Rabi": 0.0, "RF": 0.0}
        for s in self.segments:
            rates["Larmor"] = max(rates["Larmor"], g * float(np.linalg.norm(s.static)))
            if s.rf is not None:
                rates["Rabi"] = max(rates["Rabi"], 0.5 * g * abs(s.rf.amplitude))
                rates["RF"] = max(rates["RF"], abs(s.rf.frequency))
        return rates

    def _arrays(self):
        n = len(self.segments)
        t0 = np.empty(n)
        t1 = np.empty(n)
        static = np.zeros((n, 3))
        amp = np.zeros(n)
        ax1 = np.zeros((n, 3))
        ax2 = np.zeros((n, 3))
        omega = np.zeros(n)
        phase = np.zeros(n)
        rotating = np.zeros(n, dtype=np.bool_)
        for i, s in enumerate(self.segments):
            t0[i], t1[i] = s.t_start, s.t_end
            static[i] = s.static
            if s.rf is not None:
                amp[i] = s.rf.amplitude
                ax1[i] = s.rf.axis
                ax2[i] = s.rf.second_axis()
                omega[i] = s.rf.frequency
                phase[i] = s.rf.phase
                rotating[i] = s.rf.polarization == "rotating"
        # the last segment's end is the profile end; inner boundaries are shared
        return t0, t1, static, amp, ax1, ax2, omega, phase, rotating


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Fixed-step integrator settings.

    ``step_size=None`` picks ``1 / steps_per_period`` of the shortest period
    among the Larmor, RF and Rabi frequencies of the profile.
    """

    step_size: Optional[float] = None
    method: str = "rk4"
    steps_per_period: int = 200

    def __post_init__(self):
        if self.method not in METHODS:
            raise PreconditionError(f"method must be one of {sorted(METHODS)}")
        if self.step_size is not None and not self.step_size > 0:
            raise PreconditionError("step_size must be positive")


class Integration(NamedTuple):
    state: np.ndarray
    norm_drift: float
    steps: int


def _resolve_step(profile, config, constants):
    rates = profile.characteristic_rates(constants)
    limiting = max(rates, key=rates.get)
    fastest = rates[limiting]
    if fastest == 0.0:
        return config.step_size or profile.t_end - profile.t_start
    h = config.step_size if config.step_size is not None else 2 * math.pi / fastest / config.steps_per_period
    h_max = 2 * math.pi / (50.0 * fastest)
    if h > h_max * (1 + 1e-12):
        raise StepSizeError(
            f"step {h:.3e} s exceeds limit {h_max:.3e} s set by the {limiting} frequency "
            f"{fastest / (2 * math.pi):.6g} Hz (need >= 50 steps per period)")
    return h


@nb.njit(cache=True, nogil=True)
def _field(t, s, static, amp, ax1, ax2, omega, phase, rotating):
    bx = static[s, 0]
    by = static[s, 1]
    bz = static[s, 2]
    if amp[s] != 0.0:
        arg = omega[s] * t + phase[s]
        if rotating[s]:
            c = 0.5 * amp[s] * math.cos(arg)
            d = 0.5 * amp[s] * math.sin(arg)
            bx += c * ax1[s, 0] + d * ax2[s, 0]
            by += c * ax1[s, 1] + d * ax2[s, 1]
            bz += c * ax1[s, 2] + d * ax2[s, 2]
        else:
            c = amp[s] * math.cos(arg)
            bx += c * ax1[s, 0]
            by += c * ax1[s, 1]
            bz += c * ax1[s, 2]
    return bx, by, bz


@nb.njit(cache=True, nogil=True)
def _psi_rhs(bx, by, bz, half_gamma, u0, u1):
    a = bz * u0 + (bx - 1j * by) * u1
    b = (bx + 1j * by) * u0 - bz * u1
    return -1j * half_gamma * a, -1j * half_gamma * b


@nb.njit(cache=True, nogil=True)
def _quantum_kernel(t0, t1, static, amp, ax1, ax2, omega, phase, rotating, gamma, h, method, u0, u1):
    half_gamma = 0.5 * gamma
    steps = 0
    for s in range(t0.shape[0]):
        dur = t1[s] - t0[s]
        m = max(1, int(math.ceil(dur / h - 1e-9)))
        dt = dur / m
        for k in range(m):
            t = t0[s] + k * dt
            if method == 0:
                bx, by, bz = _field(t, s, static, amp, ax1, ax2, omega, phase, rotating)
                k1a, k1b = _psi_rhs(bx, by, bz, half_gamma, u0, u1)
                bx, by, bz = _field(t + 0.5 * dt, s, static, amp, ax1, ax2, omega, phase, rotating)
                k2a, k2b = _psi_rhs(bx, by, bz, half_gamma, u0 + 0.5 * dt * k1a, u1 + 0.5 * dt * k1b)
                k3a, k3b = _psi_rhs(bx, by, bz, half_gamma, u0 + 0.5 * dt * k2a, u1 + 0.5 * dt * k2b)
                bx, by, bz = _field(t + dt, s, static, amp, ax1, ax2, omega, phase, rotating)
                k4a, k4b = _psi_rhs(bx, by, bz, half_gamma, u0 + dt * k3a, u1 + dt * k3b)
                u0 = u0 + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
                u1 = u1 + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            else:
                bx, by, bz = _field(t + 0.5 * dt, s, static, amp, ax1, ax2, omega, phase, rotating)
                bn = math.sqrt(bx * bx + by * by + bz * bz)
                if bn > 0.0:
                    theta = gamma * bn * dt
                    c = math.cos(0.5 * theta)
                    sn = math.sin(0.5 * theta) / bn
                    a = c * u0 - 1j * sn * (bz * u0 + (bx - 1j * by) * u1)
                    b = c * u1 - 1j * sn * ((bx + 1j * by) * u0 - bz * u1)
                    u0 = a
                    u1 = b
        steps += m
    return u0, u1, steps


@nb.njit(cache=True, nogil=True)
def _bloch_rhs(bx, by, bz, gamma, px, py, pz):
    return gamma * (by * pz - bz * py), gamma * (bz * px - bx * pz), gamma * (bx * py - by * px)


@nb.njit(cache=True, nogil=True)
def _bloch_kernel(t0, t1, static, amp, ax1, ax2, omega, phase, rotating, gamma, h, method, px, py, pz):
    for s in range(t0.shape[0]):
        dur = t1[s] - t0[s]
        m = max(1, int(math.ceil(dur / h - 1e-9)))
        dt = dur / m
        for k in range(m):
            t = t0[s] + k * dt
            if method == 0:
                bx, by, bz = _field(t, s, static, amp, ax1, ax2, omega, phase, rotating)
                ax_, ay_, az_ = _bloch_rhs(bx, by, bz, gamma, px, py, pz)
                bx, by, bz = _field(t + 0.5 * dt, s, static, amp, ax1, ax2, omega, phase, rotating)
                bx_, by_, bz_ = _bloch_rhs(bx, by, bz, gamma, px + 0.5 * dt * ax_, py + 0.5 * dt * ay_,
                                           pz + 0.5 * dt * az_)
                cx_, cy_, cz_ = _bloch_rhs(bx, by, bz, gamma, px + 0.5 * dt * bx_, py + 0.5 * dt * by_,
                                           pz + 0.5 * dt * bz_)
                bx, by, bz = _field(t + dt, s, static, amp, ax1, ax2, omega, phase, rotating)
                dx_, dy_, dz_ = _bloch_rhs(bx, by, bz, gamma, px + dt * cx_, py + dt * cy_, pz + dt * cz_)
                px = px + dt / 6.0 * (ax_ + 2.0 * bx_ + 2.0 * cx_ + dx_)
                py = py + dt / 6.0 * (ay_ + 2.0 * by_ + 2.0 * cy_ + dy_)
                pz = pz + dt / 6.0 * (az_ + 2.0 * bz_ + 2.0 * cz_ + dz_)
            else:
                bx, by, bz = _field(t + 0.5 * dt, s, static, amp, ax1, ax2, omega, phase, rotating)
                bn = math.sqrt(bx * bx + by * by + bz * bz)
                if bn > 0.0:
                    theta = gamma * bn * dt
                    nx, ny, nz = bx / bn, by / bn, bz / bn
                    c = math.cos(theta)
                    sn = math.sin(theta)
                    dot = nx * px + ny * py + nz * pz
                    cx_, cy_, cz_ = ny * pz - nz * py, nz * px - nx * pz, nx * py - ny * px
                    px, py, pz = (px * c + cx_ * sn + nx * dot * (1 - c),
                                  py * c + cy_ * sn + ny * dot * (1 - c),
                                  pz * c + cz_ * sn + nz * dot * (1 - c))
    return px, py, pz


def integrate_detailed(profile, initial, config=None, constants=DEFAULT_CONSTANTS):
    """Like :func:`integrate`, also reporting the norm drift removed at exit and the step count."""
    config = config or IntegratorConfig()
    psi = np.asarray(initial, dtype=np.complex128)
    norm0 = float(np.vdot(psi, psi).real)
    if abs(norm0 - 1.0) > 1e-9:
        raise PreconditionError(f"initial spinor is not normalized: {norm0:.12g}")
    h = _resolve_step(profile, config, constants)
    u0, u1, steps = _quantum_kernel(*profile._arrays(), constants.gamma_n, h, METHODS[config.method],
                                    complex(psi[0]), complex(psi[1]))
    out = np.array([u0, u1])
    norm = math.sqrt(float(np.vdot(out, out).real))
    return Integration(out / norm, abs(norm - 1.0), steps)


def integrate(profile, initial, config=None, constants=DEFAULT_CONSTANTS):
    """Final spinor after the profile; renormalized once at exit."""
    return integrate_detailed(profile, initial, config, constants).state


def bloch_integrate(profile, initial, config=None, constants=DEFAULT_CONSTANTS):
    """Classical polarization vector after the profile."""
    config = config or IntegratorConfig()
    p = np.asarray(initial, dtype=float)
    if np.linalg.norm(p) > 1.0 + 1e-12:
        raise PreconditionError("|initial polarization| must not exceed 1")
    h = _resolve_step(profile, config, constants)
    px, py, pz = _bloch_kernel(*profile._arrays(), constants.gamma_n, h, METHODS[config.method],
                               float(p[0]), float(p[1]), float(p[2]))
    return np.array([px, py, pz])


def thin_element_field(operator, guide_field, width_time, constants=DEFAULT_CONSTANTS):
    """
    Constant field whose precession over ``width_time`` equals the thin
    ``operator`` sandwiched between two half-width guide-field drifts.
    """
    half = drift_propagator(0.5 * width_time, guide_field, constants)
    axis, angle = su2_axis_angle(half @ operator @ half)
    return angle * axis / (constants.gamma_n * width_time)


def field_profile_of(beamline, t_origin=0.0, dc_width=1e-3):
    """
    Field history seen by a neutron flying through ``beamline``.

    Drifts carry the guide field along z, RF coils their static field plus the
    drive, and thin rotators become segments of ``dc_width`` metres of flight.
    """
    schedule = element_schedule(beamline, t_origin)
    v = beamline.velocity
    g = beamline.constants
    guide = (0.0, 0.0, beamline.guide_field)
    width_t = dc_width / v
    blocks = []
    for item in schedule[1:-1]:
        el = item.element
        if isinstance(el, RFFlipper):
            static = (0.0, 0.0, el.static_field(beamline.guide_field))
            rf = None
            if el.enabled:
                rf = RFTerm(amplitude=el.rf_amplitude(v, g), frequency=el.drive_frequency(beamline.guide_field, g),
                            phase=el.rf_phase, polarization=el.rf_polarization)
            blocks.append((item.entry_time, item.exit_time, static, rf))
        elif isinstance(el, (PiHalfRotator, DCFlipper)):
            if isinstance(el, DCFlipper) and not el.enabled:
                continue
            op = rotation_propagator(el.axis, el.angle)
            b = thin_element_field(op, beamline.guide_field, width_t, g)
            blocks.append((item.entry_time - 0.5 * width_t, item.entry_time + 0.5 * width_t, tuple(b), None))
    t_begin = schedule[0].exit_time
    t_final = schedule[-1].entry_time
    segments = []
    t = t_begin
    for start, end, static, rf in blocks:
        if start < t - _CONTIGUITY_TOL or end > t_final + _CONTIGUITY_TOL:
            raise GeometryError(f"element field region [{start:.6e}, {end:.6e}] s overlaps its neighbours")
        if start > t:
            segments.append(Segment(t, start, guide))
        segments.append(Segment(max(start, t), end, static, rf))
        t = end
    if t_final > t:
        segments.append(Segment(t, t_final, guide))
    return FieldProfile(tuple(_merge(segments)))


def _merge(segments):
    merged = []
    for s in segments:
        if merged and s.rf is None and merged[-1].rf is None and merged[-1].static == s.static:
            merged[-1] = Segment(merged[-1].t_start, s.t_end, s.static)
        else:
            merged.append(s)
    return merged


def oracle_propagate(beamline, t_origin=0.0, config=None, dc_width=1e-3):
    """Time-stepped counterpart of :func:`polarimeter.elements.propagate`."""
    profile = field_profile_of(beamline, t_origin, dc_width)
    initial = spinor_along(beamline.elements[0].direction)
    state = integrate(profile, initial, config, beamline.constants)
    return state, analyzer_intensity(state, beamline)
