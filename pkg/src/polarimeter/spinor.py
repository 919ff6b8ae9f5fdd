"""
Two-level state algebra.

Spinors are complex arrays of shape ``(2,)`` in the ``|+z>, |-z>`` basis and
operators are complex ``(2, 2)`` arrays.  Polarization vectors are real arrays
of shape ``(3,)``.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import constants as _sc

from .errors import PreconditionError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
IDENTITY = np.eye(2, dtype=np.complex128)

X_HAT = np.array([1.0, 0.0, 0.0])
Y_HAT = np.array([0.0, 1.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])

SPIN_UP = np.array([1.0, 0.0], dtype=np.complex128)
SPIN_DOWN = np.array([0.0, 1.0], dtype=np.complex128)

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Constants entering the spin dynamics.

    Parameters
    ----------
    gamma_n : float
        Magnitude of the neutron gyromagnetic ratio in rad s^-1 T^-1.  Spins
        precess right-handed about the field, ``dP/dt = gamma_n B x P``.
    hbar : float
        Reduced Planck constant in J s.  Only used to express ``hbar * omega``
        energies in diagnostics.
    """

    gamma_n: float = 1.83247171e8
    hbar: float = _sc.hbar
    planck: float = _sc.h
    neutron_mass: float = _sc.m_n

    def __post_init__(self):
        if not self.gamma_n > 0:
            raise PreconditionError("gamma_n must be a positive magnitude")


DEFAULT_CONSTANTS = PhysicalConstants()


def _unit(vector, name="axis"):
    v = np.asarray(vector, dtype=float)
    if v.shape != (3,):
        raise PreconditionError(f"{name} must be a 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > _NORM_TOL:
        raise PreconditionError(f"{name} must have unit length, |{name}| = {np.linalg.norm(v):.12g}")
    return v


def _check_normalized(state):
    psi = np.asarray(state, dtype=np.complex128)
    if psi.shape != (2,):
        raise PreconditionError(f"spinor must have shape (2,), got {psi.shape}")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > _NORM_TOL:
        raise PreconditionError(f"spinor is not normalized: <psi|psi> = {norm:.12g}")
    return psi


def sigma_dot(vector):
    """Return ``sigma . vector`` as a 2x2 matrix (vector need not be unit)."""
    x, y, z = vector
    return np.array([[z, x - 1j * y], [x + 1j * y, -z]], dtype=np.complex128)


def rotation_propagator(axis, angle):
    """
    SU(2) rotation ``exp(-i angle (sigma . axis) / 2)``.

    The polarization vector is rotated right-handed by ``angle`` about
    ``axis``.
    """
    n = _unit(axis)
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    return c * IDENTITY - 1j * s * sigma_dot(n)


def su2_axis_angle(operator):
    """
    Inverse of :func:`rotation_propagator` up to a global phase.

    Returns ``(axis, angle)`` with ``angle`` in ``[0, 2*pi]``.  For the identity
    the axis is ``z``.
    """
    u = np.asarray(operator, dtype=np.complex128)
    det = np.linalg.det(u)
    u = u / np.sqrt(det)
    c = 0.5 * (u[0, 0] + u[1, 1]).real
    sx = -u[0, 1].imag
    sy = -u[0, 1].real
    sz = -u[0, 0].imag
    s = math.sqrt(sx * sx + sy * sy + sz * sz)
    angle = 2.0 * math.atan2(s, c)
    if s < 1e-15:
        return Z_HAT.copy(), angle
    return np.array([sx, sy, sz]) / s, angle


def spinor_along(direction):
    """Pure state whose polarization points along the unit vector ``direction``."""
    n = _unit(direction, "direction")
    theta = math.atan2(math.hypot(n[0], n[1]), n[2])
    phi = math.atan2(n[1], n[0])
    return np.array([math.cos(theta / 2.0), np.exp(1j * phi) * math.sin(theta / 2.0)], dtype=np.complex128)


def polarization_of(state):
    """Expectation values ``(<sigma_x>, <sigma_y>, <sigma_z>)`` of a normalized spinor."""
    psi = _check_normalized(state)
    coherence = 2.0 * np.conj(psi[0]) * psi[1]
    return np.array([coherence.real, coherence.imag, abs(psi[0]) ** 2 - abs(psi[1]) ** 2])


def projection_intensity(state, direction):
    """Transmission probability ``(1 + P . direction) / 2`` of an ideal analyzer."""
    d = _unit(direction, "direction")
    p = polarization_of(state)
    return float(min(1.0, max(0.0, 0.5 * (1.0 + p @ d))))


def larmor_frequency(field, constants=DEFAULT_CONSTANTS):
    """Angular Larmor frequency ``gamma_n * B`` (rad/s) of a field magnitude in tesla."""
    if field < 0:
        raise PreconditionError(f"field strength must be non-negative, got {field!r} T")
    return constants.gamma_n * field


def is_unitary(operator, atol=1e-12):
    u = np.asarray(operator)
    return bool(np.allclose(u.conj().T @ u, IDENTITY, rtol=0.0, atol=atol))


def overlap_modulus(a, b):
    """``|<a|b>|``; equals 1 iff the states agree up to a global phase."""
    return float(abs(np.vdot(a, b)))
