import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polarimeter import PreconditionError
from polarimeter.spinor import (
    SIGMA_X,
    SPIN_DOWN,
    SPIN_UP,
    X_HAT,
    Y_HAT,
    Z_HAT,
    is_unitary,
    larmor_frequency,
    overlap_modulus,
    polarization_of,
    projection_intensity,
    rotation_propagator,
    spinor_along,
    su2_axis_angle,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
angles = st.floats(-20.0, 20.0, allow_nan=False)


@st.composite
def unit_vectors(draw):
    v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        return Z_HAT.copy()
    return v / n


@st.composite
def spinors(draw):
    return spinor_along(draw(unit_vectors()))


class TestRotationPropagator:
    def test_zero_angle_is_identity(self):
        assert np.allclose(rotation_propagator(Y_HAT, 0.0), np.eye(2), atol=1e-15)

    def test_pi_about_x_flips_up(self):
        out = rotation_propagator(X_HAT, math.pi) @ SPIN_UP
        assert np.allclose(out, -1j * SPIN_DOWN, atol=1e-15)
        assert np.allclose(rotation_propagator(X_HAT, math.pi), -1j * SIGMA_X, atol=1e-15)

    def test_half_pi_about_y(self):
        out = rotation_propagator(Y_HAT, math.pi / 2) @ SPIN_UP
        assert np.allclose(out, np.array([1, 1]) / math.sqrt(2), atol=1e-15)

    def test_non_unit_axis_rejected(self):
        with pytest.raises(PreconditionError):
            rotation_propagator((1.0, 1.0, 0.0), 1.0)

    @given(unit_vectors(), angles, angles)
    def test_composition(self, n, a, b):
        lhs = rotation_propagator(n, a) @ rotation_propagator(n, b)
        assert np.abs(lhs - rotation_propagator(n, a + b)).max() < 1e-10

    @given(unit_vectors(), angles)
    def test_unitary(self, n, a):
        assert is_unitary(rotation_propagator(n, a), atol=1e-12)

    @given(unit_vectors(), st.floats(1e-3, 2 * math.pi - 1e-3))
    def test_axis_angle_round_trip(self, n, a):
        axis, angle = su2_axis_angle(rotation_propagator(n, a))
        assert angle == pytest.approx(a, abs=1e-9)
        assert np.allclose(axis, n, atol=1e-8)

    def test_right_handed_precession(self):
        # x rotated by +pi/2 about z lands on +y
        p = polarization_of(rotation_propagator(Z_HAT, math.pi / 2) @ spinor_along(X_HAT))
        assert np.allclose(p, Y_HAT, atol=1e-15)


class TestPolarization:
    @pytest.mark.parametrize("state, expected", [
        (SPIN_UP, (0, 0, 1)),
        (np.array([1, 1]) / math.sqrt(2), (1, 0, 0)),
        (np.array([1, 1j]) / math.sqrt(2), (0, 1, 0)),
    ])
    def test_basis(self, state, expected):
        assert np.allclose(polarization_of(state), expected, atol=1e-15)

    def test_unnormalized_rejected(self):
        with pytest.raises(PreconditionError):
            polarization_of(np.array([1.0, 1.0]))

    @given(spinors(), unit_vectors(), angles)
    def test_length_invariant_under_unitaries(self, psi, n, a):
        p = polarization_of(rotation_propagator(n, a) @ psi)
        assert abs(np.linalg.norm(p) - 1.0) < 1e-9

    @given(unit_vectors())
    def test_spinor_along_round_trip(self, d):
        assert np.allclose(polarization_of(spinor_along(d)), d, atol=1e-12)


class TestProjection:
    @pytest.mark.parametrize("state, direction, expected", [
        (SPIN_UP, Z_HAT, 1.0),
        (SPIN_UP, -Z_HAT, 0.0),
        (np.array([1, 1]) / math.sqrt(2), Z_HAT, 0.5),
    ])
    def test_examples(self, state, direction, expected):
        assert projection_intensity(state, direction) == pytest.approx(expected, abs=1e-15)

    @given(spinors(), unit_vectors(), angles, unit_vectors())
    def test_complementary(self, psi, n, a, d):
        out = rotation_propagator(n, a) @ psi
        assert abs(projection_intensity(out, d) + projection_intensity(out, -d) - 1.0) < 1e-12


class TestLarmor:
    def test_zero(self):
        assert larmor_frequency(0.0) == 0.0

    def test_guide_fields(self):
        assert larmor_frequency(1.059e-3) == pytest.approx(1.9406e5, rel=5e-5)
        assert larmor_frequency(1.059e-3) / (2 * math.pi) == pytest.approx(30.886e3, rel=5e-5)
        assert larmor_frequency(1.079e-3) == pytest.approx(1.9772e5, rel=5e-5)
        assert larmor_frequency(1.079e-3) / (2 * math.pi) == pytest.approx(31.469e3, rel=5e-5)

    def test_negative_rejected(self):
        with pytest.raises(PreconditionError):
            larmor_frequency(-1e-3)


def test_overlap_ignores_global_phase():
    psi = spinor_along(np.array([0.6, 0.0, 0.8]))
    assert overlap_modulus(psi, np.exp(0.7j) * psi) == pytest.approx(1.0, abs=1e-15)
