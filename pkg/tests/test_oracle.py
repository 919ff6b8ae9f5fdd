import math

import numpy as np
import pytest

from polarimeter import PreconditionError, StepSizeError
from polarimeter.elements import (
    Analyzer,
    Beamline,
    RFFlipper,
    Polarizer,
    drift_propagator,
    propagate,
    rabi_flip_probability,
)
from polarimeter.experiment import GAUSS, NOMINAL_BEAM, Configuration, default_beamline, resonance_field
from polarimeter.oracle import (
    FieldProfile,
    IntegratorConfig,
    RFTerm,
    Segment,
    bloch_integrate,
    field_profile_of,
    integrate,
    integrate_detailed,
    oracle_propagate,
    thin_element_field,
)
from polarimeter.spinor import (
    DEFAULT_CONSTANTS,
    SPIN_UP,
    X_HAT,
    Z_HAT,
    larmor_frequency,
    polarization_of,
    rotation_propagator,
    spinor_along,
)

from conftest import same_up_to_phase

GAMMA = DEFAULT_CONSTANTS.gamma_n


def random_profile(rng):
    """A few segments with random static fields and optional RF drives, linear or rotating."""
    t = 0.0
    segs = []
    for _ in range(rng.integers(1, 4)):
        dur = rng.uniform(5e-6, 3e-5)
        static = rng.normal(scale=6e-4, size=3)
        rf = None
        if rng.random() < 0.6:
            axis = np.array([math.cos(rng.uniform(0, 2 * math.pi)), math.sin(rng.uniform(0, 2 * math.pi)), 0.0])
            axis /= np.linalg.norm(axis)
            rf = RFTerm(rng.uniform(1e-4, 8e-4), rng.uniform(1e5, 3e5), rng.uniform(-math.pi, math.pi),
                        tuple(axis), rng.choice(["linear", "rotating"]))
        segs.append(Segment(t, t + dur, tuple(static), rf))
        t += dur
    return FieldProfile(tuple(segs))


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


class TestProfiles:
    def test_disabled_flipper_single_segment(self):
        els = (Polarizer(position=0.0), RFFlipper(position=0.5, enabled=False), Analyzer(position=1.0))
        prof = field_profile_of(Beamline(NOMINAL_BEAM, 1e-3, els))
        assert len(prof.segments) == 1
        assert prof.segments[0].static == (0.0, 0.0, 1e-3)

    def test_enabled_flipper_three_segments(self):
        els = (Polarizer(position=0.0), RFFlipper(position=0.5), Analyzer(position=1.0))
        prof = field_profile_of(Beamline(NOMINAL_BEAM, 1e-3, els))
        assert len(prof.segments) == 3
        mid = prof.segments[1]
        assert mid.rf is not None and prof.segments[0].rf is None
        assert mid.duration == pytest.approx(10.05e-6, rel=1e-3)

    def test_gap_rejected(self):
        with pytest.raises(PreconditionError, match="contiguous"):
            FieldProfile((Segment(0, 1e-6, (0, 0, 1e-3)), Segment(2e-6, 3e-6, (0, 0, 1e-3))))

    def test_thin_element_embeds_half_drifts(self):
        op = rotation_propagator((0.0, 1.0, 0.0), math.pi / 2)
        w = 1e-3 / 1990.0
        b = thin_element_field(op, 1.079e-3, w)
        half = drift_propagator(0.5 * w, 1.079e-3)
        u_field = rotation_propagator(b / np.linalg.norm(b), GAMMA * np.linalg.norm(b) * w)
        assert np.allclose(u_field, half @ op @ half, atol=1e-12) or np.allclose(u_field, -(half @ op @ half), atol=1e-12)


class TestIntegrator:
    def test_field_parallel_to_spin(self):
        prof = FieldProfile((Segment(0.0, 1e-4, (0.0, 0.0, 1e-3)),))
        assert np.allclose(bloch_integrate(prof, Z_HAT), Z_HAT, atol=1e-15)

    def test_constant_field_matches_drift(self):
        prof = FieldProfile((Segment(0.0, 2.3e-4, (0.0, 0.0, 1.079e-3)),))
        psi = spinor_along(X_HAT)
        out = integrate(prof, psi, IntegratorConfig(step_size=2e-8))
        assert same_up_to_phase(out, drift_propagator(2.3e-4, 1.079e-3) @ psi, atol=1e-10)

    @pytest.mark.parametrize("delta_hz", [0.0, 700.0, -1500.0, 2000.0])
    def test_rotating_drive_follows_rabi_formula(self, delta_hz):
        b0 = 1.079e-3
        w_l = larmor_frequency(b0)
        tau = 10.05e-6
        b1 = 2 * math.pi / (GAMMA * tau)
        rf = RFTerm(b1, w_l + 2 * math.pi * delta_hz, 0.0, polarization="rotating")
        prof = FieldProfile((Segment(0.0, tau, (0.0, 0.0, b0), rf),))
        out = integrate(prof, SPIN_UP, IntegratorConfig(steps_per_period=400))
        expected = rabi_flip_probability(0.5 * GAMMA * b1, 2 * math.pi * delta_hz, tau)
        assert abs(out[1]) ** 2 == pytest.approx(expected, abs=1e-9)

    def test_quantum_classical_equivalence(self, rng):
        worst = 0.0
        for _ in range(50):
            prof = random_profile(rng)
            p0 = random_unit(rng)
            cfg = IntegratorConfig(steps_per_period=400)
            diff = polarization_of(integrate(prof, spinor_along(p0), cfg)) - bloch_integrate(prof, p0, cfg)
            worst = max(worst, float(np.abs(diff).max()))
        assert worst < 1e-7

    def test_time_translation_covariance(self, rng):
        for _ in range(10):
            prof = random_profile(rng)
            p0 = random_unit(rng)
            dt = rng.uniform(1e-5, 1e-3)
            cfg = IntegratorConfig(steps_per_period=300)
            a = polarization_of(integrate(prof, spinor_along(p0), cfg))
            b = polarization_of(integrate(prof.shifted(dt), spinor_along(p0), cfg))
            assert np.abs(a - b).max() < 1e-9

    def test_magnus_norm_drift_per_million_steps(self):
        prof = FieldProfile((Segment(0.0, 0.1, (2e-4, 0.0, 1e-3)),))
        res = integrate_detailed(prof, SPIN_UP, IntegratorConfig(step_size=1e-7, method="magnus2"))
        assert res.steps >= 1_000_000
        assert res.norm_drift < 1e-9

    def test_rk4_drift_is_recorded(self):
        prof = FieldProfile((Segment(0.0, 1e-3, (0.0, 0.0, 1e-3)),))
        res = integrate_detailed(prof, SPIN_UP, IntegratorConfig(method="rk4"))
        assert res.steps > 0 and 0.0 <= res.norm_drift < 1e-9
        assert abs(np.vdot(res.state, res.state) - 1) < 1e-15

    def test_step_limit_names_frequency(self):
        prof = FieldProfile((Segment(0.0, 1e-4, (0.0, 0.0, 1e-3)),))
        with pytest.raises(StepSizeError, match="Larmor"):
            integrate(prof, SPIN_UP, IntegratorConfig(step_size=1e-6))

    def test_unnormalized_initial(self):
        prof = FieldProfile((Segment(0.0, 1e-5, (0.0, 0.0, 1e-3)),))
        with pytest.raises(PreconditionError):
            integrate(prof, np.array([1.0, 1.0]))


class TestOracleVersusAnalytic:
    def test_larmor_configuration(self):
        bl = default_beamline(Configuration.LARMOR)
        for dx in (0.0, 0.011, 0.05):
            b = bl.with_offset("g1", dx)
            assert oracle_propagate(b)[1] == pytest.approx(propagate(b)[1], abs=1e-6)

    @pytest.mark.parametrize("f_hz", [31.8e3, 30.0e3])
    def test_zero_field_rotating_drive(self, f_hz):
        bl = default_beamline(Configuration.ZERO_FIELD, guide_field=10.59 * GAUSS, rf_frequency=f_hz,
                              local_static_field=resonance_field(31.8e3), rf_polarization="rotating")
        for dx in (0.0, 0.027):
            b = bl.with_offset("g1", dx)
            assert oracle_propagate(b)[1] == pytest.approx(propagate(b)[1], abs=1e-6)

    def test_linear_drive_bloch_siegert_shrinks_with_longer_coil(self):
        # counter-rotating error falls as the Rabi rate drops below the drive frequency
        errs = []
        for coil in (0.02, 0.05, 0.12):
            bl = default_beamline(Configuration.ZERO_FIELD, coil_length=coil).with_offset("g1", 0.013)
            errs.append(abs(oracle_propagate(bl)[1] - propagate(bl)[1]))
        assert errs[0] > errs[1] > errs[2]
