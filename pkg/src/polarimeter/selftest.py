"""
Quick invariant and oracle-equivalence checks behind ``polarimeter selftest``.

Oracle comparisons use the circularly polarized drive, for which the
rotating-wave propagator of the analytic engine is exact; the linear drive
carries a Bloch-Siegert error that no fixed tolerance can absorb at the
default coil length (see ``scripts/bloch_siegert_scan.py``).
"""
import io
import math

import numpy as np

from .elements import propagate
from .experiment import GAUSS, Configuration, ScanSpec, default_beamline, resonance_field, run_scan
from .fitting import fit_sinusoid
from .oracle import FieldProfile, IntegratorConfig, RFTerm, Segment, bloch_integrate, integrate
from .spinor import polarization_of, rotation_propagator, spinor_along


def _unitarity(rng):
    worst = 0.0
    for _ in range(200):
        axis = rng.normal(size=3)
        u = rotation_propagator(axis / np.linalg.norm(axis), rng.uniform(-10, 10))
        worst = max(worst, float(np.abs(u.conj().T @ u - np.eye(2)).max()))
    return worst < 1e-12, f"max |U^H U - 1| = {worst:.2e}"


def _composition(rng):
    worst = 0.0
    for _ in range(200):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        a, b = rng.uniform(-5, 5, size=2)
        d = rotation_propagator(n, a) @ rotation_propagator(n, b) - rotation_propagator(n, a + b)
        worst = max(worst, float(np.abs(d).max()))
    return worst < 1e-10, f"max composition error = {worst:.2e}"


def _bloch_equivalence():
    b0 = 10.79 * GAUSS
    rf = RFTerm(amplitude=4e-4, frequency=2 * math.pi * 31e3, phase=0.4)
    profile = FieldProfile((Segment(0.0, 2e-5, (0.0, 3e-4, b0)), Segment(2e-5, 6e-5, (0.0, 0.0, b0), rf)))
    p0 = np.array([1.0, 0.0, 0.0])
    cfg = IntegratorConfig(method="rk4", steps_per_period=400)
    p_q = polarization_of(integrate(profile, spinor_along(p0), cfg))
    p_c = bloch_integrate(profile, p0, cfg)
    err = float(np.abs(p_q - p_c).max())
    return err < 1e-7, f"max |P_quantum - P_bloch| = {err:.2e}"


def _oracle_scans():
    b_res = resonance_field(31.8e3)
    cases = [
        ("larmor 10.79 G", Configuration.LARMOR, dict(guide_field=10.79 * GAUSS)),
        ("zero-field 31.8 kHz", Configuration.ZERO_FIELD,
         dict(guide_field=10.59 * GAUSS, rf_frequency=31.8e3, local_static_field=b_res)),
        ("zero-field 30.0 kHz", Configuration.ZERO_FIELD,
         dict(guide_field=10.59 * GAUSS, rf_frequency=30.0e3, local_static_field=b_res)),
    ]
    out = []
    for name, conf, kw in cases:
        bl = default_beamline(conf, rf_polarization="rotating", **kw)
        spec = ScanSpec(conf, points=11)
        diff = np.abs(run_scan(spec, bl, "oracle").intensities - run_scan(spec, bl, "analytic").intensities)
        out.append((f"oracle equivalence, {name}", float(diff.max()) < 1e-4, f"max |dI| = {diff.max():.2e}"))
    return out


def _determinism():
    from .scanio import write_scan_csv

    spec = ScanSpec(Configuration.LARMOR, counts_per_point=1000, rng_seed=42)
    texts = []
    for workers in (1, 4):
        buf = io.StringIO()
        write_scan_csv(run_scan(spec, workers=workers), buf)
        texts.append(buf.getvalue())
    return texts[0] == texts[1], "CSV identical across runs and worker counts" if texts[0] == texts[1] else "CSV differs"


def _fit_recovery():
    x = np.linspace(0, 0.08, 81)
    k = 198.8
    fit = fit_sinusoid(x, 0.5 + 0.45 * np.cos(k * x + 0.3))
    rel = abs(fit.k / k - 1)
    return rel < 1e-9, f"relative k error {rel:.1e}"


def _analytic_unitarity():
    bl = default_beamline(Configuration.ZERO_FIELD, rf_frequency=30.0e3)
    state, intensity = propagate(bl)
    norm = float(np.vdot(state, state).real)
    return abs(norm - 1) < 1e-12 and 0 <= intensity <= 1, f"|psi|^2 - 1 = {norm - 1:.1e}, I = {intensity:.6f}"


def run_selftest(seed=0):
    """Return ``(name, passed, detail)`` tuples."""
    rng = np.random.default_rng(seed)
    results = [
        ("SU(2) unitarity", *_unitarity(rng)),
        ("rotation composition", *_composition(rng)),
        ("analytic propagation norm", *_analytic_unitarity()),
        ("quantum/Bloch equivalence", *_bloch_equivalence()),
        ("fitter noiseless recovery", *_fit_recovery()),
        ("scan determinism", *_determinism()),
    ]
    results.extend(_oracle_scans())
    return results
