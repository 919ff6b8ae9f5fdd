"""
Polarimeter configurations, phase predictors and parameter scans.

The default layout follows the order polarizer, pi/2 rotator, RF1, RF2, DC
flipper, pi/2 rotator, analyzer.  RF2 and the DC flipper ride on translator
``g1``, so moving it lengthens the RF1-RF2 gap and shortens the DC-analyzer
drift by the same amount.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import math
from typing import Mapping, Optional

import numpy as np

from .elements import (
    Analyzer,
    Beamline,
    BeamParameters,
    DCFlipper,
    PiHalfRotator,
    Polarizer,
    RFFlipper,
    element_schedule,
    propagate,
)
from .errors import PreconditionError, ResourceLimitError
from .oracle import IntegratorConfig, oracle_propagate
from .spinor import DEFAULT_CONSTANTS, Y_HAT, larmor_frequency

GAUSS = 1e-4
TRANSLATOR_GROUP = "g1"
NOMINAL_BEAM = BeamParameters(velocity=1990.0, wavelength=1.99e-10, incident_polarization=0.98)
SWEPT_PARAMETERS = ("translator_offset", "guide_field", "rf_frequency")
FIXED_PARAMETERS = SWEPT_PARAMETERS + ("local_static_field",)
ENGINES = ("analytic", "oracle")
GAUSS_HERMITE_POINTS = 16


class Configuration(str, Enum):
    LARMOR = "larmor"
    ZERO_FIELD = "zerofield"


def resonance_field(frequency_hz, constants=DEFAULT_CONSTANTS):
    """Static field (T) whose Larmor frequency is ``frequency_hz``."""
    return 2 * math.pi * frequency_hz / constants.gamma_n


def default_beamline(configuration=Configuration.LARMOR, *, guide_field=10.79 * GAUSS, rf_frequency=None,
                     local_static_field=None, beam=NOMINAL_BEAM, coil_length=0.02, rf_polarization="linear",
                     constants=DEFAULT_CONSTANTS):
    """
    Nominal seven-element beamline.  ``rf_frequency`` is an ordinary frequency in Hz;
    ``None`` keeps both flippers on resonance with their static field.
    """
    omega = None if rf_frequency is None else 2 * math.pi * rf_frequency
    rf = dict(frequency=omega, coil_length=coil_length, local_static_field=local_static_field,
              rf_polarization=rf_polarization)
    elements = (
        Polarizer(position=0.0),
        PiHalfRotator(position=0.1, axis=tuple(Y_HAT)),
        RFFlipper(position=0.3, **rf),
        RFFlipper(position=0.5, translator_group=TRANSLATOR_GROUP, **rf),
        DCFlipper(position=0.7, translator_group=TRANSLATOR_GROUP),
        PiHalfRotator(position=0.9, axis=tuple(-Y_HAT)),
        Analyzer(position=1.0),
    )
    return configure(Beamline(beam, guide_field, elements, constants=constants), configuration)


def configure(beamline, configuration):
    """Switch RF flippers on (zero-field) or off (Larmor); the DC flipper is on in both."""
    configuration = Configuration(configuration)
    bl = beamline.map_elements(RFFlipper, enabled=configuration is Configuration.ZERO_FIELD)
    return bl.map_elements(DCFlipper, enabled=True)


def apply_parameter(beamline, name, value, group=TRANSLATOR_GROUP):
    if name == "translator_offset":
        return beamline.with_offset(group, value)
    if name == "guide_field":
        return beamline.with_guide_field(value)
    if name == "rf_frequency":
        return beamline.map_elements(RFFlipper, frequency=2 * math.pi * value)
    if name == "local_static_field":
        return beamline.map_elements(RFFlipper, local_static_field=value)
    raise PreconditionError(f"unknown scan parameter {name!r}; expected one of {FIXED_PARAMETERS}")


# --- phase predictors -------------------------------------------------------

@dataclass(frozen=True)
class PhasePrediction:
    alpha0: float
    slope_per_offset: float

    def phase(self, offset):
        return self.alpha0 + self.slope_per_offset * offset


def _so3(axis, angle):
    n = np.asarray(axis, dtype=float)
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def _in_plane_angle(vector, what):
    v = np.asarray(vector, dtype=float)
    if abs(v[2]) > 1e-9:
        raise PreconditionError(f"{what} must lie in the xy-plane for the phase predictor")
    return math.atan2(v[1], v[0])


def interference_phase(beamline, t_origin=0.0):
    """
    Phase ``alpha`` of the polarization interference, ``I = (1 + P cos alpha) / 2``.

    Tracks the azimuth of the equatorial polarization between the two pi/2
    rotators: drifts add ``omega_L dt``, a pi flip about an in-plane axis at
    angle ``beta`` maps ``theta -> 2 beta - theta``, and a resonant RF pi flip
    does the same with ``beta = phi + omega (t_entry + t_exit) / 2``.
    Off-resonant flippers are treated as ideal flips, so the result is then
    only approximate.
    """
    sched = element_schedule(beamline, t_origin)
    rot = [i for i, it in enumerate(sched) if isinstance(it.element, PiHalfRotator)]
    if len(rot) != 2:
        raise PreconditionError("phase predictor needs exactly two pi/2 rotators")
    opening, closing = sched[rot[0]], sched[rot[1]]
    g = beamline.constants
    w_guide = larmor_frequency(beamline.guide_field, g)
    start = _so3(opening.element.axis, opening.element.angle) @ np.asarray(beamline.elements[0].direction, float)
    theta = _in_plane_angle(start, "polarization after the first rotator")
    t = opening.exit_time
    for item in sched[rot[0] + 1:rot[1]]:
        el = item.element
        theta += w_guide * (item.entry_time - t)
        if isinstance(el, RFFlipper):
            if el.enabled:
                omega = el.drive_frequency(beamline.guide_field, g)
                theta = 2 * el.rf_phase + omega * (item.entry_time + item.exit_time) - theta
            else:
                theta += larmor_frequency(el.static_field(beamline.guide_field), g) * (item.exit_time - item.entry_time)
        elif isinstance(el, DCFlipper):
            if el.enabled:
                if abs(el.angle - math.pi) > 1e-12:
                    raise PreconditionError("phase predictor supports DC pi flips only")
                theta = 2 * _in_plane_angle(el.axis, "DC flipper axis") - theta
        t = item.exit_time
    theta += w_guide * (closing.entry_time - t)
    analyzer = np.asarray(beamline.elements[-1].direction, float)
    reference = _so3(closing.element.axis, closing.element.angle).T @ analyzer
    return _in_plane_angle(reference, "analyzer direction mapped back through the last rotator") - theta


def predict_phase_larmor(beamline, offset):
    """``alpha = alpha0 + 2 omega_L offset / v`` for RF off, DC on."""
    if any(e.enabled for e in beamline.of_type(RFFlipper)) or not all(e.enabled for e in beamline.of_type(DCFlipper)):
        raise PreconditionError("Larmor predictor requires RF flippers off and the DC flipper on")
    dc = beamline.of_type(DCFlipper)
    if len(dc) != 1 or dc[0].translator_group is None:
        raise PreconditionError("Larmor predictor requires one DC flipper on a translator")
    return interference_phase(beamline.with_offset(dc[0].translator_group, offset))


def predict_phase_zerofield(beamline, offset):
    """
    Zero-field phase with RF1 fixed and RF2 + DC on one translator.

    The Larmor contributions of the lengthened RF1-RF2 gap and the shortened
    DC-analyzer drift cancel, leaving ``2 omega_R offset / v``: each of the
    two flips stamps twice the drive phase on the spinor's relative phase.
    """
    rf = beamline.of_type(RFFlipper)
    dc = beamline.of_type(DCFlipper)
    if len(rf) != 2 or not all(e.enabled for e in rf) or len(dc) != 1 or not dc[0].enabled:
        raise PreconditionError("zero-field predictor requires two enabled RF flippers and an enabled DC flipper")
    group = dc[0].translator_group
    if group is None or rf[1].translator_group != group or rf[0].translator_group == group:
        raise PreconditionError(
            "zero-field compensation needs the DC flipper and the second RF flipper (only) on one translator")
    return interference_phase(beamline.with_offset(group, offset))


def phase_prediction(beamline, configuration, step=1e-3):
    configuration = Configuration(configuration)
    predictor = predict_phase_larmor if configuration is Configuration.LARMOR else predict_phase_zerofield
    alpha0 = predictor(beamline, 0.0)
    return PhasePrediction(alpha0, (predictor(beamline, step) - alpha0) / step)


# --- scans --------------------------------------------------------------------

@dataclass(frozen=True)
class ScanSpec:
    """
    One-parameter sweep.

    ``fixed`` holds overrides of the non-swept parameters: ``guide_field``
    and ``local_static_field`` in tesla, ``rf_frequency`` in Hz,
    ``translator_offset`` in metres.
    """

    configuration: Configuration
    swept: str = "translator_offset"
    start: float = 0.0
    stop: float = 0.08
    points: int = 81
    fixed: Mapping[str, float] = field(default_factory=dict)
    counts_per_point: Optional[int] = None
    rng_seed: Optional[int] = None
    velocity_spread: Optional[float] = None
    group: str = TRANSLATOR_GROUP

    def __post_init__(self):
        object.__setattr__(self, "configuration", Configuration(self.configuration))
        object.__setattr__(self, "fixed", dict(self.fixed))
        if self.swept not in SWEPT_PARAMETERS:
            raise PreconditionError(f"swept must be one of {SWEPT_PARAMETERS}, got {self.swept!r}")
        if not self.stop > self.start:
            raise PreconditionError("scan needs stop > start")
        if self.points < 8:
            raise PreconditionError("scan needs at least 8 points")
        if self.counts_per_point is not None and self.counts_per_point < 1:
            raise PreconditionError("counts_per_point must be >= 1")
        if self.velocity_spread is not None and not 0 <= self.velocity_spread < 0.2:
            raise PreconditionError("velocity_spread is a relative sigma in [0, 0.2)")
        for key in self.fixed:
            if key not in FIXED_PARAMETERS or key == self.swept:
                raise PreconditionError(f"invalid fixed parameter {key!r}")

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class ScanResult:
    swept_name: str
    values: np.ndarray
    intensities: np.ndarray
    counts: Optional[np.ndarray]
    metadata: dict

    def __len__(self):
        return len(self.values)


def point_rng(seed, index):
    """Independent generator for scan point ``index``; fixed by ``(seed, index)`` alone."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def synthesize_counts(intensity, mean_counts, rng):
    """Poisson count with mean ``mean_counts * intensity``."""
    if not -1e-12 <= intensity <= 1 + 1e-12:
        raise PreconditionError(f"intensity must lie in [0, 1], got {intensity!r}")
    if mean_counts < 1:
        raise PreconditionError("mean_counts must be >= 1")
    return int(rng.poisson(mean_counts * min(max(intensity, 0.0), 1.0)))


def _ideal_intensity(beamline, engine, oracle_config):
    if engine == "analytic":
        return propagate(beamline)[1]
    return oracle_propagate(beamline, config=oracle_config)[1]


def spread_intensity(beamline, engine="analytic", velocity_spread=None, oracle_config=None):
    """Intensity, averaged over a Gaussian velocity distribution when ``velocity_spread`` is set."""
    if not velocity_spread:
        return _ideal_intensity(beamline, engine, oracle_config)
    nodes, weights = np.polynomial.hermite_e.hermegauss(GAUSS_HERMITE_POINTS)
    weights = weights / weights.sum()
    v0 = beamline.velocity
    total = 0.0
    for x, w in zip(nodes, weights):
        bl = beamline.with_beam(beamline.beam.with_velocity(v0 * (1 + velocity_spread * x)))
        total += w * _ideal_intensity(bl, engine, oracle_config)
    return total


def run_scan(spec, beamline=None, engine="analytic", *, oracle_config=None, workers=1,
             max_oracle_evaluations=20000):
    """
    Evaluate the ideal intensity at every swept value and optionally add
    Poisson counts.  Results do not depend on ``workers``.
    """
    if engine not in ENGINES:
        raise PreconditionError(f"engine must be one of {ENGINES}")
    per_point = GAUSS_HERMITE_POINTS if spec.velocity_spread else 1
    if engine == "oracle" and spec.points * per_point > max_oracle_evaluations:
        raise ResourceLimitError(
            f"oracle scan needs {spec.points * per_point} integrations (limit {max_oracle_evaluations}); "
            "reduce points, drop velocity_spread, or use engine='analytic'")
    base = configure(beamline if beamline is not None else default_beamline(spec.configuration),
                     spec.configuration)
    for name, value in spec.fixed.items():
        base = apply_parameter(base, name, value, spec.group)
    oracle_config = oracle_config or IntegratorConfig()
    values = spec.values

    def evaluate(value):
        bl = apply_parameter(base, spec.swept, float(value), spec.group)
        return spread_intensity(bl, engine, spec.velocity_spread, oracle_config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            intensities = np.array(list(pool.map(evaluate, values)))
    else:
        intensities = np.array([evaluate(v) for v in values])

    counts = None
    seed = spec.rng_seed
    if spec.counts_per_point is not None:
        if seed is None:
            seed = int(np.random.SeedSequence().entropy)
        counts = np.array([synthesize_counts(I, spec.counts_per_point, point_rng(seed, i))
                           for i, I in enumerate(intensities)], dtype=np.int64)
    metadata = {
        "configuration": spec.configuration.value,
        "swept": spec.swept,
        "start": spec.start,
        "stop": spec.stop,
        "points": spec.points,
        "fixed": dict(spec.fixed),
        "counts_per_point": spec.counts_per_point,
        "rng_seed": seed,
        "velocity_spread": spec.velocity_spread,
        "engine": engine,
    }
    return ScanResult(spec.swept, values, intensities, counts, metadata)
