"""
TOML run configuration.

Every key is optional.  A file holding only ``scan.configuration = "larmor"``
yields the Larmor setup at ``B0 = 10.79 G`` with a 0-80 mm translator scan.
Units are SI throughout, with frequencies as ordinary frequencies in Hz.

Schema (defaults in brackets)::

    engine = "analytic" | "oracle"              ["analytic"]
    seed = <int>                                [none]
    guide_field = <T>                           [1.079e-3]

    [beam]
    velocity = <m/s>                            [1990.0]
    wavelength = <m>                            [1.99e-10; omit with velocity only -> derived]
    polarization = <(0, 1]>                     [0.98]

    [flippers]          # defaults geometry only
    coil_length = <m>                           [0.02]
    frequency = <Hz>                            [resonant with local field]
    local_static_field = <T>                    [guide field]
    b1 = <T>                                    [flip mode]
    rf_polarization = "linear" | "rotating"     ["linear"]

    [[elements]]        # replaces the default geometry
    type = "polarizer" | "pi_half_rotator" | "rf_flipper" | "dc_flipper" | "analyzer"
    position = <m>
    translator_group = <str>
    direction | axis = [x, y, z]   angle = <rad>   enabled = <bool>
    frequency, rf_phase, b1, coil_length, local_static_field, rf_polarization  (rf_flipper)

    [scan]
    configuration = "larmor" | "zerofield"      ["larmor"]
    swept = "translator_offset" | "guide_field" | "rf_frequency"   ["translator_offset"]
    start, stop = <swept units>                 [0.0, 0.08]
    points = <int >= 8>                         [81]
    counts_per_point = <int >= 1>               [none]
    velocity_spread = <relative sigma>          [none]
    group = <str>                               ["g1"]
    translator_offset, rf_frequency, local_static_field   (fixed values)

    [oracle]
    method = "rk4" | "magnus2"                  ["rk4"]
    step_size = <s>                             [auto]
    steps_per_period = <int>                    [200]
    dc_width = <m>                              [0.001]

    [output]
    csv = <path>
    json = <path>
"""
from dataclasses import dataclass, field
import math
from typing import Optional

import jsonschema

from .elements import (
    Analyzer,
    Beamline,
    BeamParameters,
    DCFlipper,
    PiHalfRotator,
    Polarizer,
    RFFlipper,
    velocity_from_wavelength,
)
from .errors import ConfigError, GeometryError, PreconditionError
from .experiment import GAUSS, Configuration, ScanSpec, default_beamline
from .oracle import IntegratorConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_VEC = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_GROUP = {"type": "string", "minLength": 1}

_ELEMENT_KEYS = {
    "polarizer": {"direction": _VEC},
    "analyzer": {"direction": _VEC},
    "pi_half_rotator": {"axis": _VEC, "angle": _NUM},
    "dc_flipper": {"axis": _VEC, "angle": _NUM, "enabled": {"type": "boolean"}},
    "rf_flipper": {"frequency": _POS, "rf_phase": _NUM, "b1": _NONNEG, "coil_length": _POS,
                   "local_static_field": _NONNEG, "enabled": {"type": "boolean"},
                   "rf_polarization": {"enum": ["linear", "rotating"]}},
}


def _element_schema(kind, extra):
    props = {"type": {"const": kind}, "position": _NUM, "translator_group": _GROUP}
    props.update(extra)
    return {"type": "object", "properties": props, "required": ["type", "position"],
            "additionalProperties": False}


SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "engine": {"enum": ["analytic", "oracle"]},
        "seed": {"type": "integer", "minimum": 0},
        "guide_field": _NONNEG,
        "beam": {"type": "object", "additionalProperties": False, "properties": {
            "velocity": _POS, "wavelength": _POS,
            "polarization": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}},
        "flippers": {"type": "object", "additionalProperties": False, "properties": {
            "coil_length": _POS, "frequency": _POS, "local_static_field": _NONNEG, "b1": _NONNEG,
            "rf_polarization": {"enum": ["linear", "rotating"]}}},
        "elements": {"type": "array", "minItems": 2, "items": {
            "type": "object", "required": ["type"],
            "properties": {"type": {"enum": sorted(_ELEMENT_KEYS)}},
            "allOf": [{"if": {"properties": {"type": {"const": k}}}, "then": _element_schema(k, v)}
                      for k, v in _ELEMENT_KEYS.items()]}},
        "scan": {"type": "object", "additionalProperties": False, "properties": {
            "configuration": {"enum": [c.value for c in Configuration]},
            "swept": {"enum": ["translator_offset", "guide_field", "rf_frequency"]},
            "start": _NUM, "stop": _NUM,
            "points": {"type": "integer", "minimum": 8},
            "counts_per_point": {"type": "integer", "minimum": 1},
            "velocity_spread": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.2},
            "group": _GROUP,
            "translator_offset": _NUM, "rf_frequency": _POS, "local_static_field": _NONNEG}},
        "oracle": {"type": "object", "additionalProperties": False, "properties": {
            "method": {"enum": ["rk4", "magnus2"]}, "step_size": _POS,
            "steps_per_period": {"type": "integer", "minimum": 50}, "dc_width": _POS}},
        "output": {"type": "object", "additionalProperties": False, "properties": {
            "csv": {"type": "string"}, "json": {"type": "string"}}},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass
class RunConfig:
    beamline: Beamline
    scan: ScanSpec
    engine: str = "analytic"
    seed: Optional[int] = None
    oracle: IntegratorConfig = field(default_factory=IntegratorConfig)
    dc_width: float = 1e-3
    output: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)


def _where(error):
    path = ".".join(str(p) for p in error.absolute_path)
    return path or "<root>"


def validate(data):
    error = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(data))
    if error is None:
        return
    if error.validator == "additionalProperties":
        extra = sorted(set(error.instance) - set(error.schema.get("properties", {})))
        raise ConfigError(f"unknown key {', '.join(extra)!r} in {_where(error)}")
    raise ConfigError(f"{_where(error)}: {error.message}")


def _beam(section):
    polarization = section.get("polarization", 0.98)
    if "velocity" in section:
        return BeamParameters(section["velocity"], section.get("wavelength"), polarization)
    if "wavelength" in section:
        return BeamParameters(velocity_from_wavelength(section["wavelength"]), section["wavelength"], polarization)
    return BeamParameters(1990.0, 1.99e-10, polarization)


def _rf_kwargs(d):
    kw = {}
    if "frequency" in d:
        kw["frequency"] = 2 * math.pi * d["frequency"]
    for key in ("rf_phase", "b1", "coil_length", "local_static_field", "enabled", "rf_polarization"):
        if key in d:
            kw[key] = d[key]
    return kw


def _element(d):
    common = {"position": d["position"], "translator_group": d.get("translator_group")}
    kind = d["type"]
    if kind == "polarizer":
        return Polarizer(**common, **({"direction": tuple(d["direction"])} if "direction" in d else {}))
    if kind == "analyzer":
        return Analyzer(**common, **({"direction": tuple(d["direction"])} if "direction" in d else {}))
    extra = {k: d[k] for k in ("angle", "enabled") if k in d}
    if "axis" in d:
        extra["axis"] = tuple(d["axis"])
    if kind == "pi_half_rotator":
        return PiHalfRotator(**common, **extra)
    if kind == "dc_flipper":
        return DCFlipper(**common, **extra)
    return RFFlipper(**common, **_rf_kwargs(d))


def build(data):
    """Validated mapping -> :class:`RunConfig`."""
    validate(data)
    scan_d = dict(data.get("scan", {}))
    configuration = Configuration(scan_d.get("configuration", "larmor"))
    guide = data.get("guide_field", 10.79 * GAUSS)
    try:
        beam = _beam(data.get("beam", {}))
        if "elements" in data:
            if "flippers" in data:
                raise ConfigError("'flippers' defaults apply to the default geometry only; "
                                  "set RF parameters on each rf_flipper element instead")
            bl = Beamline(beam, guide, tuple(_element(e) for e in data["elements"]))
        else:
            fl = data.get("flippers", {})
            bl = default_beamline(configuration, guide_field=guide, beam=beam,
                                  rf_frequency=fl.get("frequency"),
                                  local_static_field=fl.get("local_static_field"),
                                  coil_length=fl.get("coil_length", 0.02),
                                  rf_polarization=fl.get("rf_polarization", "linear"))
            if "b1" in fl:
                bl = bl.map_elements(RFFlipper, b1=fl["b1"])
        fixed = {k: scan_d[k] for k in ("translator_offset", "rf_frequency", "local_static_field") if k in scan_d}
        spec = ScanSpec(configuration, scan_d.get("swept", "translator_offset"), scan_d.get("start", 0.0),
                        scan_d.get("stop", 0.08), scan_d.get("points", 81), fixed,
                        counts_per_point=scan_d.get("counts_per_point"), rng_seed=data.get("seed"),
                        velocity_spread=scan_d.get("velocity_spread"), group=scan_d.get("group", "g1"))
    except GeometryError:
        raise
    except (PreconditionError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    oracle_d = data.get("oracle", {})
    oracle = IntegratorConfig(oracle_d.get("step_size"), oracle_d.get("method", "rk4"),
                              oracle_d.get("steps_per_period", 200))
    resolved = {
        "engine": data.get("engine", "analytic"),
        "seed": data.get("seed"),
        "guide_field": guide,
        "beam": {"velocity": beam.velocity, "wavelength": beam.wavelength, "polarization": beam.incident_polarization},
        "elements": [_describe(e) for e in bl.elements],
        "scan": {"configuration": spec.configuration.value, "swept": spec.swept, "start": spec.start,
                 "stop": spec.stop, "points": spec.points, "fixed": spec.fixed,
                 "counts_per_point": spec.counts_per_point, "velocity_spread": spec.velocity_spread,
                 "group": spec.group},
        "oracle": {"method": oracle.method, "step_size": oracle.step_size,
                   "steps_per_period": oracle.steps_per_period, "dc_width": oracle_d.get("dc_width", 1e-3)},
    }
    return RunConfig(bl, spec, data.get("engine", "analytic"), data.get("seed"), oracle,
                     oracle_d.get("dc_width", 1e-3), dict(data.get("output", {})), resolved)


def _describe(el):
    d = {"type": type(el).__name__}
    d.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(el).items()})
    return d


def parse_config(text):
    """Parse TOML text into a validated :class:`RunConfig`."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from exc
    return build(data)


def load_config(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return parse_config(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path} is not UTF-8") from exc
