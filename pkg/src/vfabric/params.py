"""Parameter types, configuration loading and validation.

Every tunable constant of the toolkit lives in one JSON document.  The
packaged ``data/default.json`` holds the shipped values; a user file only
needs to name the fields it overrides.
"""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any, Mapping


class ConfigError(ValueError):
    """Raised when a configuration document is malformed or out of bounds."""


@dataclass(frozen=True)
class FabricParams:
    rent_k: float
    rent_p: float
    fan_out: float
    gate_pitch_h: float  # nm
    gate_pitch_v: float = 0.0  # nm, unused when gz == 1
    gz: int = 1
    n_gates: int = 10_000_000

    def __post_init__(self) -> None:
        _check(self.rent_k >= 0, "rent_k must be >= 0")
        _check(0 < self.rent_p < 1, "rent_p out of (0,1)")
        _check(self.fan_out > 0, "fan_out must be > 0")
        _check(self.gate_pitch_h > 0, "gate_pitch_h must be > 0")
        _check(self.gate_pitch_v >= 0, "gate_pitch_v must be >= 0")
        _check(int(self.gz) == self.gz and self.gz >= 1, "gz must be an integer >= 1")
        _check(int(self.n_gates) == self.n_gates and self.n_gates >= 2, "n_gates must be an integer >= 2")
        object.__setattr__(self, "gz", int(self.gz))
        object.__setattr__(self, "n_gates", int(self.n_gates))

    @property
    def alpha(self) -> float:
        return alpha(self.fan_out)

    @property
    def pz_pitches(self) -> float:
        """Vertical gate pitch expressed in horizontal gate pitches."""
        if self.gz == 1:
            return 0.0
        return self.gate_pitch_v / self.gate_pitch_h


@dataclass(frozen=True)
class TierParams:
    name: str
    resistivity: float  # uOhm*cm
    aspect_ratio: float
    pitch: float  # nm
    beta: float
    c_per_len: float | None = None  # F/nm override of the capacitance model

    def __post_init__(self) -> None:
        _check(self.name in TIER_NAMES, f"tier name must be one of {TIER_NAMES}")
        _check(self.resistivity > 0, f"{self.name}.resistivity must be > 0")
        _check(self.aspect_ratio > 0, f"{self.name}.aspect_ratio must be > 0")
        _check(self.pitch > 0, f"{self.name}.pitch must be > 0")
        _check(0 < self.beta <= 1, f"{self.name}.beta out of (0,1]")
        _check(self.c_per_len is None or self.c_per_len > 0, f"{self.name}.c_per_len must be > 0")


@dataclass(frozen=True)
class DriverParams:
    r0: float  # Ohm
    c0: float  # F
    cp: float  # F
    a: float
    b: float

    def __post_init__(self) -> None:
        for f in fields(self):
            _check(getattr(self, f.name) > 0, f"driver.{f.name} must be > 0")


@dataclass(frozen=True)
class CapacitanceModel:
    eps_r: float = 2.5
    k_coupling: float = 1.0
    k_ground: float = 2.0

    def __post_init__(self) -> None:
        _check(self.eps_r > 0, "capacitance.eps_r must be > 0")
        _check(self.k_coupling >= 0 and self.k_ground >= 0, "capacitance factors must be >= 0")
        _check(self.k_coupling + self.k_ground > 0, "capacitance factors must not both be 0")


@dataclass(frozen=True)
class MaterialProps:
    name: str
    thermal_conductivity: float  # W/(m K)
    dims: tuple[float, float, float]  # (length along heat path, width, thickness) nm

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(float(d) for d in self.dims))
        _check(len(self.dims) == 3, f"material {self.name}: dims needs 3 entries")
        _check(self.thermal_conductivity > 0, f"material {self.name}: conductivity must be > 0")
        _check(all(d > 0 for d in self.dims), f"material {self.name}: dims must be > 0")

    @property
    def resistance(self) -> float:
        from .thermal import resistor_from_geometry

        length, width, thick = self.dims
        return resistor_from_geometry(length, width * thick, self.thermal_conductivity)


@dataclass(frozen=True)
class ThermalParams:
    v_dd: float = 0.8
    i_on: float = 3.2e-5
    t_ref: float = 350.0
    nanowire_pitch: float = 66.0
    bridge_pitches: float = 10.0
    fan_in: int = 8
    gates: int = 2
    calibration_peak: float = 4307.0
    gate_half_mode: str = "doubled"
    lateral_ild: bool = False
    ild_length: float = 50.0

    def __post_init__(self) -> None:
        _check(self.v_dd >= 0 and self.i_on >= 0, "thermal v_dd/i_on must be >= 0")
        _check(self.t_ref >= 0, "thermal.t_ref must be >= 0")
        _check(self.nanowire_pitch > 0 and self.bridge_pitches > 0, "thermal pitches must be > 0")
        _check(self.fan_in >= 1 and self.gates >= 1, "thermal fan_in/gates must be >= 1")
        _check(self.calibration_peak > self.t_ref, "thermal.calibration_peak must exceed t_ref")
        _check(self.gate_half_mode in ("doubled", "midpoint"), "thermal.gate_half_mode must be doubled|midpoint")
        _check(self.ild_length > 0, "thermal.ild_length must be > 0")


@dataclass(frozen=True)
class DesignRules:
    nanowire_width: float = 16.0
    nanowire_height: float = 868.0
    nanowire_pitch: float = 66.0
    spacing: float = 16.0
    gate_height: float = 434.0
    max_fan_in: int = 8
    logic_per_signal: float = 1.0
    signal_model: str = "nets"
    signals_per_nanowire: int = 2
    hdpp_every: int = 10
    hdpp_size: int = 2
    overhead_factor: float = 1.0
    features: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check(self.nanowire_width > 0 and self.nanowire_height > 0, "layout nanowire dims must be > 0")
        _check(self.spacing > 0 and self.gate_height > 0, "layout spacing/gate_height must be > 0")
        _check(self.nanowire_pitch >= self.nanowire_width + self.spacing,
               "layout nanowire_pitch must be >= width + spacing")
        _check(1 <= self.max_fan_in <= 9, "layout max_fan_in out of [1,9]")
        _check(self.logic_per_signal > 0, "layout logic_per_signal must be > 0")
        _check(self.signal_model in ("nets", "ratio"), "layout signal_model must be nets or ratio")
        _check(self.signals_per_nanowire >= 1, "layout signals_per_nanowire must be >= 1")
        _check(self.hdpp_every >= 1 and self.hdpp_size >= 1, "layout hdpp spacing/size must be >= 1")
        _check(self.overhead_factor > 0, "layout overhead_factor must be > 0")

    @property
    def gates_per_nanowire(self) -> int:
        return max(1, round(self.nanowire_height / self.gate_height))


@dataclass(frozen=True)
class ConfigBundle:
    fabrics: Mapping[str, FabricParams]
    tiers: Mapping[str, TierParams]
    drivers: Mapping[str, DriverParams]
    capacitance: CapacitanceModel
    materials: Mapping[str, MaterialProps]
    thermal: ThermalParams
    layout: DesignRules

    def fabric(self, name: str) -> FabricParams:
        try:
            return self.fabrics[name]
        except KeyError:
            raise ConfigError(f"unknown parameter set {name!r}; known: {sorted(self.fabrics)}") from None

    def tier_list(self) -> list[TierParams]:
        return [self.tiers[n] for n in TIER_NAMES]


TIER_NAMES = ("local", "semi_global", "global")
MATERIAL_NAMES = (
    "drain_electrode", "silicide", "spacer", "channel", "gate_oxide",
    "gate_electrode", "heat_junction", "interlayer", "bridge",
)


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def alpha(fan_out: float) -> float:
    """Fraction of gate terminals that are outputs-driving-inputs: fo/(1+fo)."""
    if not fan_out > 0:
        raise ValueError("fan_out must be > 0")
    return fan_out / (1.0 + fan_out)


def default_document() -> dict[str, Any]:
    text = resources.files("vfabric").joinpath("data/default.json").read_text()
    return json.loads(text)


def _merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, Mapping) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _build(cls, data: Mapping, where: str, **extra):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    try:
        return cls(**{**data, **extra})
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def bundle_from_document(doc: Mapping[str, Any]) -> ConfigBundle:
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration root must be an object")
    doc = _merge(default_document(), doc)
    allowed = {"fabrics", "tiers", "drivers", "capacitance", "materials", "thermal", "layout"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level section(s) {sorted(unknown)}")
    fabrics = {k: _build(FabricParams, v, f"fabrics.{k}") for k, v in doc["fabrics"].items()}
    tiers = {}
    for name in TIER_NAMES:
        if name not in doc["tiers"]:
            raise ConfigError(f"tiers.{name} missing")
        tiers[name] = _build(TierParams, doc["tiers"][name], f"tiers.{name}", name=name)
    drivers = {}
    for mode in ("cmos", "skybridge"):
        if mode not in doc["drivers"]:
            raise ConfigError(f"drivers.{mode} missing")
        drivers[mode] = _build(DriverParams, doc["drivers"][mode], f"drivers.{mode}")
    materials = {}
    for name in MATERIAL_NAMES:
        if name not in doc["materials"]:
            raise ConfigError(f"materials.{name} missing")
        materials[name] = _build(MaterialProps, doc["materials"][name], f"materials.{name}", name=name)
    return ConfigBundle(
        fabrics=fabrics,
        tiers=tiers,
        drivers=drivers,
        capacitance=_build(CapacitanceModel, doc["capacitance"], "capacitance"),
        materials=materials,
        thermal=_build(ThermalParams, doc["thermal"], "thermal"),
        layout=_build(DesignRules, doc["layout"], "layout"),
    )


def load_config(path: str | Path | None = None) -> ConfigBundle:
    """Load and validate a configuration file; ``None`` gives the defaults."""
    if path is None:
        return bundle_from_document({})
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return bundle_from_document(doc)


def dump_config(bundle: ConfigBundle) -> dict[str, Any]:
    """Serialize a bundle to a JSON-compatible document (inverse of loading)."""

    def strip(obj, drop=("name",)):
        d = asdict(obj)
        for k in drop:
            d.pop(k, None)
        return d

    doc = {
        "fabrics": {k: asdict(v) for k, v in bundle.fabrics.items()},
        "tiers": {k: strip(v) for k, v in bundle.tiers.items()},
        "drivers": {k: asdict(v) for k, v in bundle.drivers.items()},
        "capacitance": asdict(bundle.capacitance),
        "materials": {k: {**strip(v), "dims": list(v.dims)} for k, v in bundle.materials.items()},
        "thermal": asdict(bundle.thermal),
        "layout": {**asdict(bundle.layout), "features": {k: dict(v) for k, v in bundle.layout.features.items()}},
    }
    return doc
