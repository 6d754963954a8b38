"""Strict run configuration: JSON with mandatory unit suffixes.

Configurations are JSON objects validated against a fixed schema. Every
physical quantity carries its unit in the key name (``D_K``, ``B_T``,
``nu_GHz``, ``B_step_mT``) because the toolkit mixes Kelvin, GHz, Tesla,
mT and microseconds and silent unit mistakes are the dominant failure
mode. Unknown keys are errors (with their dotted path), not warnings.

Three presets ship with the package: ``lagd`` and ``gdlu`` (single-ion
parameter sets for the two Gd coordination sites) and ``gd2`` (the coupled
dimer). A parsed configuration is fully materialized with defaults, so its
hash identifies the effective run, and serialize/parse round-trips to an
identical configuration.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .ensembles import EnsembleSpec
from .epr_sim import SpectrometerSpec
from .errors import ConfigError
from .observables import ThermalGrid
from .spin_core import DimerParams, FieldSpec, SingleIonParams

__all__ = ["RunConfig", "parse_config", "load_preset", "apply_overrides", "PRESET_NAMES"]

PRESET_NAMES = ("lagd", "gdlu", "gd2")


def _num(lo=None, hi=None, lo_open=False):
    def check(value, path):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        v = float(value)
        if not np.isfinite(v):
            raise ConfigError(f"{path}: must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ConfigError(f"{path}: must be {'>' if lo_open else '>='} {lo}, got {value}")
        if hi is not None and v > hi:
            raise ConfigError(f"{path}: must be <= {hi}, got {value}")
        return value
    return check


def _int(lo=None, hi=None):
    def check(value, path):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        if lo is not None and value < lo:
            raise ConfigError(f"{path}: must be >= {lo}, got {value}")
        if hi is not None and value > hi:
            raise ConfigError(f"{path}: must be <= {hi}, got {value}")
        return value
    return check


def _bool(value, path):
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    return value


def _choice(*options):
    def check(value, path):
        if value not in options:
            raise ConfigError(f"{path}: expected one of {options}, got {value!r}")
        return value
    return check


def _vec3(value, path):
    if (not isinstance(value, list) or len(value) != 3
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in value)):
        raise ConfigError(f"{path}: expected a 3-vector of numbers, got {value!r}")
    if all(x == 0 for x in value):
        raise ConfigError(f"{path}: vector must be nonzero")
    return value


def _string_or_null(value, path):
    if value is not None and not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string or null, got {value!r}")
    return value


def _string(value, path):
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


_SITE_SCHEMA = {
    "D_K": _num(),
    "E_K": _num(),
    "g": _num(lo=0, lo_open=True),
    "s": _num(lo=0, lo_open=True),
}

_SITE_DEFAULTS = {"g": 1.99, "s": 3.5}

_BLOCK_SCHEMA = {
    "field": {"B_T": _num(lo=0), "direction": _vec3},
    "spectrometer": {
        "nu_GHz": _num(lo=0, lo_open=True),
        "B_start_T": _num(lo=0),
        "B_stop_T": _num(lo=0, lo_open=True),
        "B_step_mT": _num(lo=0, lo_open=True),
        "linewidth_fwhm_mT": _num(lo=0, lo_open=True),
        "temperature_K": _num(lo=0, lo_open=True),
    },
    "thermal": {
        "T_start_K": _num(lo=0, lo_open=True),
        "T_stop_K": _num(lo=0, lo_open=True),
        "n_points": _int(lo=2),
        "log_spacing": _bool,
    },
    "ensemble": {
        "n_orientations": _int(lo=1),
        "d_strain_fwhm": _num(lo=0),
        "e_strain_fwhm": _num(lo=0),
        "n_strain_samples": _int(lo=1),
        "seed": _int(lo=0),
        "strain_stream": _int(lo=0, hi=1),
    },
    "drive": {"direction": _vec3, "half_factor": _bool},
    "universality": {
        "threshold_MHz_per_mT": _num(lo=0),
        "resolvability_MHz": _num(lo=0),
    },
    "chi": {"probe_field_T": _num(lo=0, lo_open=True)},
    "spectrum": {"kind": _choice("absorption", "first_derivative")},
    "heatcap": {"baseline_csv": _string_or_null},
    "fit": {"max_evals": _int(lo=10)},
    "nutation": {
        "window": _choice("none", "hann"),
        "zero_pad_factor": _int(lo=1),
        "noise_floor_multiple": _num(lo=0, lo_open=True),
        "nitrogen": _choice("N14", "N15"),
    },
    "output": {"dir": _string},
}

_BLOCK_DEFAULTS = {
    "field": {"B_T": 0.5, "direction": [1.0, 1.0, 1.0]},
    "spectrometer": {
        "nu_GHz": 9.886,
        "B_start_T": 0.01,
        "B_stop_T": 1.2,
        "B_step_mT": 1.0,
        "linewidth_fwhm_mT": 5.0,
        "temperature_K": 6.0,
    },
    "thermal": {"T_start_K": 0.1, "T_stop_K": 300.0, "n_points": 250, "log_spacing": True},
    "ensemble": {
        "n_orientations": 230,
        "d_strain_fwhm": 0.0,
        "e_strain_fwhm": 0.0,
        "n_strain_samples": 1,
        "seed": 0,
        "strain_stream": 0,
    },
    "drive": {"direction": [1.0, -1.0, 0.0], "half_factor": False},
    "universality": {"threshold_MHz_per_mT": 0.2, "resolvability_MHz": 50.0},
    "chi": {"probe_field_T": 0.1},
    "spectrum": {"kind": "first_derivative"},
    "heatcap": {"baseline_csv": None},
    "fit": {"max_evals": 4000},
    "nutation": {
        "window": "hann",
        "zero_pad_factor": 4,
        "noise_floor_multiple": 5.0,
        "nitrogen": "N14",
    },
    "output": {"dir": "."},
}


def _validate_site(raw, path) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in raw:
        if key not in _SITE_SCHEMA:
            raise ConfigError(f"unknown key: {path}.{key}")
    for key in ("D_K", "E_K"):
        if key not in raw:
            raise ConfigError(f"missing key: {path}.{key}")
    out = dict(_SITE_DEFAULTS)
    out.update(raw)
    return {k: _SITE_SCHEMA[k](v, f"{path}.{k}") for k, v in out.items()}


def _validate_system(raw) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("system: expected an object")
    kind = raw.get("kind")
    if kind not in ("single_ion", "dimer"):
        raise ConfigError("system.kind must be 'single_ion' or 'dimer'")
    allowed = {"kind", "site1"} if kind == "single_ion" else {
        "kind", "site1", "site2", "J_K", "axes_rotation_rad"
    }
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key: system.{key}")
    if "site1" not in raw:
        raise ConfigError("missing key: system.site1")
    out = {"kind": kind, "site1": _validate_site(raw["site1"], "system.site1")}
    if kind == "dimer":
        if "site2" not in raw:
            raise ConfigError("missing key: system.site2")
        if "J_K" not in raw:
            raise ConfigError("missing key: system.J_K")
        out["site2"] = _validate_site(raw["site2"], "system.site2")
        out["J_K"] = _num()(raw["J_K"], "system.J_K")
        rot = raw.get("axes_rotation_rad", [0.0, 0.0, 0.0])
        if (not isinstance(rot, list) or len(rot) != 3
                or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in rot)):
            raise ConfigError("system.axes_rotation_rad: expected three numbers")
        out["axes_rotation_rad"] = rot
    return out


@dataclass(frozen=True)
class RunConfig:
    """A fully validated, fully materialized run configuration."""

    data: dict

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.data == other.data

    # -- typed accessors ---------------------------------------------------

    def system_params(self):
        sys_block = self.data["system"]
        site1 = SingleIonParams(
            d_zfs=sys_block["site1"]["D_K"], e_zfs=sys_block["site1"]["E_K"],
            g=sys_block["site1"]["g"], s=sys_block["site1"]["s"],
        )
        if sys_block["kind"] == "single_ion":
            return site1
        site2 = SingleIonParams(
            d_zfs=sys_block["site2"]["D_K"], e_zfs=sys_block["site2"]["E_K"],
            g=sys_block["site2"]["g"], s=sys_block["site2"]["s"],
        )
        return DimerParams(
            site1=site1, site2=site2, j_exchange=sys_block["J_K"],
            axes_rotation=tuple(sys_block["axes_rotation_rad"]),
        )

    def field(self) -> FieldSpec:
        blk = self.data["field"]
        return FieldSpec.along(blk["direction"], blk["B_T"])

    def ensemble(self) -> EnsembleSpec:
        blk = self.data["ensemble"]
        return EnsembleSpec(
            n_orientations=blk["n_orientations"],
            d_strain=blk["d_strain_fwhm"],
            e_strain=blk["e_strain_fwhm"],
            n_strain_samples=blk["n_strain_samples"],
            seed=blk["seed"],
            strain_stream=blk["strain_stream"],
        )

    def spectrometer(self) -> SpectrometerSpec:
        blk = self.data["spectrometer"]
        step_t = blk["B_step_mT"] * 1e-3
        n = int(np.floor((blk["B_stop_T"] - blk["B_start_T"]) / step_t + 0.5)) + 1
        if n < 2:
            raise ConfigError("spectrometer: field grid has fewer than 2 points")
        grid = blk["B_start_T"] + step_t * np.arange(n)
        return SpectrometerSpec(
            frequency=blk["nu_GHz"],
            field_grid=grid,
            linewidth_fwhm=blk["linewidth_fwhm_mT"],
            temperature=blk["temperature_K"],
        )

    def thermal_grid(self) -> ThermalGrid:
        blk = self.data["thermal"]
        if blk["T_stop_K"] <= blk["T_start_K"]:
            raise ConfigError("thermal: T_stop_K must exceed T_start_K")
        if blk["log_spacing"]:
            temps = np.geomspace(blk["T_start_K"], blk["T_stop_K"], blk["n_points"])
        else:
            temps = np.linspace(blk["T_start_K"], blk["T_stop_K"], blk["n_points"])
        return ThermalGrid(temperatures=temps, field=self.field())

    def drive_direction(self):
        d = np.asarray(self.data["drive"]["direction"], dtype=float)
        return tuple(d / np.linalg.norm(d))

    # -- serialization -----------------------------------------------------

    def serialize(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    def config_hash(self) -> str:
        canonical = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text into a RunConfig."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    if "system" not in raw:
        raise ConfigError("missing key: system")

    data = {"system": _validate_system(raw["system"])}
    for block, schema in _BLOCK_SCHEMA.items():
        merged = copy.deepcopy(_BLOCK_DEFAULTS[block])
        user = raw.get(block, {})
        if not isinstance(user, dict):
            raise ConfigError(f"{block}: expected an object")
        for key, value in user.items():
            if key not in schema:
                raise ConfigError(f"unknown key: {block}.{key}")
            merged[key] = value
        data[block] = {k: schema[k](v, f"{block}.{k}") for k, v in merged.items()}
    for key in raw:
        if key != "system" and key not in _BLOCK_SCHEMA:
            raise ConfigError(f"unknown key: {key}")

    cfg = RunConfig(data=data)
    cfg.system_params()  # surface parameter-level validation errors now
    cfg.field()
    return cfg


def load_preset(name: str) -> str:
    """Return the text of a bundled preset configuration."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return resources.files("spinqudit.presets").joinpath(f"{name}.json").read_text()


def apply_overrides(text: str, overrides) -> str:
    """Apply ``key.path=value`` overrides to configuration text.

    Values are parsed as JSON scalars where possible, else kept as strings.
    Intermediate objects are created as needed; validation happens when the
    result is parsed.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key.path=value")
        path, _, value_text = item.partition("=")
        keys = path.strip().split(".")
        if not all(keys):
            raise ConfigError(f"override {item!r} has an empty key component")
        try:
            value = json.loads(value_text)
        except json.JSONDecodeError:
            value = value_text
        node = raw
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r} descends into a non-object")
        node[keys[-1]] = value
    return json.dumps(raw)
