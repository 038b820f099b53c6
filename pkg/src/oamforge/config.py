"""Run configuration with explicit units.

Every length and wave number in a config file is an object
``{"value": <number>, "unit": "<unit>"}``; bare numbers are rejected so that
millimeter crystal lengths and micrometer waists can never be mixed silently.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .spdc_kernel import CrystalConfig, QuadratureSettings, WaistConfig, ktp_index, wave_number

__all__ = ["ConfigError", "RunConfig", "load_run_config", "parse_run_config", "to_um", "to_inv_um"]

_LENGTH_TO_UM = {"m": 1e6, "mm": 1e3, "um": 1.0, "µm": 1.0, "μm": 1.0, "micron": 1.0, "nm": 1e-3}
_INV_TO_INV_UM = {"1/" + k: 1 / v for k, v in _LENGTH_TO_UM.items()}
_INV_TO_INV_UM.update({k + "^-1": 1 / v for k, v in _LENGTH_TO_UM.items()})


class ConfigError(ValueError):
    pass


def _tagged(obj, name: str, table: dict) -> float:
    if not isinstance(obj, dict) or "value" not in obj or "unit" not in obj:
        raise ConfigError(f"{name} needs an explicit unit: use {{\"value\": ..., \"unit\": ...}}")
    unit = str(obj["unit"]).strip()
    if unit not in table:
        raise ConfigError(f"{name}: unsupported unit {unit!r}")
    try:
        value = float(obj["value"])
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: value must be numeric") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name}: value must be finite")
    return value * table[unit]


def to_um(obj, name: str = "length") -> float:
    return _tagged(obj, name, _LENGTH_TO_UM)


def to_inv_um(obj, name: str = "wave number") -> float:
    return _tagged(obj, name, _INV_TO_INV_UM)


def _crystal(data) -> CrystalConfig:
    if not isinstance(data, dict):
        raise ConfigError("'crystal' must be an object")
    length = to_um(data.get("length"), "crystal.length")
    poling = data.get("poling", "periodic")
    if poling not in ("periodic", True):
        raise ConfigError("crystal.poling must be 'periodic'")
    if "k_pump" in data:
        kp = to_inv_um(data["k_pump"], "crystal.k_pump")
        ks = to_inv_um(data["k_signal"], "crystal.k_signal")
        ki = to_inv_um(data.get("k_idler", data["k_signal"]), "crystal.k_idler")
    else:
        if str(data.get("material", "KTP")).upper() != "KTP":
            raise ConfigError("only KTP has a built-in Sellmeier relation; give wave numbers instead")
        axis = data.get("axis", "y")
        lp = to_um(data.get("pump_wavelength"), "crystal.pump_wavelength")
        ls = to_um(data.get("signal_wavelength"), "crystal.signal_wavelength")
        kp = wave_number(lp, ktp_index(lp, axis))
        ks = ki = wave_number(ls, ktp_index(ls, axis))
    try:
        return CrystalConfig(length, kp, ks, ki)
    except ValueError as exc:
        raise ConfigError(f"crystal: {exc}") from None


def _waists(data) -> WaistConfig:
    if not isinstance(data, dict):
        raise ConfigError("'waists' must be an object")
    wp = to_um(data.get("pump"), "waists.pump")
    if "collection" in data:
        ws = wi = to_um(data["collection"], "waists.collection")
    else:
        ws = to_um(data.get("signal"), "waists.signal")
        wi = to_um(data.get("idler", data.get("signal")), "waists.idler")
    try:
        return WaistConfig(wp, ws, wi)
    except ValueError as exc:
        raise ConfigError(f"waists: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    crystal: CrystalConfig
    waists: WaistConfig
    window: int = 12
    tolerance: float = 1e-8
    format: str = "json"
    out: Optional[str] = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise ConfigError("window must be an integer >= 1")
        if not 0 < self.tolerance <= 1e-4:
            raise ConfigError("tolerance must lie in (0, 1e-4]")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be 'json' or 'csv'")

    @property
    def quad(self) -> QuadratureSettings:
        return QuadratureSettings(rtol=self.tolerance)


def parse_run_config(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("crystal", "waists"):
        if key not in data:
            raise ConfigError(f"config is missing '{key}'")
    return RunConfig(_crystal(data["crystal"]), _waists(data["waists"]),
                     window=data.get("window", 12), tolerance=float(data.get("tolerance", 1e-8)),
                     format=data.get("format", "json"), out=data.get("out"), raw=data)


def load_run_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_run_config(data)
