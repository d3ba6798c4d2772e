"""Scenario files: a sectioned ``key = value`` text format with a fixed schema.

Unknown sections and keys are rejected with the offending line number.
Sweep axes live in sections named ``[sweep:<section>.<key>]``.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

PRESETS = ("fig1", "fig2", "paper-nominal")


class ConfigError(ValueError):
    """Invalid scenario; ``str()`` carries the location when known."""

    def __init__(self, message: str, source: str = "", line: Optional[int] = None):
        where = source
        if line is not None:
            where = f"{source}:{line}" if source else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


# -- value parsers ------------------------------------------------------------

def _float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _complex(text: str) -> complex:
    value = complex(text.replace(" ", ""))
    if math.isnan(value.real) or math.isnan(value.imag):
        raise ValueError("NaN is not allowed")
    return value


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _float_list(text: str) -> Tuple[float, ...]:
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(_float(s) for s in items)


def _choice(*options):
    def parse(text: str) -> str:
        value = text.strip()
        if value not in options:
            raise ValueError(f"{value!r} is not one of {', '.join(options)}")
        return value

    return parse


def _choice_list(*options):
    one = _choice(*options)

    def parse(text: str) -> Tuple[str, ...]:
        items = tuple(one(s) for s in text.split(",") if s.strip())
        if not items:
            raise ValueError("empty list")
        return items

    return parse


def _str(text: str) -> str:
    return text.strip()


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Key:
    parse: Any
    default: Any
    doc: str


# None default = optional, absent unless given
SCHEMA: Dict[str, Dict[str, Key]] = {
    "drive": {
        "omega0": Key(_float, 1.0, "cavity mode frequency (sets the unit of time)"),
        "mean_delta_omega": Key(_float, 0.0, "period-averaged frequency shift <dw>"),
        "two_g": Key(_complex, 0j, "Fourier amplitude 2<g>_Omega"),
        "detuning": Key(_float_list, (0.0,), "drive detuning(s) Delta; one output case per value"),
        "n_pulses": Key(_int, 1, "number of drive periods N_pulse"),
        "steps_per_period": Key(_int, 200, "RK4 steps per drive period (>= 50)"),
        "rows_per_period": Key(_int, 20, "output rows per drive period (divides steps_per_period)"),
        "waveform": Key(_choice("default", "table"), "default", "raised-cosine waveforms or a custom table"),
        "table": Key(_str, None, "CSV with columns t,delta_omega,g_re,g_im over one period"),
        "formulations": Key(_choice_list("canonical", "instantaneous"), ("canonical", "instantaneous"),
                            "mode bases to integrate"),
    },
    "loss": {
        "q": Key(_float, math.inf, "cavity quality factor"),
    },
    "atoms": {
        "kappa": Key(_float, 3e3, "single atom-photon coupling (s^-1)"),
        "n_ryd": Key(_int, 1000, "number of Rydberg atoms"),
        "delta_e": Key(_float, 0.0, "atomic detuning omega_e - omega0 (s^-1)"),
        "transit_rate": Key(_float, None, "Gamma_tr = v/L (s^-1), defaults to kappa"),
        "omega0_si": Key(_float, 1.5e10, "cavity mode frequency in s^-1"),
        "slack": Key(_float, 1.0, "multiplicative slack on every order-of-magnitude condition"),
        "dipole": Key(_float, None, "dipole element (C m); with volume, replaces kappa"),
        "volume": Key(_float, None, "cavity volume (m^3)"),
        "mode_ratio": Key(_float, 1.0, "mode-function ratio at the atoms"),
    },
    "plan": {
        "target_n_gamma": Key(_float, 1e6, "photon-count target"),
        "laser_energy": Key(_float, None, "laser pulse energy (uJ)"),
        "r_omega": Key(_float, 0.1, "Fourier-fraction factor r_Omega"),
        "use_slab": Key(_bool, False, "add the slab-model chain from [slab]"),
        "simulate": Key(_bool, False, "integrate the drive for a reference photon number"),
    },
    "slab": {
        "mode_number": Key(_int, 1, "standing-wave index, k = n pi / L"),
        "cavity_length": Key(_float, math.pi, "cavity length L"),
        "slab_position": Key(_float, math.pi / 2, "slab position l"),
        "slab_thickness": Key(_float, 1e-3, "slab thickness delta"),
        "epsilon0": Key(_float, 1.0, "background permittivity"),
        "epsilon1": Key(_float, 12.0, "slab permittivity (constant in time)"),
        "peak_surface_density": Key(_float, 1.0, "peak of n_e delta over a pulse"),
        "e2_over_m": Key(_float, 1.0, "e^2 / m* of the carriers"),
        "k_perp": Key(_float, 0.0, "transverse wavenumber"),
        "drive_frequency": Key(_float, None, "drive Omega in slab units, defaults to 2 omega0"),
    },
    "detect": {
        "n_gamma": Key(_float, 1e6, "photon number handed to the detection model"),
    },
    "output": {
        "dir": Key(_str, "out", "output directory"),
        "plot": Key(_choice("linear", "log"), "log", "y axis of the plot script"),
        "title": Key(_str, "photon creation", "plot title"),
    },
}

SWEEP_KEYS: Dict[str, Key] = {
    "start": Key(_float, None, "first value"),
    "stop": Key(_float, None, "last value"),
    "count": Key(_int, None, "number of points (>= 1)"),
    "scale": Key(_choice("linear", "log"), "linear", "spacing"),
    "values": Key(_float_list, None, "explicit values instead of start/stop/count"),
}


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    values: Tuple[float, ...]

    @property
    def section(self) -> str:
        return self.parameter.split(".", 1)[0]

    @property
    def key(self) -> str:
        return self.parameter.split(".", 1)[1]


@dataclass(frozen=True)
class ScenarioConfig:
    values: Dict[str, Dict[str, Any]]
    sweeps: Tuple[SweepAxis, ...] = ()
    source: str = field(default="", compare=False)
    raw_sweeps: Dict[str, Dict[str, Any]] = field(default_factory=dict, compare=False)

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def with_value(self, parameter: str, value: Any) -> "ScenarioConfig":
        section, key = _split_parameter(parameter)
        values = {s: dict(v) for s, v in self.values.items()}
        values[section][key] = _coerce(section, key, value)
        return ScenarioConfig(values, self.sweeps, self.source, self.raw_sweeps)

    def canonical(self) -> dict:
        """Sorted plain-data form; the basis of the scenario hash."""
        out = {s: {k: _format(v) for k, v in sorted(kv.items()) if v is not None}
               for s, kv in sorted(self.values.items())}
        out["sweeps"] = [{"parameter": a.parameter, "values": [repr(v) for v in a.values]} for a in self.sweeps]
        return out

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def echo(self) -> str:
        """Scenario text that parses back to an equal configuration."""
        lines = [f"# scenario {self.digest()}"]
        for section in sorted(self.values):
            lines.append(f"[{section}]")
            for key in sorted(self.values[section]):
                value = self.values[section][key]
                if value is not None:
                    lines.append(f"{key} = {_format(value)}")
            lines.append("")
        for axis in self.sweeps:
            lines.append(f"[sweep:{axis.parameter}]")
            lines.append(f"values = {_format(tuple(axis.values))}")
            lines.append("")
        return "\n".join(lines)


def _split_parameter(parameter: str) -> Tuple[str, str]:
    if "." not in parameter:
        raise ConfigError(f"parameter {parameter!r} must be written as section.key")
    section, key = parameter.split(".", 1)
    if section not in SCHEMA:
        raise ConfigError(f"unknown section {section!r} in {parameter!r}")
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return section, key


def _coerce(section: str, key: str, value: Any) -> Any:
    spec = SCHEMA[section][key]
    text = value if isinstance(value, str) else _format(value)
    try:
        return spec.parse(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def defaults() -> Dict[str, Dict[str, Any]]:
    return {s: {k: spec.default for k, spec in keys.items()} for s, keys in SCHEMA.items()}


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def _line_index(text: str) -> Dict[Tuple[str, str], int]:
    """Map (section, key) to its 1-based line number."""
    index = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            index[(section, None)] = number
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index[(section, m.group(1).strip().lower())] = number
    return index


def _sweep_axis(name: str, body: Dict[str, Any], source: str, line: Optional[int]) -> SweepAxis:
    parameter = name.split(":", 1)[1].strip()
    try:
        _split_parameter(parameter)
    except ConfigError as exc:
        raise ConfigError(str(exc), source, line) from None
    if body.get("values") is not None:
        values = body["values"]
    else:
        missing = [k for k in ("start", "stop", "count") if body.get(k) is None]
        if missing:
            raise ConfigError(f"sweep over {parameter} needs values or start/stop/count", source, line)
        start, stop, count = body["start"], body["stop"], body["count"]
        if count < 1:
            raise ConfigError("sweep count must be at least 1", source, line)
        if not (math.isfinite(start) and math.isfinite(stop)):
            raise ConfigError("sweep range must be finite", source, line)
        if count == 1:
            values = (start,)
        elif body.get("scale", "linear") == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError("log sweep needs positive bounds", source, line)
            values = tuple(float(v) for v in np.geomspace(start, stop, count))
        else:
            values = tuple(float(v) for v in np.linspace(start, stop, count))
    # trim linspace round-off such as 0.009999999999999998
    values = tuple(float(f"{v:.15g}") for v in values)
    if not all(math.isfinite(v) for v in values):
        raise ConfigError("sweep values must be finite", source, line)
    return SweepAxis(parameter, tuple(values))


def parse_texts(texts: Sequence[Tuple[str, str]], overrides: Sequence[str] = ()) -> ScenarioConfig:
    """Parse ``(source, text)`` layers in order, later layers winning, then ``--set`` overrides."""
    values = defaults()
    raw_sweeps: Dict[str, Dict[str, Any]] = {}
    sweep_lines: Dict[str, Tuple[str, Optional[int]]] = {}
    last_source = ""
    for source, text in texts:
        last_source = source
        parser = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#", ";"), strict=True, default_section="__none__"
        )
        parser.optionxform = str.lower
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            line = getattr(exc, "lineno", None)
            msg = exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc)
            raise ConfigError(msg, source, line) from None
        lines = _line_index(text)
        for section in parser.sections():
            if section.startswith("sweep:"):
                schema = SWEEP_KEYS
                target = raw_sweeps.setdefault(section, {})
                sweep_lines[section] = (source, lines.get((section, None)))
            elif section in SCHEMA:
                schema = SCHEMA[section]
                target = values[section]
            else:
                raise ConfigError(f"unknown section [{section}]", source, lines.get((section, None)))
            for key, text_value in parser.items(section):
                line = lines.get((section, key))
                if key not in schema:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]", source, line)
                try:
                    target[key] = schema[key].parse(text_value)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}", source, line) from None

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        name, text_value = item.split("=", 1)
        section, key = _split_parameter(name.strip().lower())
        values[section][key] = _coerce(section, key, text_value)

    sweeps = tuple(
        _sweep_axis(name, body, *sweep_lines[name]) for name, body in sorted(raw_sweeps.items())
    )
    cfg = ScenarioConfig(values, sweeps, last_source, raw_sweeps)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    d = cfg.values["drive"]
    if d["omega0"] <= 0:
        raise ConfigError("[drive] omega0 must be positive")
    if d["n_pulses"] < 1:
        raise ConfigError("[drive] n_pulses must be at least 1")
    if d["steps_per_period"] < 50:
        raise ConfigError("[drive] steps_per_period must be at least 50")
    if d["rows_per_period"] < 1 or d["steps_per_period"] % d["rows_per_period"]:
        raise ConfigError("[drive] rows_per_period must divide steps_per_period")
    if d["waveform"] == "table" and not d["table"]:
        raise ConfigError("[drive] waveform = table needs a table path")
    if not cfg.values["loss"]["q"] > 0:
        raise ConfigError("[loss] q must be positive")
    a = cfg.values["atoms"]
    if (a["dipole"] is None) != (a["volume"] is None):
        raise ConfigError("[atoms] dipole and volume must be given together")


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("plasmadce.presets").joinpath(f"{name}.ini").read_text()


def load(
    config: Optional[str] = None, preset: Optional[str] = None, overrides: Sequence[str] = ()
) -> ScenarioConfig:
    layers: List[Tuple[str, str]] = []
    if preset:
        layers.append((f"preset:{preset}", preset_text(preset)))
    if config:
        path = Path(config)
        try:
            layers.append((str(path), path.read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_texts(layers, overrides)
