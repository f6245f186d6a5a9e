"""Flat ``key = value`` scenario files.

Format::

    # comment
    comm_satellites = 4500
    comm_bandwidth_mhz = 250          # plain number, in the key's unit
    rate_threshold_mbps = 700 kbps    # or with a unit of the same dimension

Keys are the :class:`~icnrsim.scenario.ScenarioConfig` field names. Missing
keys keep their defaults; unknown or repeated keys are errors.
"""

from __future__ import annotations

import math
import re
from dataclasses import fields
from pathlib import Path

from .errors import ConfigIOError, ConfigParseError
from .scenario import ScenarioConfig

# unit -> (dimension, factor to the dimension's base unit)
UNITS = {
    "Hz": ("frequency", 1.0), "kHz": ("frequency", 1e3), "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "bps": ("rate", 1.0), "kbps": ("rate", 1e3), "Mbps": ("rate", 1e6), "Gbps": ("rate", 1e9),
    "bit": ("data", 1.0), "kbit": ("data", 1e3), "Mbit": ("data", 1e6), "Gbit": ("data", 1e9),
    "Tbit": ("data", 1e12),
    "mW": ("power", 1e-3), "W": ("power", 1.0), "kW": ("power", 1e3),
    "m": ("length", 1.0), "km": ("length", 1e3),
    "m2": ("area", 1.0), "km2": ("area", 1e6),
    "m/s": ("speed", 1.0), "km/h": ("speed", 1.0 / 3.6),
    "deg": ("angle", 1.0),
    "dB": ("ratio_db", 1.0),
}

_VALUE = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z][A-Za-z0-9/]*)?$")
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}

FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _field_kind(f):
    return f.type if isinstance(f.type, type) else {"int": int, "float": float,
                                                    "bool": bool, "str": str}[f.type]


def _parse_value(f, raw: str, line: int):
    kind = _field_kind(f)
    if kind is bool:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigParseError(f"{f.name}: expected true/false, got {raw!r}", line)
    if kind is str:
        return raw
    m = _VALUE.match(raw)
    if not m:
        raise ConfigParseError(f"{f.name}: cannot read number from {raw!r}", line)
    number = float(m.group(1))
    unit = m.group(2)
    if unit is not None:
        target = f.metadata["unit"]
        if unit not in UNITS:
            raise ConfigParseError(f"{f.name}: unknown unit {unit!r}", line)
        if target is None or UNITS[target][0] != UNITS[unit][0]:
            raise ConfigParseError(f"{f.name}: unit {unit!r} does not fit this key", line)
        if unit != target:
            number = number * UNITS[unit][1] / UNITS[target][1]
    if kind is int:
        if not math.isfinite(number) or number != int(number):
            raise ConfigParseError(f"{f.name}: expected an integer, got {raw!r}", line)
        return int(number)
    return number


def parse_config_text(text: str) -> ScenarioConfig:
    values = {}
    seen = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ConfigParseError(f"expected 'key = value', got {line.strip()!r}", lineno)
        if key not in FIELDS:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise ConfigParseError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno)
        seen[key] = lineno
        values[key] = _parse_value(FIELDS[key], raw, lineno)
    return ScenarioConfig(**values)


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigIOError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config_text(text)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(config: ScenarioConfig) -> str:
    """Canonical text form; ``parse_config_text(format_config(c)) == c``."""
    lines = ["# icnrsim scenario"]
    for name in FIELDS:
        lines.append(f"{name} = {_format_value(getattr(config, name))}")
    return "\n".join(lines) + "\n"
