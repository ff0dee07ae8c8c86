"""Spin-system config files.

Key-value text format with one ``[nucleus]`` block per nuclear spin::

    electron_freq = 11.885 GHz

    [nucleus]           # methylene proton
    zeeman_freq = 18.1 MHz
    a_zx = 14.2 MHz
    a_zy = 0 MHz
    a_zz = -42.7 MHz

Every frequency must carry an explicit unit suffix (Hz, kHz, MHz or GHz);
bare numbers are rejected. GHz/MHz confusion is the costliest mistake in
this domain, so parse errors name the offending line and key.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .spinsys import NucleusSpec, SpinSystem

_UNIT_TO_MHZ = {"hz": 1e-6, "khz": 1e-3, "mhz": 1.0, "ghz": 1e3}

_NUCLEUS_KEYS = {"zeeman_freq", "a_zx", "a_zy", "a_zz"}


class ConfigError(ValueError):
    """Malformed spin-system config; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None, key: str | None = None):
        loc = f"line {lineno}" if lineno is not None else "config"
        if key:
            loc += f", key {key!r}"
        super().__init__(f"{loc}: {message}")
        self.lineno = lineno
        self.key = key


def _parse_freq_mhz(value: str, lineno: int, key: str) -> float:
    parts = value.split()
    if len(parts) != 2:
        raise ConfigError(
            f"expected '<number> <unit>' with unit in Hz/kHz/MHz/GHz, got {value!r}",
            lineno, key)
    number, unit = parts
    scale = _UNIT_TO_MHZ.get(unit.lower())
    if scale is None:
        raise ConfigError(f"unknown unit {unit!r}", lineno, key)
    try:
        return float(number) * scale
    except ValueError:
        raise ConfigError(f"not a number: {number!r}", lineno, key) from None


def parse_system_config(text: str) -> SpinSystem:
    electron_freq: float | None = None
    nuclei: list[dict[str, float]] = []
    blocks_meta: list[int] = []  # line numbers, for error reporting
    current: dict[str, float] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line.lower() != "[nucleus]":
                raise ConfigError(f"unknown section {line!r}", lineno)
            current = {}
            nuclei.append(current)
            blocks_meta.append(lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (s.strip() for s in line.partition("="))
        if current is None:
            if key != "electron_freq":
                raise ConfigError(f"unknown key {key!r} (expected electron_freq "
                                  f"or a [nucleus] block)", lineno, key)
            if electron_freq is not None:
                raise ConfigError("duplicate electron_freq", lineno, key)
            electron_freq = _parse_freq_mhz(value, lineno, key)
        else:
            if key not in _NUCLEUS_KEYS:
                raise ConfigError(f"unknown nucleus key {key!r}", lineno, key)
            if key in current:
                raise ConfigError(f"duplicate key {key!r} in nucleus block", lineno, key)
            current[key] = _parse_freq_mhz(value, lineno, key)

    if electron_freq is None:
        raise ConfigError("missing required key 'electron_freq'")
    specs = []
    for block, lineno in zip(nuclei, blocks_meta):
        if "zeeman_freq" not in block:
            raise ConfigError("nucleus block missing 'zeeman_freq'", lineno)
        specs.append(NucleusSpec(
            zeeman_freq_mhz=block["zeeman_freq"],
            a_zx_mhz=block.get("a_zx", 0.0),
            a_zy_mhz=block.get("a_zy", 0.0),
            a_zz_mhz=block.get("a_zz", 0.0),
        ))
    try:
        return SpinSystem(electron_freq_mhz=electron_freq, nuclei=tuple(specs))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_system(path) -> SpinSystem:
    return parse_system_config(Path(path).read_text())


def builtin_config_path(name: str) -> Path:
    """Path of a packaged config (e.g. ``malonic_acid``); raises KeyError if
    there is no such builtin."""
    stem = name.removesuffix(".cfg")
    root = resources.files("spingate").joinpath("data")
    candidate = root.joinpath(f"{stem}.cfg")
    if not candidate.is_file():
        known = sorted(p.name.removesuffix(".cfg")
                       for p in root.iterdir() if p.name.endswith(".cfg"))
        raise KeyError(f"no builtin config {name!r}; available: {', '.join(known)}")
    return Path(str(candidate))


def resolve_config(name_or_path) -> Path:
    """Interpret an argument as a file path or, failing that, a builtin name."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    try:
        return builtin_config_path(str(name_or_path))
    except KeyError:
        raise FileNotFoundError(
            f"config {name_or_path!r} is neither a file nor a builtin") from None
