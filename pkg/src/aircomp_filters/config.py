"""Sweep configuration files.

Plain INI text, one section per concern::

    [system]
    n_devices = 100
    n_symbols = 10
    n_copies = 10
    noise_var = 1.0
    x_min = 0
    x_max = 3

    [pulse]
    kind = gaussian
    ns_rule = affine        ; or: fixed
    ns_slope = 2
    ns_offset = 2
    ; ns_fixed = 24

    [filter]
    reg = 0.1
    include_unbiased = false

    [sweep]
    d_values = 0-10         ; ranges and/or comma lists: 0,2,4-6
    trials = 10000
    seed = 0
    resample_delays = true

Unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .experiments import ExperimentConfig

# section -> {key in file: (config field, parser)}
SCHEMA = {
    "system": {
        "n_devices": ("n_devices", int),
        "n_symbols": ("n_symbols", int),
        "n_copies": ("n_copies", int),
        "noise_var": ("noise_var", float),
        "x_min": ("x_min", float),
        "x_max": ("x_max", float),
    },
    "pulse": {
        "kind": ("pulse", str),
        "ns_rule": ("ns_rule", str),
        "ns_slope": ("ns_slope", int),
        "ns_offset": ("ns_offset", int),
        "ns_fixed": ("ns_fixed", int),
    },
    "filter": {
        "reg": ("reg", float),
        "include_unbiased": ("include_unbiased", "bool"),
    },
    "sweep": {
        "d_values": ("d_values", "range"),
        "trials": ("n_trials", int),
        "seed": ("seed", int),
        "resample_delays": ("resample_delays", "bool"),
    },
}


class ConfigError(ValueError):
    pass


def parse_int_list(text: str) -> tuple[int, ...]:
    """``"0-3,7"`` -> ``(0, 1, 2, 3, 7)``."""
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError(f"empty integer list {text!r}")
    return tuple(out)


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    unknown = [f"[{s}]" for s in parser.sections() if s not in SCHEMA]
    for section in parser.sections():
        if section in SCHEMA:
            unknown += [f"{section}.{k}" for k in parser[section] if k not in SCHEMA[section]]
    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(unknown))

    values = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            field_name, kind = SCHEMA[section][key]
            try:
                if kind == "bool":
                    values[field_name] = parser[section].getboolean(key)
                elif kind == "range":
                    values[field_name] = parse_int_list(raw)
                else:
                    values[field_name] = kind(raw)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from exc
    base = base or ExperimentConfig()
    return base.replace(**values)


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(), base)


def dump_config(config: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config_text`."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (field_name, kind) in keys.items():
            value = getattr(config, field_name)
            if value is None:
                continue
            if kind == "range":
                value = ",".join(str(d) for d in value)
            elif kind == "bool":
                value = "true" if value else "false"
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
