"""Structured-text run configuration (INI sections with unit-suffixed values).

Example::

    [channel]
    regime = capacitive-return
    excitation = single-ended
    termination = single-ended
    load = probe-10x

    [model]
    r_s = 50ohm
    c_ret_rx = 1.5pF

    [sweep]
    f_start = 10kHz
    f_stop = 1MHz
    points_per_decade = 50

    [chain]
    stage1 = gain 12
    stage2 = highpass 5kHz

    [compare]
    tol_db = 3

Unknown sections or keys are rejected; every diagnostic names the section
and key it refers to.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace

import numpy as np

from . import model as model_mod
from .deembed import ReceiveChain, flat_gain, highpass
from .model import (
    ChannelConfig,
    ModelParameters,
    custom_load,
    load_preset,
    log_grid,
)
from .units import QuantityError, parse_quantity


class ConfigError(ValueError):
    """Malformed run configuration; message carries section/key context."""


_MODEL_UNITS = {"r": "ohm", "c": "F"}

_CHANNEL_KEYS = {"regime", "excitation", "termination", "load"}
_LOAD_KEYS = {"r_l", "c_l", "return_cap"}
_SWEEP_KEYS = {"f_start", "f_stop", "points_per_decade"}
_COMPARE_KEYS = {"tol_db"}

_SECTIONS = {"channel", "load", "model", "sweep", "chain", "compare"}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration: channel setup, sweep grid, chain, tolerances."""

    channel: ChannelConfig
    frequencies: np.ndarray
    chain: ReceiveChain | None
    tol_db: float | None


def _quantity(section, key, raw, expect_unit=None):
    try:
        value = parse_quantity(raw, expect_unit)
    except QuantityError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc
    return value


def _positive(section, key, value, allow_zero=False):
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(f"[{section}] {key}: value must be positive, got {value}")
    return value


def _parse_chain(items):
    stages = []
    for key in sorted(items, key=lambda k: (len(k), k)):
        if not key.startswith("stage"):
            raise ConfigError(f"[chain] unknown key {key!r} (use stage1, stage2, ...)")
        spec = items[key].strip()
        parts = spec.split(None, 1)
        if len(parts) != 2:
            raise ConfigError(f"[chain] {key}: expected '<kind> <value>', got {spec!r}")
        kind, value = parts
        if kind in ("gain", "flat-gain"):
            stages.append(flat_gain(_positive("chain", key, _quantity("chain", key, value))))
        elif kind in ("highpass", "single-pole-highpass"):
            stages.append(
                highpass(_positive("chain", key, _quantity("chain", key, value, "Hz")))
            )
        else:
            raise ConfigError(f"[chain] {key}: unknown stage kind {kind!r}")
    if not stages:
        raise ConfigError("[chain] section is present but holds no stages")
    return ReceiveChain(tuple(stages))


def parse_config(text):
    """Parse configuration text into a :class:`RunConfig`.

    Raises:
        ConfigError: syntax errors, unknown sections/keys, bad units or
            values; the message names the offending location.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    unknown = set(parser.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

    # [channel]
    regime = model_mod.CAPACITIVE_RETURN
    excitation = model_mod.SINGLE_ENDED
    termination = model_mod.SINGLE_ENDED
    load_name = "probe-10x"
    if parser.has_section("channel"):
        items = dict(parser["channel"])
        bad = set(items) - _CHANNEL_KEYS
        if bad:
            raise ConfigError(f"[channel] unknown key(s): {', '.join(sorted(bad))}")
        regime = items.get("regime", regime)
        excitation = items.get("excitation", excitation)
        termination = items.get("termination", termination)
        load_name = items.get("load", load_name)

    # [load]
    load_overrides = {}
    if parser.has_section("load"):
        items = dict(parser["load"])
        bad = set(items) - _LOAD_KEYS
        if bad:
            raise ConfigError(f"[load] unknown key(s): {', '.join(sorted(bad))}")
        if "r_l" in items:
            load_overrides["r_l"] = _positive(
                "load", "r_l", _quantity("load", "r_l", items["r_l"], "ohm")
            )
        if "c_l" in items:
            load_overrides["c_l"] = _positive(
                "load", "c_l", _quantity("load", "c_l", items["c_l"], "F"), allow_zero=True
            )
        if "return_cap" in items:
            load_overrides["return_cap"] = _positive(
                "load", "return_cap", _quantity("load", "return_cap", items["return_cap"], "F")
            )

    if load_name == "custom":
        if "r_l" not in load_overrides or "c_l" not in load_overrides:
            raise ConfigError("[load] custom load needs both r_l and c_l")
        load = custom_load(
            load_overrides["r_l"], load_overrides["c_l"], load_overrides.get("return_cap")
        )
    else:
        try:
            load = load_preset(load_name)
        except model_mod.ModelError as exc:
            raise ConfigError(f"[channel] load: {exc}") from exc
        if load_overrides:
            load = replace(load, name="custom", **load_overrides)

    # [model]
    params = ModelParameters.default(load)
    if parser.has_section("model"):
        field_names = {f.name for f in fields(ModelParameters)}
        overrides = {}
        for key, raw in parser["model"].items():
            if key not in field_names:
                raise ConfigError(f"[model] unknown parameter {key!r}")
            unit = _MODEL_UNITS.get(key[0])
            value = _quantity("model", key, raw, unit)
            overrides[key] = _positive("model", key, value, allow_zero=(key == "c_l"))
        try:
            params = replace(params, **overrides)
        except model_mod.ModelError as exc:
            raise ConfigError(f"[model] {exc}") from exc

    try:
        channel = ChannelConfig(regime, excitation, termination, load, params)
    except model_mod.ModelError as exc:
        raise ConfigError(f"[channel] {exc}") from exc

    # [sweep]
    f_start, f_stop, ppd = 10e3, 1e6, 50
    if parser.has_section("sweep"):
        items = dict(parser["sweep"])
        bad = set(items) - _SWEEP_KEYS
        if bad:
            raise ConfigError(f"[sweep] unknown key(s): {', '.join(sorted(bad))}")
        if "f_start" in items:
            f_start = _positive("sweep", "f_start", _quantity("sweep", "f_start", items["f_start"], "Hz"))
        if "f_stop" in items:
            f_stop = _positive("sweep", "f_stop", _quantity("sweep", "f_stop", items["f_stop"], "Hz"))
        if "points_per_decade" in items:
            ppd = int(_positive("sweep", "points_per_decade",
                                _quantity("sweep", "points_per_decade", items["points_per_decade"])))
    if f_stop <= f_start:
        raise ConfigError("[sweep] f_stop must exceed f_start")
    frequencies = log_grid(f_start, f_stop, ppd)

    chain = _parse_chain(dict(parser["chain"])) if parser.has_section("chain") else None

    tol_db = None
    if parser.has_section("compare"):
        items = dict(parser["compare"])
        bad = set(items) - _COMPARE_KEYS
        if bad:
            raise ConfigError(f"[compare] unknown key(s): {', '.join(sorted(bad))}")
        if "tol_db" in items:
            tol_db = _positive("compare", "tol_db", _quantity("compare", "tol_db", items["tol_db"]))

    return RunConfig(channel, frequencies, chain, tol_db)


def load_config(path):
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
