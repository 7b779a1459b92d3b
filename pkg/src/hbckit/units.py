"""Unit-suffixed quantity parsing for config files and CLI flags.

Component magnitudes in this domain span femtofarads to megaohms, so bare
floats in configs are a footgun; values carry explicit suffixes instead:
``13pF``, ``10MΩ`` (ASCII ``10Mohm`` accepted), ``100kHz``, ``163us``.
A bare number is taken as already being in SI base units.
"""

from __future__ import annotations

import re

_PREFIXES = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "µ": 1e-6,
    "m": 1e-3,
    "": 1.0,
    "k": 1e3,
    "K": 1e3,
    "M": 1e6,
    "G": 1e9,
}

# longest first so "Hz" wins over a would-be "z" unit, "ohm" over "m"
_UNITS = ("ohm", "Ohm", "OHM", "Hz", "HZ", "hz", "Ω", "F", "V", "s", "S")

_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(\S*)\s*$")


class QuantityError(ValueError):
    """Unparseable quantity literal."""


def parse_quantity(text, expect_unit=None):
    """Parse a suffixed literal like ``"13pF"`` into an SI float.

    Args:
        text: the literal (a plain number also passes through as SI).
        expect_unit: canonical unit to require, one of ``"F"``, ``"ohm"``,
            ``"Hz"``, ``"V"``, ``"s"`` — mismatched units are rejected;
            suffix-less numbers are always accepted.

    Raises:
        QuantityError: malformed number, unknown prefix or wrong unit.
    """
    if isinstance(text, (int, float)):
        return float(text)
    match = _NUMBER.match(text)
    if not match:
        raise QuantityError(f"cannot parse quantity {text!r}")
    value = float(match.group(1))
    suffix = match.group(2)
    if not suffix:
        return value

    unit = ""
    for candidate in _UNITS:
        if suffix.endswith(candidate):
            unit = candidate
            suffix = suffix[: -len(candidate)]
            break
    prefix = suffix
    if prefix not in _PREFIXES:
        raise QuantityError(f"unknown prefix {prefix!r} in quantity {text!r}")
    if expect_unit is not None and unit:
        canonical = {"Ω": "ohm", "Ohm": "ohm", "OHM": "ohm", "HZ": "Hz", "hz": "Hz"}.get(unit, unit)
        if canonical != expect_unit:
            raise QuantityError(
                f"expected a quantity in {expect_unit}, got {text!r}"
            )
    return value * _PREFIXES[prefix]


def format_si(value, unit=""):
    """Engineering-notation rendering, e.g. ``1.5e-12 -> '1.5pF'``."""
    if value == 0:
        return f"0{unit}"
    magnitude = abs(value)
    for factor, prefix in (
        (1e9, "G"),
        (1e6, "M"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "u"),
        (1e-9, "n"),
        (1e-12, "p"),
        (1e-15, "f"),
    ):
        if magnitude >= factor:
            return f"{value / factor:.4g}{prefix}{unit}"
    return f"{value:.4g}{unit}"
