"""Lumped bio-physical channel model: parameters, load presets, netlist builders, loss sweeps.

The channel is a two-electrode body path (electrode interface, skin layer,
internal tissue) with capacitive coupling between the body, the device ground
planes and earth ground.  Two ground regimes are supported:

* ``common-ground`` — transmitter and receiver share one ground rail (bench
  forward-path characterization).  The earth-coupling capacitors are omitted:
  they model the capacitive return, which a shared ground wire bypasses.
* ``capacitive-return`` — transmitter and receiver grounds float and the loop
  closes through the device-ground-to-earth capacitors.

Topology note (committed calibration): each electrode couples through the
interface (r_band || c_band) onto a skin-surface node, and the skin layer
(r_skin || c_skin) separates that surface from the internal tissue path.  The
body-to-ground capacitors ``c_tx_gnd``/``c_rx_gnd`` attach between the
skin-surface nodes and the *local device ground* (not earth directly), while
the feet capacitor ``c_body`` goes to earth.  Together with a raised
receiver-ground-to-earth capacitance for wall-powered instrument loads
(``LoadPreset.return_cap``), this wiring reproduces the characterized
flat-band loss levels for probe, instrument and wearable terminations.
See README "Channel topology".
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace, fields

import numpy as np

from .circuit import GROUND, Netlist, capacitor, resistor, sweep, vsource

VACUUM_PERMITTIVITY = 8.854e-12  # F/m

COMMON_GROUND = "common-ground"
CAPACITIVE_RETURN = "capacitive-return"
SINGLE_ENDED = "single-ended"
DIFFERENTIAL = "differential"

#: Upper edge of the validated modelling band; sweeps beyond it warn.
BAND_VALIDITY_MAX_HZ = 1e6

#: Receiver-ground-to-earth capacitance used for wall-powered instrument
#: loads (oscilloscope probes share a large earthed ground plane).
#: Calibrated so the probe presets land on the characterized flat-band
#: levels; see scripts/calibrate_presets.py.
INSTRUMENT_RETURN_CAP = 8e-12


class ModelError(ValueError):
    """Invalid model parameter or operation input."""


class InvalidConfigError(ModelError):
    """Disallowed ground-regime / excitation / termination combination."""


class BandValidityWarning(UserWarning):
    """Emitted when a sweep extends above the validated frequency band."""


@dataclass(frozen=True)
class ModelParameters:
    """Component values of the bio-physical channel model (SI units).

    The defaults are the characterized values: 50-ohm source, electrode
    interface 100 ohm / 200 pF, skin layer 10 kohm / 90 pF, 200-ohm internal
    tissue, 9 pF feet-to-ground, 75 pF body-to-ground at each device, 300 fF
    device-ground-to-body coupling, 1.5 pF device-ground-to-earth return at
    each end, and a 10x-probe load (10 Mohm, 13 pF).
    """

    r_s: float = 50.0
    c_band: float = 200e-12
    r_band: float = 100.0
    r_skin: float = 10e3
    c_skin: float = 90e-12
    r_body: float = 200.0
    c_body: float = 9e-12
    c_tx_gnd: float = 75e-12
    c_rx_gnd: float = 75e-12
    c_tx: float = 300e-15
    c_rx: float = 300e-15
    c_ret_tx: float = 1.5e-12
    c_ret_rx: float = 1.5e-12
    c_l: float = 13e-12
    r_l: float = 10e6

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "c_l":
                if value < 0:
                    raise ModelError("c_l must be >= 0 (0 means no shunt capacitor)")
            elif value <= 0:
                raise ModelError(f"{f.name} must be positive, got {value}")

    @classmethod
    def default(cls, load=None):
        """Characterized defaults, with ``r_l``/``c_l`` taken from ``load``."""
        params = cls()
        if load is not None:
            params = replace(params, r_l=load.r_l, c_l=load.c_l)
        return params


@dataclass(frozen=True)
class LoadPreset:
    """Receiver termination: parallel R/C plus the instrument's earth coupling.

    ``return_cap`` overrides the receiver-ground-to-earth capacitance in the
    capacitive-return regime; ``None`` keeps the wearable value from
    :class:`ModelParameters`.  Wall-powered instruments carry a much larger
    earth coupling than a wearable, which is why the probe presets set it.
    """

    name: str
    r_l: float
    c_l: float
    return_cap: float | None = None

    def __post_init__(self):
        if self.r_l <= 0:
            raise ModelError("load resistance must be positive")
        if self.c_l < 0:
            raise ModelError("load capacitance must be >= 0")
        if self.return_cap is not None and self.return_cap <= 0:
            raise ModelError("return_cap must be positive when given")


PROBE_10X = LoadPreset("probe-10x", 10e6, 13e-12, INSTRUMENT_RETURN_CAP)
PROBE_1X = LoadPreset("probe-1x", 1e6, 79e-12, INSTRUMENT_RETURN_CAP)
WEARABLE = LoadPreset("wearable", 10e6, 1e-12, None)
INSTRUMENT_50OHM = LoadPreset("instrument-50ohm", 50.0, 0.0, None)

LOAD_PRESETS = {p.name: p for p in (PROBE_10X, PROBE_1X, WEARABLE, INSTRUMENT_50OHM)}


def load_preset(name):
    """Look up a named load preset."""
    try:
        return LOAD_PRESETS[name]
    except KeyError:
        raise ModelError(
            f"unknown load preset {name!r}; choose from {sorted(LOAD_PRESETS)} or build a custom one"
        ) from None


def custom_load(r_l, c_l, return_cap=None):
    return LoadPreset("custom", float(r_l), float(c_l), return_cap)


@dataclass(frozen=True)
class ChannelConfig:
    """Excitation/termination modality, ground regime, load and parameters."""

    ground_regime: str = CAPACITIVE_RETURN
    excitation: str = SINGLE_ENDED
    termination: str = SINGLE_ENDED
    load: LoadPreset = PROBE_10X
    params: ModelParameters = None

    def __post_init__(self):
        if self.params is None:
            object.__setattr__(self, "params", ModelParameters.default(self.load))
        if self.ground_regime not in (COMMON_GROUND, CAPACITIVE_RETURN):
            raise InvalidConfigError(f"unknown ground regime {self.ground_regime!r}")
        for mode in (self.excitation, self.termination):
            if mode not in (SINGLE_ENDED, DIFFERENTIAL):
                raise InvalidConfigError(f"unknown modality {mode!r}")
        if self.ground_regime == CAPACITIVE_RETURN:
            if self.excitation != SINGLE_ENDED or self.termination != SINGLE_ENDED:
                raise InvalidConfigError(
                    "capacitive-return permits only single-ended excitation and termination"
                )
        elif self.excitation == SINGLE_ENDED and self.termination == DIFFERENTIAL:
            raise InvalidConfigError(
                "common-ground supports SE/SE, DE/SE and DE/DE only"
            )


def parallel_plate_capacitance(area, gap, rel_permittivity):
    """Parallel-plate estimate ``eps_r * eps0 * area / gap`` (SI units)."""
    if area <= 0 or gap <= 0:
        raise ModelError("area and gap must be positive")
    if rel_permittivity < 1:
        raise ModelError("relative permittivity must be >= 1")
    return rel_permittivity * VACUUM_PERMITTIVITY * area / gap


def highpass_cutoff(r_load, c_return_effective):
    """First-order corner ``1/(2*pi*R*C)`` of a resistive termination.

    This is the textbook estimate of where a resistive load turns the
    capacitive return path into a high-pass; it ignores the body-ground
    shunts, so expect agreement with the full model only within a factor
    of about two.
    """
    if r_load <= 0 or c_return_effective <= 0:
        raise ModelError("r_load and c_return_effective must be positive")
    return 1.0 / (2.0 * math.pi * r_load * c_return_effective)


def series_capacitance(*caps):
    """Series combination of capacitances."""
    if not caps or any(c <= 0 for c in caps):
        raise ModelError("series_capacitance needs positive capacitances")
    return 1.0 / sum(1.0 / c for c in caps)


def effective_return_capacitance(params, return_cap=None):
    """First-order capacitance a resistive load sees across its terminals.

    The receiver ground couples to the body through ``c_rx_gnd`` and to earth
    through the return capacitor, which closes via the transmitter return and
    the feet.  Used with :func:`highpass_cutoff` to place the resistive-
    termination corner.
    """
    c_ret_rx = params.c_ret_rx if return_cap is None else return_cap
    return params.c_rx_gnd + series_capacitance(
        c_ret_rx, params.c_ret_tx + params.c_body
    )


def log_grid(f_start=10e3, f_stop=1e6, points_per_decade=50):
    """Logarithmic frequency grid including both endpoints."""
    if f_start <= 0 or f_stop <= f_start:
        raise ModelError("need 0 < f_start < f_stop")
    if points_per_decade < 1:
        raise ModelError("points_per_decade must be >= 1")
    decades = math.log10(f_stop / f_start)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    return np.logspace(math.log10(f_start), math.log10(f_stop), n)


def _contact_chain(params, elems, outer, inner, tag):
    """Electrode interface (r_band || c_band) onto the skin surface, then the
    skin layer (r_skin || c_skin) into the internal tissue node.

    Returns the surface-node label so ground-coupling capacitors can attach
    where the body surface actually faces the device.
    """
    surface = f"surf_{tag}"
    elems.append(resistor(params.r_band, outer, surface, f"r_band_{tag}"))
    elems.append(capacitor(params.c_band, outer, surface, f"c_band_{tag}"))
    elems.append(resistor(params.r_skin, surface, inner, f"r_skin_{tag}"))
    elems.append(capacitor(params.c_skin, surface, inner, f"c_skin_{tag}"))
    return surface


def _load_elements(params, c_l, pos, neg, elems):
    elems.append(resistor(params.r_l, pos, neg, "r_l"))
    if c_l > 0:
        # receiver-ground-to-body coupling rides on the load capacitance
        elems.append(capacitor(c_l + params.c_rx, pos, neg, "c_l"))


def build_channel(config):
    """Construct the channel netlist for ``config``.

    Common-ground variants tie transmitter and receiver grounds (and omit the
    earth-coupling capacitors); capacitive-return variants route the return
    current through ``c_ret_tx``/``c_ret_rx`` to the earth-ground node.
    """
    p = config.params
    elems = []
    if config.ground_regime == CAPACITIVE_RETURN:
        tx_gnd, rx_gnd = "tx_gnd", "rx_gnd"
        elems.append(vsource(1.0, "tx_src", tx_gnd, "v_src"))
    else:
        tx_gnd = rx_gnd = GROUND
        elems.append(vsource(1.0, "tx_src", GROUND, "v_src"))

    elems.append(resistor(p.r_s, "tx_src", "tx_e", "r_s"))
    surf_tx = _contact_chain(p, elems, "tx_e", "body_tx", "tx")
    if config.excitation == DIFFERENTIAL:
        # second transmit electrode, driven by the source return terminal
        _contact_chain(p, elems, tx_gnd, "body_tx", "tx2")

    half_body = p.r_body / 2.0
    elems.append(resistor(half_body, "body_tx", "feet", "r_body_tx"))
    elems.append(resistor(half_body, "feet", "body_rx", "r_body_rx"))
    elems.append(capacitor(p.c_tx, tx_gnd, "body_tx", "c_tx"))

    surf_rx = _contact_chain(p, elems, "rx_e", "body_rx", "rx")
    _load_elements(p, config.load.c_l, "rx_e", rx_gnd, elems)
    if config.termination == DIFFERENTIAL:
        # second receive electrode, tied to the receiver ground reference
        _contact_chain(p, elems, rx_gnd, "body_rx", "rx2")

    if config.ground_regime == CAPACITIVE_RETURN:
        elems.append(capacitor(p.c_tx_gnd, surf_tx, tx_gnd, "c_tx_gnd"))
        elems.append(capacitor(p.c_rx_gnd, surf_rx, rx_gnd, "c_rx_gnd"))
        elems.append(capacitor(p.c_body, "feet", GROUND, "c_body"))
        elems.append(capacitor(p.c_ret_tx, tx_gnd, GROUND, "c_ret_tx"))
        c_ret_rx = config.load.return_cap if config.load.return_cap is not None else p.c_ret_rx
        elems.append(capacitor(c_ret_rx, rx_gnd, GROUND, "c_ret_rx"))
        output = ("rx_e", rx_gnd)
    else:
        output = "rx_e"

    return Netlist(elems, output)


def channel_loss(config, frequencies):
    """Frequency response of the configured channel.

    Warns with :class:`BandValidityWarning` when the sweep extends above
    :data:`BAND_VALIDITY_MAX_HZ`.
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.size and freqs.max() > BAND_VALIDITY_MAX_HZ:
        warnings.warn(
            f"sweep extends to {freqs.max():.3g} Hz, above the validated "
            f"{BAND_VALIDITY_MAX_HZ:.0e} Hz band",
            BandValidityWarning,
            stacklevel=2,
        )
    return sweep(build_channel(config), freqs)


_CHANNEL_PRESETS = {
    "probe-10x": (CAPACITIVE_RETURN, SINGLE_ENDED, SINGLE_ENDED, PROBE_10X),
    "probe-1x": (CAPACITIVE_RETURN, SINGLE_ENDED, SINGLE_ENDED, PROBE_1X),
    "wearable": (CAPACITIVE_RETURN, SINGLE_ENDED, SINGLE_ENDED, WEARABLE),
    "instrument-50ohm": (CAPACITIVE_RETURN, SINGLE_ENDED, SINGLE_ENDED, INSTRUMENT_50OHM),
    "common-ground-sese": (COMMON_GROUND, SINGLE_ENDED, SINGLE_ENDED, PROBE_10X),
    "common-ground-dese": (COMMON_GROUND, DIFFERENTIAL, SINGLE_ENDED, PROBE_10X),
    "common-ground-dede": (COMMON_GROUND, DIFFERENTIAL, DIFFERENTIAL, PROBE_10X),
}


def preset_config(name, params=None):
    """Named channel setup covering the characterized measurement scenarios."""
    try:
        regime, exc, term, load = _CHANNEL_PRESETS[name]
    except KeyError:
        raise ModelError(
            f"unknown channel preset {name!r}; choose from {sorted(_CHANNEL_PRESETS)}"
        ) from None
    if params is None:
        params = ModelParameters.default(load)
    else:
        params = replace(params, r_l=load.r_l, c_l=load.c_l)
    return ChannelConfig(regime, exc, term, load, params)


def channel_preset_names():
    return sorted(_CHANNEL_PRESETS)
