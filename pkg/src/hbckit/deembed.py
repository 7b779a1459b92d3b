"""Receive-chain response removal: flat-gain amplifier and bias high-pass.

The wearable receive chain amplifies the picked-up signal with a flat known
gain and biases it through a resistive network that adds a first-order
high-pass. Dividing the measured transfer by the chain response recovers the
bare channel. The bias corner is hardware-specific; the repo default of 5 kHz
sits below the usual 10 kHz measurement floor so a flat channel stays
representable after de-embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import FrequencyResponse

FLAT_GAIN = "flat-gain"
SINGLE_POLE_HIGHPASS = "single-pole-highpass"

#: Default bias-network corner frequency, hertz.
DEFAULT_BIAS_CORNER = 5e3

#: Chain magnitudes below this make de-embedding meaningless.
MIN_CHAIN_MAGNITUDE = 1e-12


class DeembedError(ValueError):
    """Base class for de-embedding failures."""


class DivisionBlowupError(DeembedError):
    """Chain magnitude underflowed the safe threshold at some frequency."""

    def __init__(self, message, frequency=None):
        super().__init__(message)
        self.frequency = frequency


@dataclass(frozen=True)
class ChainStage:
    """One stage: flat gain (dimensionless) or single-pole high-pass (corner Hz)."""

    kind: str
    gain: float = 1.0
    corner: float = 0.0

    def __post_init__(self):
        if self.kind == FLAT_GAIN:
            if self.gain <= 0:
                raise DeembedError("flat-gain stage needs gain > 0")
        elif self.kind == SINGLE_POLE_HIGHPASS:
            if self.corner <= 0:
                raise DeembedError("high-pass stage needs corner > 0")
        else:
            raise DeembedError(f"unknown chain stage kind {self.kind!r}")

    def response(self, f):
        f = np.asarray(f, dtype=float)
        if self.kind == FLAT_GAIN:
            return np.broadcast_to(self.gain + 0.0j, f.shape).copy() if f.shape else self.gain + 0.0j
        ratio = 1j * f / self.corner
        return ratio / (1.0 + ratio)


def flat_gain(gain):
    return ChainStage(FLAT_GAIN, gain=float(gain))


def highpass(corner):
    return ChainStage(SINGLE_POLE_HIGHPASS, corner=float(corner))


@dataclass(frozen=True)
class ReceiveChain:
    """Ordered cascade of chain stages; responses multiply."""

    stages: tuple

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise DeembedError("receive chain must hold at least one stage")
        object.__setattr__(self, "stages", stages)

    def response(self, f):
        total = np.ones(np.shape(f), dtype=complex) if np.ndim(f) else 1.0 + 0.0j
        for stage in self.stages:
            total = total * stage.response(f)
        return total


def chain_response(chain, f):
    """Complex chain response at frequency ``f`` (scalar or array)."""
    if np.any(np.asarray(f) <= 0):
        raise DeembedError("frequency must be positive")
    return chain.response(f)


def embed(response, chain):
    """Forward-compose a channel response with the receive chain."""
    h = chain_response(chain, response.frequencies)
    return FrequencyResponse(response.frequencies, response.transfer * h)


def deembed(measured, chain):
    """Divide the chain response out of a measured transfer curve.

    The frequency grid is preserved. Raises :class:`DivisionBlowupError`
    when the chain magnitude underflows :data:`MIN_CHAIN_MAGNITUDE` anywhere
    on the grid (de-embedding far below the bias corner is meaningless).
    """
    h = chain_response(chain, measured.frequencies)
    mags = np.abs(h)
    tiny = mags <= MIN_CHAIN_MAGNITUDE
    if np.any(tiny):
        f_bad = float(measured.frequencies[np.argmax(tiny)])
        raise DivisionBlowupError(
            f"chain magnitude {mags.min():.3e} at {f_bad:.6g} Hz is below "
            f"{MIN_CHAIN_MAGNITUDE}; cannot de-embed",
            frequency=f_bad,
        )
    return FrequencyResponse(measured.frequencies, measured.transfer / h)
