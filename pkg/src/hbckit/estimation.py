"""Least-squares recovery of coupling capacitances from measurement series.

Two procedures are implemented:

* return-path capacitance from loss-ratio measurements taken with known
  capacitors added between the transmitter and receiver grounds — the loss
  ratio follows the capacitive division ``(C_expt + C_ret/2)/(C_L + C_expt +
  C_ret/2)`` under the symmetric-return assumption, and
* body-to-ground capacitance from step-response time constants measured
  through a known series resistor, ``tau = R_ext * (C_body_gnd + C_L)``.

Both fits are one-dimensional: a closed-form transformation provides the
starting point and a least-squares polish minimizes residuals in the space
the model is stated in (ratio space for the return fit, relative time for
the body fit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares


class FitError(ValueError):
    """Base class for estimation failures."""


class InsufficientDataError(FitError):
    """Too few (distinct) measurements for the requested fit."""


class NoPositiveSolutionError(FitError):
    """Measurements are inconsistent with any positive return capacitance."""


class NegativeEstimateError(FitError):
    """Time constants imply a negative capacitance (check the assumed C_L)."""


class NoSettlingError(FitError):
    """Trace contains no detectable exponential settling toward a plateau."""


@dataclass(frozen=True)
class ReturnCapMeasurement:
    """Known added ground-to-ground capacitor and the measured |Vout/Vin|."""

    c_expt: float
    loss_ratio: float

    def __post_init__(self):
        if self.c_expt < 0:
            raise FitError("c_expt must be >= 0")
        if not 0.0 < self.loss_ratio < 1.0:
            raise FitError(f"loss_ratio must lie in (0, 1), got {self.loss_ratio}")


@dataclass(frozen=True)
class TimeConstantMeasurement:
    """Series resistance and the fitted exponential time constant."""

    r_ext: float
    tau: float

    def __post_init__(self):
        if self.r_ext <= 0 or self.tau <= 0:
            raise FitError("r_ext and tau must be positive")


@dataclass(frozen=True)
class FitResult:
    estimate: float
    residual_rms: float
    per_point_residuals: tuple

    def __post_init__(self):
        if self.estimate <= 0:
            raise FitError("estimate must be positive")


def return_ratio(c_expt, c_ret, c_l):
    """Forward model: capacitive division of the equivalent return path.

    The equivalent return capacitance is the added capacitor plus the series
    combination of the two (assumed equal) device return capacitances,
    ``C_expt + C_ret/2``.
    """
    c_g = np.asarray(c_expt, dtype=float) + c_ret / 2.0
    return c_g / (c_l + c_g)


def fit_return_capacitance(measurements, c_l):
    """Estimate the per-device return capacitance from loss-ratio data.

    Args:
        measurements: ReturnCapMeasurement sequence, >= 2 distinct ``c_expt``.
        c_l: load capacitance of the receiving device, farads.

    Returns:
        FitResult with the fitted ``C_ret`` (farads) and ratio-space residuals.

    Raises:
        InsufficientDataError: fewer than two distinct capacitor values.
        NoPositiveSolutionError: the data admit no positive ``C_ret``.
    """
    if c_l <= 0:
        raise FitError("c_l must be positive")
    points = {}
    for m in measurements:
        points.setdefault(m.c_expt, []).append(m.loss_ratio)
    if len(points) < 2:
        raise InsufficientDataError(
            f"need measurements at >= 2 distinct c_expt values, got {len(points)}"
        )
    # duplicate capacitor values are averaged before fitting
    c_expt = np.array(sorted(points))
    ratios = np.array([np.mean(points[c]) for c in sorted(points)])

    # closed-form inversion per point: c_g = r*c_l/(1-r), c_ret = 2*(c_g - c_expt)
    c_g = ratios * c_l / (1.0 - ratios)
    per_point = 2.0 * (c_g - c_expt)
    start = max(float(np.mean(per_point)), 1e-3 * c_l)

    def residual(c_ret):
        return return_ratio(c_expt, c_ret[0], c_l) - ratios

    fit = least_squares(residual, x0=[start], method="lm")
    estimate = float(fit.x[0])
    if estimate <= 0:
        raise NoPositiveSolutionError(
            f"least-squares optimum {estimate:.3e} F is not positive; "
            "the measurements are inconsistent with a capacitive return"
        )
    res = residual([estimate])
    return FitResult(estimate, float(np.sqrt(np.mean(res**2))), tuple(res))


def fit_body_ground_capacitance(measurements, c_l):
    """Estimate the body-to-ground capacitance from time-constant data.

    Fits ``tau = r_ext * (C + c_l)`` by linear least squares; a single exact
    point reduces to ``tau/r_ext - c_l``.

    Raises:
        InsufficientDataError: no measurements supplied.
        NegativeEstimateError: every point implies ``tau/r_ext < c_l``.
    """
    if c_l < 0:
        raise FitError("c_l must be >= 0")
    measurements = list(measurements)
    if not measurements:
        raise InsufficientDataError("need at least one time-constant measurement")
    r = np.array([m.r_ext for m in measurements])
    tau = np.array([m.tau for m in measurements])
    # minimize sum (tau_i - r_i*(C + c_l))^2 in closed form
    estimate = float(np.sum(r * (tau - r * c_l)) / np.sum(r * r))
    if estimate <= 0:
        raise NegativeEstimateError(
            "fitted capacitance is not positive; every tau/r_ext is below the "
            "assumed load capacitance"
        )
    res = (r * (estimate + c_l) - tau) / tau
    return FitResult(estimate, float(np.sqrt(np.mean(res**2))), tuple(res))


def extract_time_constant(trace, plateau_fraction=0.1):
    """Time constant of a rising exponential settling segment.

    The plateau is the mean of the trailing ``plateau_fraction`` of samples;
    the constant comes from a log-linear fit of ``plateau - v(t)`` across the
    10%%-90%% settling window.

    Args:
        trace: object with ``times`` and ``voltages`` arrays
            (:class:`hbckit.sampling.SampleTrace` or compatible).

    Raises:
        NoSettlingError: the trace never settles toward a plateau above its
            starting level.
    """
    t = np.asarray(trace.times, dtype=float)
    v = np.asarray(trace.voltages, dtype=float)
    if t.size < 10:
        raise NoSettlingError("trace too short to detect settling")
    n_tail = max(2, int(round(plateau_fraction * t.size)))
    plateau = float(np.mean(v[-n_tail:]))
    tail_sigma = float(np.std(v[-n_tail:]))
    v0 = float(v[0])
    swing = plateau - v0
    if swing <= max(8.0 * tail_sigma, 1e-12 * max(1.0, abs(plateau))):
        raise NoSettlingError("no plateau above the starting level was found")

    u = (v - v0) / swing
    rising = np.nonzero(u >= 0.1)[0]
    settled = np.nonzero(u >= 0.9)[0]
    if rising.size == 0 or settled.size == 0:
        raise NoSettlingError("trace never crosses the settling window")
    lo, hi = rising[0], settled[0]
    window = slice(lo, hi + 1)
    gap = plateau - v[window]
    t_w = t[window][gap > 0]
    gap = gap[gap > 0]
    if t_w.size < 3:
        raise NoSettlingError("settling window holds fewer than 3 usable samples")
    slope, _ = np.polyfit(t_w, np.log(gap), 1)
    if slope >= 0:
        raise NoSettlingError("settling window is not decaying toward the plateau")
    return -1.0 / slope
