"""CSV exchange formats: loss curves, sample traces, measurement series.

Headers are part of the format contract and are matched exactly:

* curves:      ``frequency_hz,loss_db,phase_deg`` (``-inf`` legal in loss_db)
* traces:      ``t_seconds,v_volts``
* return fit:  ``c_expt_farads,loss_ratio``
* body fit:    ``r_ext_ohms,tau_seconds``

Values are written with 12 significant digits so a write/parse round trip
preserves curves to well under 1e-9 relative.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .circuit import FrequencyResponse
from .estimation import ReturnCapMeasurement, TimeConstantMeasurement
from .sampling import SampleTrace

CURVE_HEADER = ["frequency_hz", "loss_db", "phase_deg"]
TRACE_HEADER = ["t_seconds", "v_volts"]
RETURN_FIT_HEADER = ["c_expt_farads", "loss_ratio"]
BODY_FIT_HEADER = ["r_ext_ohms", "tau_seconds"]


class CsvFormatError(ValueError):
    """Malformed CSV input (bad header, bad value, unsorted grid)."""


@dataclass(frozen=True)
class CurveData:
    """Loss/phase representation of a frequency response.

    Carrying loss and phase (rather than complex transfer) keeps file-level
    operations like identity de-embedding byte-stable.
    """

    frequency_hz: np.ndarray
    loss_db: np.ndarray
    phase_deg: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequency_hz, dtype=float)
        l = np.asarray(self.loss_db, dtype=float)
        p = np.asarray(self.phase_deg, dtype=float)
        if not (f.shape == l.shape == p.shape) or f.ndim != 1 or f.size == 0:
            raise CsvFormatError("curve columns must be equal-length 1-D arrays")
        if f[0] <= 0 or np.any(np.diff(f) <= 0):
            raise CsvFormatError("curve frequencies must be ascending and positive")
        for arr in (f, l, p):
            arr.setflags(write=False)
        object.__setattr__(self, "frequency_hz", f)
        object.__setattr__(self, "loss_db", l)
        object.__setattr__(self, "phase_deg", p)

    @classmethod
    def from_response(cls, response):
        return cls(response.frequencies, response.loss_db, response.phase_deg)

    def to_response(self):
        mag = np.where(np.isneginf(self.loss_db), 0.0, 10.0 ** (self.loss_db / 20.0))
        h = mag * np.exp(1j * np.deg2rad(self.phase_deg))
        return FrequencyResponse(self.frequency_hz, h)


def _fmt(x):
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.12g}"


def _parse_float(text, where):
    try:
        return float(text)
    except ValueError:
        raise CsvFormatError(f"bad numeric value {text!r} in {where}") from None


def _read_rows(stream, header, where):
    reader = csv.reader(stream)
    try:
        first = next(reader)
    except StopIteration:
        raise CsvFormatError(f"{where}: empty file") from None
    if [c.strip() for c in first] != header:
        raise CsvFormatError(
            f"{where}: expected header {','.join(header)!r}, got {','.join(first)!r}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"{where}: line {lineno} has {len(row)} columns")
        rows.append([_parse_float(c, f"{where} line {lineno}") for c in row])
    return rows


def write_curve(path_or_stream, curve):
    """Write a :class:`CurveData` (or FrequencyResponse) as curve CSV."""
    if isinstance(curve, FrequencyResponse):
        curve = CurveData.from_response(curve)
    text = io.StringIO()
    writer = csv.writer(text, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for f, l, p in zip(curve.frequency_hz, curve.loss_db, curve.phase_deg):
        writer.writerow([_fmt(f), _fmt(l), _fmt(p)])
    _write_text(path_or_stream, text.getvalue())


def read_curve(path_or_stream):
    rows, where = _rows_from(path_or_stream, CURVE_HEADER)
    if not rows:
        raise CsvFormatError(f"{where}: no data rows")
    data = np.array(rows, dtype=float)
    return CurveData(data[:, 0], data[:, 1], data[:, 2])


def write_trace(path_or_stream, trace):
    text = io.StringIO()
    writer = csv.writer(text, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for t, v in zip(trace.times, trace.voltages):
        writer.writerow([_fmt(t), _fmt(v)])
    _write_text(path_or_stream, text.getvalue())


def read_trace(path_or_stream):
    rows, where = _rows_from(path_or_stream, TRACE_HEADER)
    if len(rows) < 2:
        raise CsvFormatError(f"{where}: a trace needs at least two samples")
    data = np.array(rows, dtype=float)
    return SampleTrace(data[:, 0], data[:, 1])


def read_return_measurements(path_or_stream):
    rows, where = _rows_from(path_or_stream, RETURN_FIT_HEADER)
    return [ReturnCapMeasurement(c, r) for c, r in rows]


def read_time_constant_measurements(path_or_stream):
    rows, where = _rows_from(path_or_stream, BODY_FIT_HEADER)
    return [TimeConstantMeasurement(r, tau) for r, tau in rows]


def _rows_from(path_or_stream, header):
    if hasattr(path_or_stream, "read"):
        return _read_rows(path_or_stream, header, "<stream>"), "<stream>"
    with open(path_or_stream, "r", newline="") as fh:
        return _read_rows(fh, header, str(path_or_stream)), str(path_or_stream)


def _write_text(path_or_stream, text):
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w", newline="") as fh:
            fh.write(text)
