"""Command-line front end.

Subcommands: ``sweep``, ``fit-return-cap``, ``fit-body-cap``,
``estimate-amplitude``, ``deembed``, ``compare``, ``synth-trace``.

Exit codes are stable API:
  0 ok, 1 compare tolerance exceeded, 2 input/config error,
  3 numeric/solver error, 4 fit error, 5 amplitude-estimation error.

The ``HBCKIT_CONFIG_DIR`` environment variable provides a fallback directory
for ``--config`` paths that do not resolve on their own.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, estimation, sampling
from .circuit import CircuitError
from .csvio import (
    CsvFormatError,
    CurveData,
    read_curve,
    read_return_measurements,
    read_time_constant_measurements,
    read_trace,
    write_curve,
    write_trace,
)
from .deembed import (
    MIN_CHAIN_MAGNITUDE,
    DeembedError,
    DivisionBlowupError,
    chain_response,
)
from .model import (
    ModelError,
    channel_loss,
    channel_preset_names,
    log_grid,
    preset_config,
)
from .runconfig import ConfigError, RunConfig, load_config
from .units import QuantityError, format_si, parse_quantity

EXIT_OK = 0
EXIT_COMPARE_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_FIT = 4
EXIT_ESTIMATION = 5


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(code)


def _resolve_config(path):
    if os.path.exists(path):
        return path
    config_dir = os.environ.get("HBCKIT_CONFIG_DIR")
    if config_dir:
        candidate = os.path.join(config_dir, path)
        if os.path.exists(candidate):
            return candidate
    _fail(EXIT_INPUT, f"config file {path!r} not found")


def _load_run_config(args):
    if getattr(args, "config", None) and getattr(args, "preset", None):
        _fail(EXIT_INPUT, "--config and --preset are mutually exclusive")
    try:
        if getattr(args, "config", None):
            return load_config(_resolve_config(args.config))
        if getattr(args, "preset", None):
            return RunConfig(preset_config(args.preset), log_grid(), None, None)
    except (ConfigError, ModelError) as exc:
        _fail(EXIT_INPUT, str(exc))
    _fail(EXIT_INPUT, "provide --config FILE or --preset NAME")


def _emit_curve(curve, out):
    if out:
        write_curve(out, curve)
    else:
        write_curve(sys.stdout, curve)


def cmd_sweep(args):
    run = _load_run_config(args)
    try:
        response = channel_loss(run.channel, run.frequencies)
    except CircuitError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    _emit_curve(CurveData.from_response(response), args.out)
    return EXIT_OK


def cmd_fit_return_cap(args):
    try:
        cl = parse_quantity(args.cl, "F")
        measurements = read_return_measurements(args.csv)
    except (QuantityError, CsvFormatError, OSError, estimation.FitError) as exc:
        _fail(EXIT_INPUT, str(exc))
    try:
        result = estimation.fit_return_capacitance(measurements, cl)
    except estimation.FitError as exc:
        _fail(EXIT_FIT, str(exc))
    print(f"c_ret_estimate_farads = {result.estimate:.6e}")
    print(f"c_ret_estimate = {format_si(result.estimate, 'F')}")
    print(f"residual_rms = {result.residual_rms:.3e}")
    print(f"points = {len(result.per_point_residuals)}")
    return EXIT_OK


def cmd_fit_body_cap(args):
    try:
        cl = parse_quantity(args.cl, "F")
        measurements = read_time_constant_measurements(args.csv)
    except (QuantityError, CsvFormatError, OSError, estimation.FitError) as exc:
        _fail(EXIT_INPUT, str(exc))
    try:
        result = estimation.fit_body_ground_capacitance(measurements, cl)
    except estimation.FitError as exc:
        _fail(EXIT_FIT, str(exc))
    print(f"c_body_gnd_estimate_farads = {result.estimate:.6e}")
    print(f"c_body_gnd_estimate = {format_si(result.estimate, 'F')}")
    print(f"per_device_split = {format_si(result.estimate / 2, 'F')} each")
    print(f"residual_rms = {result.residual_rms:.3e}")
    return EXIT_OK


def cmd_estimate_amplitude(args):
    try:
        trace = read_trace(args.trace)
        exclude = parse_quantity(args.exclude, "V") if args.exclude else None
    except (QuantityError, CsvFormatError, OSError, ValueError) as exc:
        _fail(EXIT_INPUT, str(exc))
    try:
        est = sampling.estimate_amplitude(
            trace, bins=args.bins, zero_exclusion=exclude, repetitions=args.reps
        )
    except sampling.AmplitudeEstimationError as exc:
        _fail(EXIT_ESTIMATION, str(exc))
    except ValueError as exc:
        _fail(EXIT_INPUT, str(exc))
    print(f"amplitude_volts = {est.amplitude:.6e}")
    print(f"amplitude = {format_si(est.amplitude, 'V')}")
    print(f"spread_volts = {est.spread:.6e}")
    print(f"histograms_averaged = {est.histograms_averaged}")
    return EXIT_OK


def cmd_deembed(args):
    try:
        curve = read_curve(args.curve)
        run = load_config(_resolve_config(args.config))
    except (CsvFormatError, ConfigError, OSError) as exc:
        _fail(EXIT_INPUT, str(exc))
    if run.chain is None:
        _fail(EXIT_INPUT, "config has no [chain] section to de-embed")
    try:
        h = chain_response(run.chain, curve.frequency_hz)
        mags = np.abs(h)
        if np.any(mags <= MIN_CHAIN_MAGNITUDE):
            f_bad = float(curve.frequency_hz[int(np.argmax(mags <= MIN_CHAIN_MAGNITUDE))])
            raise DivisionBlowupError(
                f"chain magnitude underflows at {f_bad:.6g} Hz", frequency=f_bad
            )
    except DeembedError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    # operate in loss/phase space so an identity chain is byte-stable
    chain_loss_db = 20.0 * np.log10(mags)
    chain_phase = np.angle(h, deg=True)
    out = CurveData(
        curve.frequency_hz,
        curve.loss_db - chain_loss_db,
        curve.phase_deg - chain_phase,
    )
    _emit_curve(out, args.out)
    return EXIT_OK


def cmd_compare(args):
    try:
        a = read_curve(args.curve_a)
        b = read_curve(args.curve_b)
    except (CsvFormatError, OSError) as exc:
        _fail(EXIT_INPUT, str(exc))
    fa, fb = a.frequency_hz, b.frequency_hz
    if fa.size != fb.size or np.any(np.abs(fa - fb) > 1e-9 * np.maximum(fa, fb)):
        _fail(EXIT_INPUT, "frequency grids differ; cannot compare")
    both_ninf = np.isneginf(a.loss_db) & np.isneginf(b.loss_db)
    dev = np.abs(a.loss_db - b.loss_db)
    dev[both_ninf] = 0.0
    worst = int(np.nanargmax(dev))
    max_dev = float(dev[worst])
    print(
        f"max_deviation_db = {max_dev:.6g} at {fa[worst]:.6g} Hz "
        f"(tolerance {args.tol_db:.6g} dB)"
    )
    if np.isnan(max_dev) or max_dev > args.tol_db:
        print("result = FAIL")
        return EXIT_COMPARE_FAIL
    print("result = PASS")
    return EXIT_OK


def cmd_synth_trace(args):
    try:
        amplitude = parse_quantity(args.amplitude, "V")
        frequency = parse_quantity(args.frequency, "Hz")
        rate = parse_quantity(args.rate, "Hz")
        noise = parse_quantity(args.noise, "V") if args.noise else 0.0
        signal = sampling.synthesize_square(amplitude, frequency, args.duty, noise)
        trace = sampling.sample_signal(signal, rate, args.jitter, args.n, args.seed)
    except (QuantityError, ValueError) as exc:
        _fail(EXIT_INPUT, str(exc))
    if args.out:
        write_trace(args.out, trace)
    else:
        write_trace(sys.stdout, trace)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hbckit",
        description="Capacitive body-channel simulation, fitting and measurement processing.",
    )
    parser.add_argument("--version", action="version", version=f"hbckit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="simulate a channel-loss curve")
    p.add_argument("--config", help="run configuration file")
    p.add_argument(
        "--preset",
        choices=channel_preset_names(),
        help="built-in channel setup with default parameters",
    )
    p.add_argument("--out", help="write curve CSV here instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit-return-cap", help="fit return capacitance from loss ratios")
    p.add_argument("csv", help="CSV with header c_expt_farads,loss_ratio")
    p.add_argument("--cl", required=True, help="load capacitance, e.g. 13pF")
    p.set_defaults(func=cmd_fit_return_cap)

    p = sub.add_parser("fit-body-cap", help="fit body-ground capacitance from time constants")
    p.add_argument("csv", help="CSV with header r_ext_ohms,tau_seconds")
    p.add_argument("--cl", required=True, help="load capacitance, e.g. 13pF")
    p.set_defaults(func=cmd_fit_body_cap)

    p = sub.add_parser("estimate-amplitude", help="histogram amplitude estimate from a trace")
    p.add_argument("trace", help="CSV with header t_seconds,v_volts")
    p.add_argument("--bins", type=int, default=sampling.DEFAULT_BINS)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--exclude", help="zero-exclusion threshold, e.g. 30mV")
    p.set_defaults(func=cmd_estimate_amplitude)

    p = sub.add_parser("deembed", help="divide the receive-chain response out of a curve")
    p.add_argument("curve", help="measured curve CSV")
    p.add_argument("--config", required=True, help="config with a [chain] section")
    p.add_argument("--out", help="write curve CSV here instead of stdout")
    p.set_defaults(func=cmd_deembed)

    p = sub.add_parser("compare", help="compare two curves within a dB tolerance")
    p.add_argument("curve_a")
    p.add_argument("curve_b")
    p.add_argument("--tol-db", type=float, required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth-trace", help="generate a sampled square-wave trace")
    p.add_argument("--amplitude", required=True, help="e.g. 300mV")
    p.add_argument("--frequency", required=True, help="e.g. 100kHz")
    p.add_argument("--rate", required=True, help="sampling rate, e.g. 1MHz")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--duty", type=float, default=0.5)
    p.add_argument("--jitter", type=float, default=0.4, help="jitter fraction in [0, 0.5)")
    p.add_argument("--noise", help="gaussian noise sigma, e.g. 5mV")
    p.add_argument("--seed", type=int, required=True, help="RNG seed (reproducibility)")
    p.add_argument("--out", help="write trace CSV here instead of stdout")
    p.set_defaults(func=cmd_synth_trace)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except CircuitError as exc:
        _fail(EXIT_NUMERIC, str(exc))


if __name__ == "__main__":
    sys.exit(main())
