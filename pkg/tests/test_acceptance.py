"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
PASS lines. Tolerances are pinned here and nowhere else.
"""

import dataclasses
import math
import time
import warnings

import numpy as np

from hbckit.circuit import kcl_residual, solve_ac, transfer
from hbckit.deembed import ReceiveChain, deembed, embed, flat_gain, highpass
from hbckit.estimation import (
    ReturnCapMeasurement,
    TimeConstantMeasurement,
    fit_body_ground_capacitance,
    fit_return_capacitance,
    return_ratio,
)
from hbckit.model import (
    BandValidityWarning,
    COMMON_GROUND,
    SINGLE_ENDED,
    ChannelConfig,
    ModelParameters,
    build_channel,
    channel_loss,
    load_preset,
    log_grid,
    preset_config,
)
from hbckit.sampling import estimate_amplitude, sample_signal, synthesize_square
from netgen import random_ladder_netlist

BAND = log_grid(10e3, 1e6, 50)


def report(criterion, ok, detail):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def band_loss(preset):
    return channel_loss(preset_config(preset), BAND).loss_db


def test_criterion_01_common_ground_forward_path():
    t0 = time.perf_counter()
    losses = {}
    for name in ("common-ground-sese", "common-ground-dese", "common-ground-dede"):
        losses[name] = channel_loss(preset_config(name), np.array([100e3])).loss_db[0]
    elapsed = time.perf_counter() - t0
    se, dese, dede = (losses[k] for k in
                      ("common-ground-sese", "common-ground-dese", "common-ground-dede"))
    ok = (
        -1.5 <= se <= 0.0
        and abs(dese - (-6.0)) <= 1.5
        and abs(dede - (-10.0)) <= 1.5
        and elapsed < 1.0
    )
    report(
        1, ok,
        f"SE/SE {se:.2f} dB in [-1.5, 0], DE/SE {dese:.2f} dB = -6+/-1.5, "
        f"DE/DE {dede:.2f} dB = -10+/-1.5, runtime {elapsed*1e3:.0f} ms < 1 s",
    )


def test_criterion_02_capacitive_return_flat_band():
    l10 = band_loss("probe-10x")
    l1 = band_loss("probe-1x")
    spread10 = l10.max() - l10.min()
    ok = (
        abs(l10.mean() - (-43.0)) <= 3.0
        and spread10 < 3.0
        and abs(l1.mean() - (-47.0)) <= 3.0
        and bool(np.all(l1 < l10))
    )
    report(
        2, ok,
        f"probe-10x mean {l10.mean():.2f} dB (-43+/-3) spread {spread10:.2f} dB < 3, "
        f"probe-1x mean {l1.mean():.2f} dB (-47+/-3), 1x lossier at all "
        f"{len(BAND)} points",
    )


def test_criterion_03_wearable_preset():
    l10 = band_loss("probe-10x")
    l1 = band_loss("probe-1x")
    lw = band_loss("wearable")
    spread = lw.max() - lw.min()
    gap = l10.mean() - lw.mean()
    ok = (
        -55.0 <= lw.mean() <= -46.0
        and spread < 3.0
        and bool(np.all(lw < l10))
        and bool(np.all(lw < l1))
        and 6.0 <= gap <= 12.0
    )
    report(
        3, ok,
        f"wearable mean {lw.mean():.2f} dB in [-55, -46], spread {spread:.2f} dB < 3, "
        f"lossier than both probes pointwise, gap to 10x {gap:.2f} dB in [6, 12]",
    )


def test_criterion_04_fifty_ohm_termination_pessimism():
    fifty = load_preset("instrument-50ohm")
    cg = ChannelConfig(COMMON_GROUND, SINGLE_ENDED, SINGLE_ENDED, fifty,
                       ModelParameters.default(fifty))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandValidityWarning)
        plateau = channel_loss(cg, log_grid(10e3, 100e6, 25)).loss_db.max()

    ret = channel_loss(preset_config("instrument-50ohm"), BAND).loss_db
    i10k = int(np.argmin(np.abs(BAND - 10e3)))
    i100k = int(np.argmin(np.abs(BAND - 100e3)))
    slope = (ret[i100k] - ret[i10k]) / math.log10(BAND[i100k] / BAND[i10k])
    ok = abs(plateau - (-20.0)) <= 5.0 and abs(slope - 20.0) <= 2.0
    report(
        4, ok,
        f"common-ground 50-ohm flat-region loss {plateau:.2f} dB = -20+/-5; "
        f"capacitive-return 50-ohm low-frequency slope {slope:.2f} dB/dec = +20+/-2",
    )


def test_criterion_05_capacitive_termination_gain():
    cap = channel_loss(preset_config("probe-10x"), np.array([10e3])).loss_db[0]
    res = channel_loss(preset_config("instrument-50ohm"), np.array([10e3])).loss_db[0]
    gain = cap - res
    ok = gain >= 40.0
    report(5, ok, f"10 kHz: capacitive {cap:.1f} dB vs 50-ohm {res:.1f} dB, gain {gain:.1f} dB >= 40")


def test_criterion_06_source_impedance_ordering():
    base = preset_config("probe-10x")
    losses = []
    for r_s in (50.0, 10e3, 1e6):
        cfg = dataclasses.replace(base, params=dataclasses.replace(base.params, r_s=r_s))
        losses.append(channel_loss(cfg, np.array([1e6])).loss_db[0])
    ok = losses[0] > losses[1] > losses[2]
    report(
        6, ok,
        "loss at 1 MHz strictly increases over R_s {50, 10k, 1M}: "
        + " > ".join(f"{l:.2f}" for l in losses) + " dB",
    )


def test_criterion_07_estimation_round_trips():
    t0 = time.perf_counter()
    # exact data to 0.1%
    c_expt = np.array([0.0, 1.0, 2.2, 3.3, 4.7, 10.0]) * 1e-12
    exact = [
        ReturnCapMeasurement(c, float(return_ratio(c, 1.5e-12, 13e-12))) for c in c_expt
    ]
    fit_exact = fit_return_capacitance(exact, 13e-12)
    exact_err = abs(fit_exact.estimate - 1.5e-12) / 1.5e-12

    # 1% multiplicative ratio noise, 1000-seed Monte-Carlo mean to 10%
    estimates = np.empty(1000)
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        ratios = return_ratio(c_expt, 1.5e-12, 13e-12) * (
            1.0 + 0.01 * rng.standard_normal(c_expt.size)
        )
        ms = [ReturnCapMeasurement(c, r) for c, r in zip(c_expt, ratios)]
        estimates[seed] = fit_return_capacitance(ms, 13e-12).estimate
    mc_err = abs(estimates.mean() - 1.5e-12) / 1.5e-12

    body = fit_body_ground_capacitance([TimeConstantMeasurement(1e6, 163e-6)], 13e-12)
    body_err = abs(body.estimate - 150e-12) / 150e-12
    elapsed = time.perf_counter() - t0
    ok = exact_err <= 1e-3 and mc_err <= 0.10 and body_err <= 1e-9 and elapsed < 5.0
    report(
        7, ok,
        f"exact return fit err {exact_err:.2e} <= 1e-3, 1000-seed MC mean err "
        f"{mc_err:.2%} <= 10%, body fit err {body_err:.2e} (150 pF exact), "
        f"runtime {elapsed:.2f} s < 5 s",
    )


def test_criterion_08_amplitude_estimator():
    t0 = time.perf_counter()
    # 300 mV square sampled below Nyquist with jitter: within one bin width
    sig = synthesize_square(0.3, 500e3, 0.5, 0.0)
    trace = sample_signal(sig, 400e3, 0.4, 6000, seed=7)
    est = estimate_amplitude(trace, bins=64, repetitions=4)
    bin_width = 0.3 / 64
    anchor_err = abs(est.amplitude - 0.3)

    # Monte-Carlo mean error <= 5% at sigma = 2% of amplitude
    errors = []
    for seed in range(100):
        sig_n = synthesize_square(1.0, 1e6, 0.5, 0.02)
        tr = sample_signal(sig_n, 1e6, 0.4, 16000, seed=seed)
        errors.append(abs(estimate_amplitude(tr, bins=64, repetitions=10).amplitude - 1.0))
    mc_err = float(np.mean(errors))

    # sub-Nyquist vs 10x oversampled mean estimates within 2 bin widths
    f = 100e3
    means = []
    for rate in (0.8 * f, 10 * f):
        amps = []
        for seed in range(50):
            sig_s = synthesize_square(0.3, f, 0.5, 0.003)
            tr = sample_signal(sig_s, rate, 0.4, 8000, seed=seed)
            amps.append(estimate_amplitude(tr, bins=64, repetitions=4).amplitude)
        means.append(np.mean(amps))
    rate_gap = abs(means[0] - means[1])
    elapsed = time.perf_counter() - t0
    ok = (
        anchor_err <= bin_width
        and mc_err <= 0.05
        and rate_gap < 2 * bin_width
        and elapsed < 30.0
    )
    report(
        8, ok,
        f"300 mV sub-Nyquist err {anchor_err*1e3:.2f} mV <= bin {bin_width*1e3:.2f} mV, "
        f"MC mean err {mc_err:.2%} <= 5%, sub-Nyquist vs oversampled gap "
        f"{rate_gap*1e3:.2f} mV < 2 bins, runtime {elapsed:.1f} s < 30 s",
    )


def test_criterion_09_deembedding():
    from hbckit.circuit import FrequencyResponse

    freqs = log_grid(10e3, 1e6, 50)
    channel = FrequencyResponse(freqs, np.full(freqs.size, 10 ** (-50 / 20), dtype=complex))
    chain = ReceiveChain((flat_gain(12.0), highpass(5e3)))
    recovered = deembed(embed(channel, chain), chain)
    worst = np.abs(recovered.loss_db - (-50.0)).max()
    ok = worst <= 0.05
    report(9, ok, f"compose-then-invert worst deviation {worst:.2e} dB <= 0.05 dB")


def test_criterion_10_solver_properties():
    # KCL residual on every model netlist across the swept band
    worst_resid = 0.0
    for name in ("probe-10x", "probe-1x", "wearable", "instrument-50ohm",
                 "common-ground-sese", "common-ground-dese", "common-ground-dede"):
        net = build_channel(preset_config(name))
        for f in BAND[::10]:
            v = solve_ac(net, f)
            worst_resid = max(worst_resid, kcl_residual(net, f, v))

    # passivity over 1000 randomized R/C netlists
    rng = np.random.default_rng(2024)
    worst_gain = 0.0
    for _ in range(1000):
        net = random_ladder_netlist(rng)
        f = 10.0 ** rng.uniform(2, 7)
        worst_gain = max(worst_gain, abs(transfer(net, f)))

    # series/shunt divider closed form to 1e-9
    from hbckit.circuit import GROUND, Netlist, capacitor, resistor, vsource

    worst_div = 0.0
    for _ in range(300):
        r = 10.0 ** rng.uniform(1, 6)
        c = 10.0 ** rng.uniform(-12, -8)
        f = 10.0 ** rng.uniform(2, 7)
        net = Netlist(
            [
                vsource(1.0, "in", GROUND),
                resistor(r, "in", "out", "r"),
                capacitor(c, "out", GROUND, "c"),
            ],
            output="out",
        )
        z_c = 1.0 / (2j * math.pi * f * c)
        expected = z_c / (r + z_c)
        worst_div = max(worst_div, abs(transfer(net, f) - expected) / abs(expected))

    ok = worst_resid <= 1e-9 and worst_gain <= 1.0 + 1e-9 and worst_div <= 1e-9
    report(
        10, ok,
        f"model-netlist KCL residual {worst_resid:.2e} <= 1e-9, passivity max |H| "
        f"{worst_gain:.12f} <= 1 over 1000 netlists, divider oracle err {worst_div:.2e} <= 1e-9",
    )
