"""Sub-Nyquist amplitude-estimator tests: signal synthesis, sampling, histograms."""

import numpy as np
import pytest

from hbckit.sampling import (
    AllNoiseError,
    AmplitudeEstimate,
    NoTransitionsError,
    SampleTrace,
    difference_histogram,
    estimate_amplitude,
    sample_signal,
    synthesize_square,
)


class TestSquareWave:
    def test_half_period_apart_levels_differ(self):
        sig = synthesize_square(1.0, 100e3, 0.5, 0.0)
        # 1 us and 6 us are half a 10 us period apart
        assert sig.level(1e-6) != sig.level(6e-6)
        assert {float(sig.level(1e-6)), float(sig.level(6e-6))} == {0.0, 1.0}

    def test_noiseless_takes_exactly_two_values(self):
        sig = synthesize_square(0.3, 55e3, 0.37, 0.0)
        t = np.linspace(0, 1e-3, 20011)
        assert set(np.unique(sig.level(t))) == {0.0, 0.3}

    def test_duty_sets_time_average(self):
        for duty in (0.25, 0.5, 0.8):
            sig = synthesize_square(2.0, 10e3, duty, 0.0)
            t = np.linspace(0, 1e-2, 200001)  # many whole periods, dense grid
            assert np.trapezoid(sig.level(t), t) / 1e-2 == pytest.approx(
                2.0 * duty, rel=1e-3
            )

    def test_validation(self):
        with pytest.raises(ValueError):
            synthesize_square(0.0, 1e3)
        with pytest.raises(ValueError):
            synthesize_square(1.0, 1e3, duty=1.0)
        with pytest.raises(ValueError):
            synthesize_square(1.0, 1e3, noise_sigma=-0.1)

    def test_noise_requires_generator(self):
        sig = synthesize_square(1.0, 1e3, noise_sigma=0.01)
        with pytest.raises(ValueError):
            sig.sample(np.array([0.0, 1e-4]))


class TestSampleSignal:
    def test_seed_determinism(self):
        sig = synthesize_square(1.0, 100e3, 0.5, 0.01)
        a = sample_signal(sig, 1e6, 0.3, 500, seed=99)
        b = sample_signal(sig, 1e6, 0.3, 500, seed=99)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.voltages, b.voltages)
        c = sample_signal(sig, 1e6, 0.3, 500, seed=100)
        assert not np.array_equal(c.voltages, b.voltages)

    def test_synchronous_sampling_hits_two_phases_at_most(self):
        # sampling rate an integer divisor of the period: all samples land on
        # at most as many phase points as rate/f cycles allow (here 1 phase)
        sig = synthesize_square(1.0, 100e3, 0.5, 0.0)
        trace = sample_signal(sig, 50e3, 0.0, 200, seed=0)
        assert len(np.unique(trace.voltages)) <= 2

    def test_oversampling_sees_both_levels(self):
        sig = synthesize_square(1.0, 100e3, 0.5, 0.0)
        trace = sample_signal(sig, 1e6, 0.0, 100, seed=0)
        assert set(np.unique(trace.voltages)) == {0.0, 1.0}

    def test_jitter_bounds_and_monotonicity(self):
        sig = synthesize_square(1.0, 100e3, 0.5, 0.0)
        trace = sample_signal(sig, 1e6, 0.49, 2000, seed=5)
        assert np.all(np.diff(trace.times) > 0)
        assert trace.jitter_tag == "uniform"
        with pytest.raises(ValueError):
            sample_signal(sig, 1e6, 0.5, 10, seed=0)

    def test_trace_validation(self):
        with pytest.raises(ValueError):
            SampleTrace(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            SampleTrace(np.array([0.0, 1.0]), np.array([1.0]))


class TestDifferenceHistogram:
    def test_counts_account_for_every_sample(self):
        d = np.array([0.1, 0.2, 0.3, 0.9, 0.95, 1.0])
        hist = difference_histogram(d, 10, 1.0)
        assert hist.source_count == d.size
        assert hist.counts.sum() == d.size

    def test_requires_eight_bins(self):
        with pytest.raises(ValueError):
            difference_histogram(np.array([0.5]), 4, 1.0)


def subsampled_trace(amplitude=0.3, f=500e3, rate=400e3, n=6000, noise=0.0, seed=7):
    sig = synthesize_square(amplitude, f, 0.5, noise)
    return sample_signal(sig, rate, 0.4, n, seed=seed)


class TestEstimateAmplitude:
    def test_sub_nyquist_within_one_bin(self):
        # 500 kHz square sampled at 400 kS/s: below Nyquist, jittered
        trace = subsampled_trace()
        est = estimate_amplitude(trace, bins=64, repetitions=4)
        bin_width = 0.3 / 64
        assert abs(est.amplitude - 0.3) <= bin_width
        assert est.histograms_averaged == 4

    def test_noiseless_bin_resolution_bound(self):
        for bins in (16, 64, 128):
            trace = subsampled_trace(amplitude=1.7, seed=11)
            est = estimate_amplitude(trace, bins=bins)
            assert abs(est.amplitude - 1.7) <= 1.7 / bins

    def test_determinism(self):
        trace = subsampled_trace(noise=0.01, seed=3)
        a = estimate_amplitude(trace, bins=64, repetitions=5)
        b = estimate_amplitude(trace, bins=64, repetitions=5)
        assert a == b

    def test_constant_trace_raises_no_transitions(self):
        t = np.arange(200) * 1e-6
        with pytest.raises(NoTransitionsError):
            estimate_amplitude(SampleTrace(t, np.full(200, 1.0)))

    def test_synchronous_trace_raises_no_transitions(self):
        # one sample per period, locked mid-level: every difference is zero
        sig = synthesize_square(1.0, 100e3, 0.5, 0.0)
        t = 0.25 / 100e3 + np.arange(256) / 100e3
        trace = SampleTrace(t, np.asarray(sig.level(t), dtype=float))
        assert len(np.unique(trace.voltages)) == 1
        with pytest.raises(NoTransitionsError):
            estimate_amplitude(trace)

    def test_pure_noise_raises_all_noise(self):
        rng = np.random.default_rng(0)
        t = np.arange(4000) * 1e-6
        v = 0.05 * rng.standard_normal(4000)
        with pytest.raises(AllNoiseError):
            estimate_amplitude(SampleTrace(t, v), bins=64, repetitions=2)

    def test_noisy_monte_carlo_mean_error(self):
        # 1 MHz square sampled at 1 MS/s with jitter, sigma = 2% of amplitude
        errors = []
        for seed in range(120):
            sig = synthesize_square(1.0, 1e6, 0.5, 0.02)
            trace = sample_signal(sig, 1e6, 0.4, 20000, seed=seed)
            est = estimate_amplitude(trace, bins=64, repetitions=10)
            errors.append(abs(est.amplitude - 1.0))
        assert np.mean(errors) <= 0.05

    def test_sub_nyquist_matches_oversampled(self):
        # rate 0.8x the signal frequency vs 10x oversampling
        f = 100e3
        amps = {rate: [] for rate in (0.8 * f, 10 * f)}
        for rate in amps:
            for seed in range(60):
                sig = synthesize_square(0.3, f, 0.5, 0.003)
                trace = sample_signal(sig, rate, 0.4, 8000, seed=seed)
                amps[rate].append(estimate_amplitude(trace, bins=64, repetitions=4).amplitude)
        bin_width = 0.3 / 64
        means = [np.mean(v) for v in amps.values()]
        assert abs(means[0] - means[1]) < 2 * bin_width

    def test_spread_reflects_noise(self):
        quiet = estimate_amplitude(subsampled_trace(noise=0.0, n=8000), bins=64, repetitions=4)
        noisy = estimate_amplitude(subsampled_trace(noise=0.015, n=8000), bins=64, repetitions=4)
        assert noisy.spread >= quiet.spread

    def test_validation(self):
        trace = subsampled_trace(n=100)
        with pytest.raises(ValueError):
            estimate_amplitude(trace, bins=4)
        with pytest.raises(ValueError):
            estimate_amplitude(trace, repetitions=0)
        with pytest.raises(ValueError):
            estimate_amplitude(trace, repetitions=50)  # too short for 50 segments
        with pytest.raises(ValueError):
            AmplitudeEstimate(-0.1, 0.0, 1)
