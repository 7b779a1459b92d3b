"""Histogram-based amplitude estimation for sub-Nyquist-sampled square waves.

A square wave sampled at an arbitrary (even sub-Nyquist) rate yields
consecutive-sample differences that are either ~0 (same level) or ~the signal
amplitude (a level transition was straddled).  Histogramming |differences|,
discarding the zero cluster and taking the midpoint of the dominant peak's
half-maximum run therefore recovers the amplitude without reconstructing the
waveform, independent of the sampling rate.  Averaging over repeated
histogram passes suppresses noise spread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Default number of histogram bins over [0, max|difference|].
DEFAULT_BINS = 64
#: Default zero-cluster exclusion, as a fraction of the largest difference.
DEFAULT_ZERO_EXCLUSION_FRACTION = 0.1

#: Minimum samples each repetition segment must contain.
MIN_SEGMENT_SAMPLES = 4


class AmplitudeEstimationError(ValueError):
    """Base class for amplitude-estimation failures."""


class NoTransitionsError(AmplitudeEstimationError):
    """Every difference fell below the zero-exclusion threshold.

    Happens for constant input or period-synchronous sampling.
    """


class AllNoiseError(AmplitudeEstimationError):
    """No dominant peak separates from the zero cluster."""


@dataclass(frozen=True)
class SampleTrace:
    """Time-stamped voltage samples plus sampling metadata."""

    times: np.ndarray
    voltages: np.ndarray
    rate: float = 0.0
    jitter_tag: str = "none"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.voltages, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise ValueError("times and voltages must be equal-length 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "voltages", v)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class SquareWave:
    """Square wave toggling between 0 and ``amplitude`` with gaussian noise.

    Evaluable at arbitrary times; the noise is drawn at sampling time from
    the sampler's generator so traces are reproducible from a seed.
    """

    amplitude: float
    frequency: float
    duty: float = 0.5
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty must lie in (0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def level(self, t):
        """Noise-free level at time ``t`` (scalar or array)."""
        phase = np.mod(np.asarray(t, dtype=float) * self.frequency, 1.0)
        return np.where(phase < self.duty, self.amplitude, 0.0)

    def sample(self, t, rng=None):
        values = self.level(t)
        if self.noise_sigma > 0:
            if rng is None:
                raise ValueError("noisy signals need a random generator")
            values = values + rng.normal(0.0, self.noise_sigma, size=np.shape(values))
        return values


def synthesize_square(amplitude, frequency, duty=0.5, noise_sigma=0.0):
    """Continuous square-wave description (see :class:`SquareWave`)."""
    return SquareWave(amplitude, frequency, duty, noise_sigma)


def sample_signal(signal, rate, jitter_fraction, n, seed):
    """Sample ``signal`` at ``rate`` with uniform timing jitter.

    Sample k lands at ``k/rate + uniform(+-jitter_fraction/rate)``;
    ``jitter_fraction < 0.5`` keeps timestamps strictly increasing.  The same
    seed always reproduces the same trace, noise included.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    if not 0.0 <= jitter_fraction < 0.5:
        raise ValueError("jitter_fraction must lie in [0, 0.5)")
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    times = np.arange(n) / rate
    if jitter_fraction > 0:
        times = times + rng.uniform(-jitter_fraction / rate, jitter_fraction / rate, n)
    voltages = signal.sample(times, rng)
    return SampleTrace(
        times, voltages, rate=rate, jitter_tag="uniform" if jitter_fraction > 0 else "none"
    )


@dataclass(frozen=True)
class DifferenceHistogram:
    """Histogram of retained |consecutive differences| over uniform bins."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts)
        if edges.size != counts.size + 1 or counts.size < 8:
            raise ValueError("histogram needs >= 8 bins and matching edges")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def source_count(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class AmplitudeEstimate:
    """Histogram-peak amplitude with its half-maximum spread."""

    amplitude: float
    spread: float
    histograms_averaged: int

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.spread < 0:
            raise ValueError("spread must be >= 0")


def difference_histogram(differences, bins, upper):
    """Uniform histogram of difference magnitudes over ``[0, upper]``."""
    counts, edges = np.histogram(differences, bins=bins, range=(0.0, upper))
    return DifferenceHistogram(edges, counts)


def _peak_run(hist, exclusion_edge):
    """Midpoint/width of the contiguous half-maximum run around the peak.

    Returns (midpoint, width, touches_floor): ``touches_floor`` is true when
    the run reaches down to the first bin past the exclusion threshold,
    i.e. the "peak" does not separate from the zero cluster.
    """
    counts = hist.counts
    peak = int(np.argmax(counts))
    half = counts[peak] / 2.0
    lo = peak
    while lo > 0 and counts[lo - 1] >= half:
        lo -= 1
    hi = peak
    while hi < counts.size - 1 and counts[hi + 1] >= half:
        hi += 1
    edges = hist.bin_edges
    midpoint = 0.5 * (edges[lo] + edges[hi + 1])
    width = edges[hi + 1] - edges[lo]
    floor_bin = int(np.searchsorted(edges, exclusion_edge, side="right")) - 1
    return midpoint, width, lo <= max(floor_bin, 0)


def estimate_amplitude(trace, bins=DEFAULT_BINS, zero_exclusion=None, repetitions=1):
    """Histogram-of-differences amplitude estimate for a sampled square wave.

    The trace is split into ``repetitions`` contiguous segments.  Per segment
    the |consecutive differences| are formed, values below ``zero_exclusion``
    (default: 10%% of the largest difference in the whole trace) are
    discarded, the remainder histogrammed over ``[0, max difference]`` and
    the midpoint of the dominant peak's half-maximum run recorded.  The final
    amplitude and spread average those per-segment values.

    Raises:
        NoTransitionsError: no difference exceeds the exclusion threshold.
        AllNoiseError: the dominant peak does not separate from the zero
            cluster in any segment.
    """
    if bins < 8:
        raise ValueError("bins must be >= 8")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    v = trace.voltages
    if len(v) < 2 * repetitions * MIN_SEGMENT_SAMPLES:
        raise ValueError(
            f"trace of {len(v)} samples is too short for {repetitions} repetitions"
        )

    all_diffs = np.abs(np.diff(v))
    d_max = float(all_diffs.max())
    if d_max == 0.0:
        raise NoTransitionsError("constant trace: every consecutive difference is zero")
    threshold = DEFAULT_ZERO_EXCLUSION_FRACTION * d_max if zero_exclusion is None else zero_exclusion

    segments = np.array_split(v, repetitions)
    midpoints = []
    widths = []
    for seg in segments:
        d = np.abs(np.diff(seg))
        d = d[d >= threshold]
        if d.size == 0:
            continue
        hist = difference_histogram(d, bins, d_max)
        midpoint, width, touches_floor = _peak_run(hist, threshold)
        if touches_floor:
            raise AllNoiseError(
                "dominant histogram peak does not separate from the zero cluster"
            )
        midpoints.append(midpoint)
        widths.append(width)
    if not midpoints:
        raise NoTransitionsError(
            "every segment's differences fell below the zero-exclusion threshold "
            "(synchronous sampling or constant input)"
        )
    return AmplitudeEstimate(
        amplitude=float(np.mean(midpoints)),
        spread=float(np.mean(widths)),
        histograms_averaged=len(midpoints),
    )
