import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import dense_argmax, reference_peaks
from weavesense.dsp import (PeakParams, estimate_baseline_noise, estimate_natural_frequency,
                            find_peaks, first_peak)
from weavesense.errors import DegenerateSignalError, InvalidLengthError, InvalidWindowError
from weavesense.web import FiberParams, PluckEvent
from weavesense.physics import fiber_response

LOOSE = PeakParams(min_height_v=0.0, min_prominence_v=0.0)


def as_tuples(peaks):
    return [(p.index, p.amplitude_v, p.prominence_v) for p in peaks]


quantized = arrays(np.float64, st.integers(0, 64),
                   elements=st.integers(-4, 4).map(lambda v: v / 4.0))
smooth = arrays(np.float64, st.integers(0, 64),
                elements=st.floats(-1, 1, allow_nan=False, width=32))


@settings(max_examples=400, deadline=None)
@given(st.one_of(quantized, smooth), st.floats(-0.5, 0.5), st.floats(0, 1), st.integers(1, 8))
def test_matches_reference(x, h, p, d):
    got = find_peaks(x, PeakParams(max(h, 0.0), p, d))
    assert as_tuples(got) == reference_peaks(x, max(h, 0.0), p, d)


def test_prominence_matches_scipy():
    signal = pytest.importorskip("scipy.signal")
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = 10.0 + rng.standard_normal(rng.integers(3, 60))
        peaks = find_peaks(x, LOOSE)
        idx = np.array([p.index for p in peaks], dtype=int)
        ref_idx, _ = signal.find_peaks(x)
        assert np.array_equal(idx, ref_idx)
        if len(idx):
            np.testing.assert_allclose([p.prominence_v for p in peaks],
                                       signal.peak_prominences(x, idx)[0], rtol=1e-12)


@given(st.lists(st.floats(-10, 10, allow_nan=False), max_size=50))
def test_monotone_has_no_peaks(values):
    assert find_peaks(np.sort(values), LOOSE) == []
    assert find_peaks(np.sort(values)[::-1], LOOSE) == []


def test_sine_peak_at_quarter_period():
    x = np.sin(2 * np.pi * np.arange(100) / 100)
    (pk,) = find_peaks(x, LOOSE)
    assert pk.index == 25
    assert pk.amplitude_v == pytest.approx(1.0)


def test_min_distance_keeps_taller():
    x = np.zeros(20)
    x[5], x[8], x[15] = 0.5, 0.9, 0.4
    peaks = find_peaks(x, PeakParams(0.1, 0.1, 5))
    assert [p.index for p in peaks] == [8, 15]


def test_min_distance_tie_lower_index():
    x = np.zeros(12)
    x[3] = x[5] = 1.0
    assert [p.index for p in find_peaks(x, PeakParams(0.1, 0.1, 4))] == [3]


def test_plateau_reports_first_sample():
    x = np.array([0, 1, 2, 2, 2, 1, 0], dtype=float)
    assert [p.index for p in find_peaks(x, LOOSE)] == [2]


def test_edge_samples_never_peaks():
    x = np.array([3, 1, 0, 1, 3], dtype=float)
    assert find_peaks(x, LOOSE) == []


def test_height_and_time_mapping():
    x = np.array([0, 0.1, 0, 0.3, 0], dtype=float)
    (pk,) = find_peaks(x, PeakParams(0.15, 0.05, 1), sample_rate_hz=10.0, t0_s=1.0,
                       index_offset=7)
    assert pk.index == 10 and pk.time_s == pytest.approx(2.0)


def test_first_peak_picks_earliest_in_window():
    x = np.zeros(50)
    x[10], x[20], x[30] = 0.5, 1.0, 0.5
    assert first_peak(x, 15, 20).index == 20
    assert first_peak(x, 0, 50).index == 10
    assert first_peak(x, 21, 5) is None


def test_first_peak_window_edges():
    x = np.zeros(30)
    x[10] = 1.0
    # first and last window samples qualify, the sample past the end does not
    assert first_peak(x, 10, 5).index == 10
    assert first_peak(x, 6, 5).index == 10
    assert first_peak(x, 5, 5) is None


def test_first_peak_bounds():
    x = np.zeros(30)
    with pytest.raises(InvalidWindowError):
        first_peak(x, 25, 10)
    with pytest.raises(InvalidWindowError):
        first_peak(x, -1, 5)


def test_first_peak_of_damped_pluck_matches_analytic_time():
    fiber = FiberParams(index=0, tension_grams=100.0, noise_std_v=0.0)
    pluck = PluckEvent(0, 0.0, 0.5)
    f0 = fiber.natural_frequency_hz
    w0 = 2 * math.pi * f0
    zeta = fiber.damping_ratio
    wd = w0 * math.sqrt(1 - zeta ** 2)
    t_star = math.atan(wd / (zeta * w0)) / wd
    assert dense_argmax(lambda t: fiber_response(fiber, pluck, t), 0, 1 / f0, 20001) == \
        pytest.approx(t_star, abs=1e-6)
    rate = 1e4
    x = fiber_response(fiber, pluck, np.arange(1000) / rate)
    pk = first_peak(x, 0, 100, PeakParams(), rate)
    assert abs(pk.time_s - t_star) <= 0.5 / rate + 1e-12


@pytest.mark.parametrize("freq", [100.0, 81.49, 137.3])
def test_frequency_of_pure_tone(freq):
    rate, n = 1e4, 4096
    x = np.sin(2 * np.pi * freq * np.arange(n) / rate)
    assert abs(estimate_natural_frequency(x, rate) - freq) <= rate / n


@given(st.floats(0.01, 100), st.floats(0, 2 * np.pi), st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_frequency_amplitude_phase_offset_invariance(amp, phase, offset):
    rate, n = 1e4, 4096
    t = np.arange(n) / rate
    ref = estimate_natural_frequency(np.sin(2 * np.pi * 100 * t), rate)
    x = offset + amp * np.sin(2 * np.pi * 100 * t + phase)
    assert estimate_natural_frequency(x, rate) == pytest.approx(ref, abs=rate / n)


def test_frequency_of_decaying_pluck():
    fiber = FiberParams(index=0, tension_grams=150.0)
    x = fiber_response(fiber, PluckEvent(0, 0.0), np.arange(4500) / 1e4)
    assert estimate_natural_frequency(x, 1e4) == pytest.approx(fiber.natural_frequency_hz, rel=0.02)


def test_frequency_rejects_dc_and_short():
    with pytest.raises(DegenerateSignalError):
        estimate_natural_frequency(np.full(1024, 2.5), 1e4)
    with pytest.raises(InvalidLengthError):
        estimate_natural_frequency(np.sin(np.arange(100)), 1e4)


def test_baseline_noise_estimate():
    rng = np.random.default_rng(0)
    x = 2.5 + 0.005 * rng.standard_normal(20000)
    b, s = estimate_baseline_noise(x, (0, 20000))
    assert b == pytest.approx(2.5, abs=1e-3)
    assert s == pytest.approx(0.005, rel=0.05)


def test_baseline_noise_short_window():
    with pytest.raises(InvalidWindowError):
        estimate_baseline_noise(np.zeros(1000), (0, 50))
