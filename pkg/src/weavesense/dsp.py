"""Peak finding, baseline/noise estimation and spectral frequency estimation.

All functions are offset-agnostic: heights are compared against the signal as
given, so callers remove the baseline first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSignalError, InvalidLengthError, InvalidWindowError

MIN_QUIET_SAMPLES = 100
MIN_SPECTRUM_SAMPLES = 256


@dataclass(frozen=True)
class PeakParams:
    min_height_v: float = 0.15
    min_prominence_v: float = 0.05
    min_distance_samples: int = 1

    def __post_init__(self):
        if self.min_distance_samples < 1:
            raise ValueError("min_distance_samples must be >= 1")
        if self.min_height_v < 0 or self.min_prominence_v < 0:
            raise ValueError("peak thresholds must be non-negative")


@dataclass(frozen=True)
class PeakInfo:
    index: int
    time_s: float
    amplitude_v: float
    prominence_v: float


def estimate_baseline_noise(signal, quiet_window=None) -> tuple[float, float]:
    """Median and sample standard deviation of a quiet stretch of ``signal``.

    ``quiet_window`` is a ``(start, stop)`` pair of sample indices; the whole
    signal is used when omitted.
    """
    x = np.asarray(signal, dtype=float)
    start, stop = (0, len(x)) if quiet_window is None else quiet_window
    seg = x[start:stop]
    if len(seg) < MIN_QUIET_SAMPLES:
        raise InvalidWindowError(
            f"quiet window must span at least {MIN_QUIET_SAMPLES} samples, got {len(seg)}")
    return float(np.median(seg)), float(np.std(seg, ddof=1))


def _local_maxima(x: np.ndarray) -> np.ndarray:
    """First-sample indices of strict local maxima, plateaus included."""
    if len(x) < 3:
        return np.zeros(0, dtype=int)
    starts = np.flatnonzero(np.r_[True, x[1:] != x[:-1]])
    vals = x[starts]
    if len(vals) < 3:
        return np.zeros(0, dtype=int)
    inner = (vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])
    return starts[1:-1][inner]


def _prominence(x: np.ndarray, i: int) -> float:
    h = x[i]
    higher_left = np.flatnonzero(x[:i] > h)
    lo = higher_left[-1] + 1 if len(higher_left) else 0
    higher_right = np.flatnonzero(x[i + 1:] > h)
    hi = i + 1 + higher_right[0] if len(higher_right) else len(x)
    return float(h - max(x[lo:i + 1].min(), x[i:hi].min()))


def _enforce_distance(idx: np.ndarray, heights: np.ndarray, distance: int) -> np.ndarray:
    if distance <= 1 or len(idx) < 2:
        return idx
    order = np.lexsort((idx, -heights))  # tallest first, ties -> lower index
    keep = np.ones(len(idx), dtype=bool)
    for k in order:
        if not keep[k]:
            continue
        close = np.abs(idx - idx[k]) < distance
        close[k] = False
        keep &= ~close
    return idx[keep]


def find_peaks(signal, params: PeakParams = PeakParams(), sample_rate_hz: float = 1.0,
               t0_s: float = 0.0, index_offset: int = 0) -> list[PeakInfo]:
    """Local maxima passing height, prominence and separation filters.

    Filters apply in that order, so a low-prominence bump never suppresses a
    real peak through the distance rule. Pruning keeps the taller peak (ties
    go to the lower index). Prominence uses the usual findpeaks definition:
    height above the higher of the two minima reached before meeting a taller
    sample on either side. Returned indices are shifted by ``index_offset``
    and times are ``t0_s + index / sample_rate_hz``.
    """
    x = np.asarray(signal, dtype=float)
    idx = _local_maxima(x)
    idx = idx[x[idx] >= params.min_height_v]
    prom = np.array([_prominence(x, i) for i in idx], dtype=float)
    ok = prom >= params.min_prominence_v
    idx, prom = idx[ok], prom[ok]
    kept = _enforce_distance(idx, x[idx], params.min_distance_samples)
    prom_of = dict(zip(idx.tolist(), prom.tolist()))
    out = []
    for i in sorted(kept.tolist()):
        j = i + index_offset
        out.append(PeakInfo(index=j, time_s=t0_s + j / sample_rate_hz,
                            amplitude_v=float(x[i]), prominence_v=prom_of[i]))
    return out


def first_peak(signal, start_index: int, window_samples: int,
               params: PeakParams = PeakParams(), sample_rate_hz: float = 1.0,
               t0_s: float = 0.0) -> Optional[PeakInfo]:
    """Earliest peak with index in ``[start_index, start_index + window_samples)``.

    Peaks are searched on the captured segment padded by one sample on each
    side (where available) so the first and last window samples can qualify
    as local maxima; prominences are measured within that segment.
    """
    x = np.asarray(signal, dtype=float)
    stop = start_index + window_samples
    if start_index < 0 or window_samples < 1 or stop > len(x):
        raise InvalidWindowError(
            f"window [{start_index}, {stop}) does not fit a signal of {len(x)} samples")
    lo = max(start_index - 1, 0)
    hi = min(stop + 1, len(x))
    for pk in find_peaks(x[lo:hi], params, sample_rate_hz, t0_s, index_offset=lo):
        if start_index <= pk.index < stop:
            return pk
    return None


def estimate_natural_frequency(signal, sample_rate_hz: float) -> float:
    """Dominant frequency from a Hann-windowed magnitude spectrum.

    The maximum non-DC bin is refined by fitting a parabola through it and its
    two neighbors.
    """
    x = np.asarray(signal, dtype=float)
    n = len(x)
    if n < MIN_SPECTRUM_SAMPLES:
        raise InvalidLengthError(f"need at least {MIN_SPECTRUM_SAMPLES} samples, got {n}")
    scale = float(np.abs(x).max())
    x = x - x.mean()
    mag = np.abs(np.fft.rfft(x * np.hanning(n)))
    k = int(np.argmax(mag[1:])) + 1
    # relative to the raw level so float residue of a DC signal is rejected
    if not mag[k] > 1e-10 * n * scale:
        raise DegenerateSignalError("signal has no oscillatory content")
    offset = 0.0
    if k < len(mag) - 1:
        a, b, c = mag[k - 1], mag[k], mag[k + 1]
        denom = a - 2.0 * b + c
        if denom != 0.0:
            offset = float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
    return (k + offset) * sample_rate_hz / n
