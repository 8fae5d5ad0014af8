"""Impulse detection and localization over a six-channel capture.

Pipeline: threshold trigger on any channel, a fixed collection window after
the trigger, the first peak of each baseline-removed channel, time deltas
relative to the earliest peak, then a decision. The plucked radius normally
peaks first with its two neighbors about 5 ms later. When the plucked radius
is dead its two neighbors peak almost together, and the radius between them
is reported instead.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .dsp import PeakParams, estimate_baseline_noise, first_peak
from .errors import InvalidWindowError, NoPeaksError, TruncatedCaptureError
from .physics import TraceSet
from .web import N_FIBERS, midpoint_fiber, neighbors, ring_distance

DIRECT = "direct"
INFERRED = "inferred"
NONE = "none"

MISSING = None
_TIME_EPS = 1e-12  # peak times are sample-quantized; absorb float noise at bounds


@dataclass(frozen=True)
class DetectorConfig:
    """Detector tuning.

    The trigger level on channel c is ``max(threshold_k * noise_c, min_trigger_v)``;
    the absolute floor keeps a dead (down-scaled) radius from firing the
    trigger purely because its own noise floor shrank with it.
    """

    threshold_k: float = 5.0
    window_samples: int = 100
    simultaneity_s: float = 0.0035
    neighbor_delay_band_s: tuple[float, float] = (0.003, 0.007)
    peak_params: PeakParams = field(default_factory=PeakParams)
    min_trigger_v: float = 0.15
    rearm_guard_s: float = 0.05

    def __post_init__(self):
        if self.window_samples < 1:
            raise ValueError("window_samples must be >= 1")
        if not self.simultaneity_s > 0:
            raise ValueError("simultaneity_s must be positive")
        lo, hi = self.neighbor_delay_band_s
        if not lo < hi:
            raise ValueError("neighbor_delay_band_s lower bound must be below upper")
        object.__setattr__(self, "neighbor_delay_band_s", (float(lo), float(hi)))

    def thresholds(self, noise_stds: Sequence[float]) -> np.ndarray:
        return np.maximum(self.threshold_k * np.asarray(noise_stds, dtype=float),
                          self.min_trigger_v)


@dataclass(frozen=True)
class LocalizationResult:
    trigger_time_s: Optional[float]
    trigger_channel: Optional[int]
    first_peak_times_s: tuple[Optional[float], ...]
    deltas_s: tuple[Optional[float], ...]
    fiber: Optional[int]
    mode: str
    diagnostic: Optional[str] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["first_peak_times_s"] = list(self.first_peak_times_s)
        d["deltas_s"] = list(self.deltas_s)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LocalizationResult":
        return cls(
            trigger_time_s=d["trigger_time_s"],
            trigger_channel=d["trigger_channel"],
            first_peak_times_s=tuple(d["first_peak_times_s"]),
            deltas_s=tuple(d["deltas_s"]),
            fiber=d["fiber"],
            mode=d["mode"],
            diagnostic=d.get("diagnostic"),
        )


class Localization(NamedTuple):
    fiber: Optional[int]
    mode: str
    diagnostic: Optional[str] = None


def training_stats(traces: TraceSet, n_samples: int) -> list[tuple[float, float]]:
    """Per-channel (baseline, noise) from the first ``n_samples`` of ``traces``."""
    return [estimate_baseline_noise(ch, (0, n_samples)) for ch in traces.channels]


def detect_trigger(traces: TraceSet, baselines: Sequence[float], noise_stds: Sequence[float],
                   config: DetectorConfig = DetectorConfig(),
                   start_index: int = 0) -> Optional[tuple[float, int]]:
    """Earliest ``(time, channel)`` where any channel leaves its band around baseline.

    Same-sample ties go to the lowest channel index. Only samples at or after
    ``start_index`` are considered.
    """
    idx = trigger_index(traces.channels, baselines, noise_stds, config, start_index)
    if idx is None:
        return None
    sample, channel = idx
    return traces.time_of(sample), channel


def trigger_index(channels: np.ndarray, baselines, noise_stds, config: DetectorConfig,
                  start_index: int = 0) -> Optional[tuple[int, int]]:
    b = np.asarray(baselines, dtype=float)[:, None]
    thr = config.thresholds(noise_stds)[:, None]
    over = np.abs(channels[:, start_index:] - b) > thr
    hits = np.flatnonzero(over.any(axis=0))
    if len(hits) == 0:
        return None
    sample = int(hits[0])
    channel = int(np.flatnonzero(over[:, sample])[0])
    return sample + start_index, channel


def collect_and_extract(traces: TraceSet, trigger_time_s: float, config: DetectorConfig,
                        baselines: Sequence[float]) -> tuple[Optional[float], ...]:
    """First-peak time of each channel within ``[trigger, trigger + window)``.

    The window needs one extra sample after its end (so its last sample can be
    judged a local maximum); a capture without it is truncated.
    """
    rate = traces.sample_rate_hz
    start = int(round((trigger_time_s - traces.t0_offset_s) * rate))
    return extract_first_peaks(traces.channels, start, config, baselines, rate,
                               traces.t0_offset_s)


def extract_first_peaks(channels: np.ndarray, start: int, config: DetectorConfig,
                        baselines, sample_rate_hz: float, t0_s: float,
                        index_base: int = 0) -> tuple[Optional[float], ...]:
    """Shared by the offline pipeline and the streaming detector.

    ``channels`` may be a buffer whose first column is absolute sample
    ``index_base``; ``start`` is absolute.
    """
    n = channels.shape[1] + index_base
    if start + config.window_samples + 1 > n:
        raise TruncatedCaptureError(
            f"collection window needs samples up to {start + config.window_samples}, "
            f"capture ends at {n - 1}")
    lo = max(start - 1, index_base)
    seg = slice(lo - index_base, start + config.window_samples + 1 - index_base)
    times = []
    for c in range(N_FIBERS):
        x = channels[c, seg] - baselines[c]
        try:
            pk = first_peak(x, start - lo, config.window_samples, config.peak_params,
                            sample_rate_hz, t0_s + lo / sample_rate_hz)
        except InvalidWindowError as exc:  # pragma: no cover - guarded above
            raise TruncatedCaptureError(str(exc)) from exc
        times.append(None if pk is None else t0_s + (lo + pk.index) / sample_rate_hz)
    return tuple(times)


def compute_deltas(first_peak_times: Sequence[Optional[float]]) -> tuple[Optional[float], ...]:
    present = [t for t in first_peak_times if t is not None]
    if not present:
        raise NoPeaksError("no channel produced a peak")
    t0 = min(present)
    return tuple(None if t is None else t - t0 for t in first_peak_times)


def localize(deltas: Sequence[Optional[float]],
             config: DetectorConfig = DetectorConfig()) -> Localization:
    """Decide which radius was plucked from the per-channel deltas.

    Channels within ``simultaneity_s`` of the earliest peak are candidates.
    A single candidate whose neighbors, if seen at all, arrive within the
    neighbor-delay band is a direct hit. Exactly two candidates two hops apart
    mean the radius between them is dead and was the one plucked. Anything
    else falls back to the earliest channel with a diagnostic.
    """
    present = {c: d for c, d in enumerate(deltas) if d is not None}
    if not present:
        raise NoPeaksError("no channel produced a peak")
    earliest = min(present, key=lambda c: (present[c], c))
    candidates = sorted(c for c, d in present.items() if d + _TIME_EPS < config.simultaneity_s)

    if len(candidates) == 1:
        lo, hi = config.neighbor_delay_band_s
        seen = [present[n] for n in neighbors(earliest) if n in present]
        if not seen or any(lo - _TIME_EPS <= d <= hi + _TIME_EPS for d in seen):
            return Localization(earliest, DIRECT)
        return Localization(earliest, DIRECT, "neighbor delays outside band")

    if len(candidates) == 2:
        i, j = candidates
        if ring_distance(i, j) == 2:
            return Localization(midpoint_fiber(i, j), INFERRED)
        return Localization(earliest, DIRECT,
                            f"simultaneous peaks on channels {i} and {j} not two hops apart")

    return Localization(earliest, DIRECT, f"{len(candidates)} simultaneous candidates")


def run_pipeline(traces: TraceSet, training: Sequence[tuple[float, float]],
                 config: DetectorConfig = DetectorConfig(),
                 start_index: int = 0) -> LocalizationResult:
    """Trigger, collect, extract, localize. ``training`` holds (baseline, noise) per channel."""
    baselines = [b for b, _ in training]
    noise = [s for _, s in training]
    trig = detect_trigger(traces, baselines, noise, config, start_index)
    if trig is None:
        missing = (MISSING,) * N_FIBERS
        return LocalizationResult(None, None, missing, missing, None, NONE)
    t_trig, channel = trig
    times = collect_and_extract(traces, t_trig, config, baselines)
    return _decide(t_trig, channel, times, config)


def _decide(t_trig: float, channel: int, times, config: DetectorConfig) -> LocalizationResult:
    if all(t is None for t in times):
        missing = (MISSING,) * N_FIBERS
        return LocalizationResult(t_trig, channel, missing, missing, None, NONE,
                                  "trigger without peaks")
    deltas = compute_deltas(times)
    loc = localize(deltas, config)
    return LocalizationResult(t_trig, channel, tuple(times), deltas, loc.fiber, loc.mode,
                              loc.diagnostic)

