"""Online detector fed one six-channel sample at a time.

It reproduces the offline pipeline exactly: the first ``training_samples``
rows calibrate per-channel baseline and noise, the trigger rule and the
collection window are the same, and peak extraction runs on the same
``window + 2`` sample segment. After each result the detector stays disarmed
until no channel has crossed its threshold for ``rearm_guard_s``, so a
ringing fiber does not retrigger itself.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

import numpy as np

from .dsp import estimate_baseline_noise
from .localizer import DetectorConfig, LocalizationResult, _decide, extract_first_peaks
from .web import N_FIBERS

TRAINING, ARMED, COLLECTING, REFRACTORY = "training", "armed", "collecting", "refractory"


class StreamDetector:
    def __init__(self, sample_rate_hz: float, training_samples: int,
                 config: DetectorConfig = DetectorConfig(), t0_s: float = 0.0):
        self.rate = float(sample_rate_hz)
        self.config = config
        self.t0 = t0_s
        self.training_samples = training_samples
        self.guard_samples = int(round(config.rearm_guard_s * self.rate))
        self.state = TRAINING
        self.index = -1  # absolute index of the last accepted sample
        self._train: list[np.ndarray] = []
        self._buf: deque = deque(maxlen=config.window_samples + 2)
        self.baselines: Optional[np.ndarray] = None
        self.thresholds: Optional[np.ndarray] = None
        self._trigger: Optional[tuple[int, int]] = None
        self._last_cross = -1

    def feed(self, values) -> Optional[LocalizationResult]:
        x = np.asarray(values, dtype=float)
        if x.shape != (N_FIBERS,):
            raise ValueError(f"expected {N_FIBERS} channel values, got shape {x.shape}")
        self.index += 1
        k = self.index
        self._buf.append(x)

        if self.state == TRAINING:
            self._train.append(x)
            if len(self._train) == self.training_samples:
                self._calibrate()
            return None

        over = np.abs(x - self.baselines) > self.thresholds
        crossed = bool(over.any())
        if crossed:
            self._last_cross = k

        if self.state == REFRACTORY and k - self._last_cross >= self.guard_samples:
            self.state = ARMED
        if self.state == ARMED and crossed:
            self._trigger = (k, int(np.flatnonzero(over)[0]))
            self.state = COLLECTING
        if self.state == COLLECTING and k >= self._trigger[0] + self.config.window_samples:
            return self._emit()
        return None

    def hold(self, n: int) -> list[LocalizationResult]:
        """Fill ``n`` missing samples by repeating the last one."""
        last = self._buf[-1] if self._buf else np.zeros(N_FIBERS)
        out = []
        for _ in range(n):
            r = self.feed(last)
            if r is not None:
                out.append(r)
        return out

    def _calibrate(self):
        # contiguous rows so reductions match the offline path bit for bit
        data = np.ascontiguousarray(np.array(self._train).T)
        stats = [estimate_baseline_noise(ch) for ch in data]
        self.baselines = np.array([b for b, _ in stats])
        self.thresholds = self.config.thresholds([s for _, s in stats])
        self._train = []
        self.state = ARMED

    def _emit(self) -> LocalizationResult:
        start, channel = self._trigger
        buf = np.array(self._buf).T
        base = self.index - buf.shape[1] + 1
        times = extract_first_peaks(buf, start, self.config, list(self.baselines),
                                    self.rate, self.t0, index_base=base)
        self._trigger = None
        self.state = REFRACTORY
        return _decide(self.t0 + start / self.rate, channel, times, self.config)

    @property
    def capture_pending(self) -> bool:
        return self.state == COLLECTING
