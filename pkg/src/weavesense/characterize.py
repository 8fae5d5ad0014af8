"""Single-fiber characterization studies and full-web delay statistics.

Single-fiber studies mimic the bench protocol: a small set of specimens (three
nominally identical fibers, each with its own optical gain) is plucked
``trials`` times at every level of the studied factor, always on radius 0 of
the template web at a known onset. Each trial records the first-peak
amplitude of the baseline-removed trace and the natural frequency estimated
from the ring-down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .dsp import estimate_natural_frequency, first_peak
from .errors import AnovaError, InvalidParameterError
from .localizer import DetectorConfig, run_pipeline, training_stats
from .physics import SimScenario, synthesize
from .stats import anova_one_way
from .web import FiberParams, PluckEvent, WebConfig, neighbors

AMPLITUDE = "first_peak_amplitude_v"
FREQUENCY = "natural_frequency_hz"
DELAY = "delay_s"

RIG_ONSET_S = 0.05
RIG_DURATION_S = 0.5
DELAY_DURATION_S = 0.25
TRAINING_WINDOW_S = 0.05


@dataclass
class Trial:
    index: int
    factors: dict
    responses: dict


@dataclass
class StudyResult:
    study_name: str
    factor: Optional[str]
    metrics: tuple[str, ...]
    trials: list[Trial]
    summary: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def levels(self) -> list:
        if self.factor is None:
            return [None]
        seen = []
        for t in self.trials:
            v = t.factors[self.factor]
            if v not in seen:
                seen.append(v)
        return seen

    def values(self, metric: str, level=None) -> np.ndarray:
        return np.array([t.responses[metric] for t in self.trials
                         if self.factor is None or t.factors[self.factor] == level],
                        dtype=float)

    def mean(self, metric: str, level=None) -> float:
        return float(np.mean(self.values(metric, level)))

    def sd(self, metric: str, level=None) -> float:
        v = self.values(metric, level)
        return float(np.std(v, ddof=1)) if len(v) > 1 else 0.0


def _summarize(result: StudyResult) -> StudyResult:
    rows = []
    for level in result.levels():
        row = {} if result.factor is None else {result.factor: level}
        row["n"] = len(result.values(result.metrics[0], level))
        for m in result.metrics:
            row[f"mean_{m}"] = result.mean(m, level)
            row[f"sd_{m}"] = result.sd(m, level)
        rows.append(row)
    result.summary = rows
    return result


def rig_trial(config: WebConfig, fiber: FiberParams, position_frac: float,
              impulse_weight_g: float, seed: int,
              detector: DetectorConfig = DetectorConfig()) -> dict:
    """Pluck one fiber of the bench rig and measure its response."""
    cfg = replace(config, fibers=tuple(replace(fiber, index=0) if f.index == 0 else f
                                       for f in config.fibers))
    event = PluckEvent(0, RIG_ONSET_S, position_frac, impulse_weight_g)
    traces = synthesize(SimScenario(cfg, [event], RIG_DURATION_S, seed))
    rate = traces.sample_rate_hz
    onset = int(round(RIG_ONSET_S * rate))
    x = traces.channels[0]
    baseline = float(np.median(x[:onset]))
    y = x - baseline
    pk = first_peak(y, onset, detector.window_samples, detector.peak_params, rate)
    return {AMPLITUDE: math.nan if pk is None else pk.amplitude_v,
            FREQUENCY: estimate_natural_frequency(y[onset:], rate)}


def _bench_study(name: str, factor: str, levels: Sequence, config: WebConfig,
                 vary: Callable[[FiberParams, object], FiberParams],
                 pluck: Callable[[object], tuple[float, float]],
                 trials: int, seed: int, n_specimens: int, specimen_gain_sd: float,
                 detector: Optional[DetectorConfig]) -> StudyResult:
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if n_specimens < 1:
        raise InvalidParameterError("n_specimens must be >= 1")
    detector = detector or DetectorConfig()
    rng = np.random.default_rng(seed)
    template = config.fiber(0)
    gains = np.clip(1.0 + specimen_gain_sd * rng.standard_normal(n_specimens), 0.1, None)
    specimens = [replace(template, optical_gain_v=template.optical_gain_v * g) for g in gains]

    rows = []
    for level in levels:
        position, weight = pluck(level)
        for s, specimen in enumerate(specimens):
            fiber = vary(specimen, level)
            for r in range(trials):
                trial_seed = int(rng.integers(0, 2**63 - 1))
                responses = rig_trial(config, fiber, position, weight, trial_seed, detector)
                rows.append(Trial(len(rows), {factor: level, "specimen": s, "repetition": r},
                                  responses))
    return _summarize(StudyResult(name, factor, (AMPLITUDE, FREQUENCY), rows))


def run_break_angle_study(config_template: WebConfig, angles=(0.0, 20.0, 40.0), trials: int = 5,
                          seed: int = 0, n_specimens: int = 3, specimen_gain_sd: float = 0.1,
                          detector: Optional[DetectorConfig] = None) -> StudyResult:
    return _bench_study("break-angle", "break_angle_deg", angles, config_template,
                        lambda f, a: replace(f, break_angle_deg=float(a)),
                        lambda a: (0.5, 50.0),
                        trials, seed, n_specimens, specimen_gain_sd, detector)


def run_tension_study(config_template: WebConfig, tensions_g=(50.0, 100.0, 150.0),
                      trials: int = 5, seed: int = 0, n_specimens: int = 3,
                      specimen_gain_sd: float = 0.1,
                      detector: Optional[DetectorConfig] = None) -> StudyResult:
    return _bench_study("tension", "tension_grams", tensions_g, config_template,
                        lambda f, t: replace(f, tension_grams=float(t)),
                        lambda t: (0.5, 50.0),
                        trials, seed, n_specimens, specimen_gain_sd, detector)


def run_position_study(config_template: WebConfig, positions=(0.5, 0.25), trials: int = 5,
                       seed: int = 0, n_specimens: int = 3, specimen_gain_sd: float = 0.1,
                       detector: Optional[DetectorConfig] = None) -> StudyResult:
    if not all(0 < p < 1 for p in positions):
        raise InvalidParameterError("positions must lie in (0, 1)")
    return _bench_study("position", "position_frac", positions, config_template,
                        lambda f, p: f,
                        lambda p: (float(p), 50.0),
                        trials, seed, n_specimens, specimen_gain_sd, detector)


def run_impulse_study(config_template: WebConfig, weights_g=(25.0, 50.0, 75.0, 100.0),
                      trials: int = 5, seed: int = 0, n_specimens: int = 3,
                      specimen_gain_sd: float = 0.1,
                      detector: Optional[DetectorConfig] = None) -> StudyResult:
    """Amplitude versus plucker weight, with a one-way ANOVA pooled over specimens."""
    if len(weights_g) < 2:
        raise InvalidParameterError("need at least two weight levels")
    if trials * n_specimens < 2:
        raise InvalidParameterError("need at least two trials per weight level")
    result = _bench_study("impulse", "impulse_weight_g", weights_g, config_template,
                          lambda f, w: f,
                          lambda w: (0.5, float(w)),
                          trials, seed, n_specimens, specimen_gain_sd, detector)
    groups = [result.values(AMPLITUDE, w) for w in result.levels()]
    if all(np.ptp(g) == 0 for g in groups):
        raise AnovaError("every weight group has zero variance")
    f, p = anova_one_way(groups)
    result.stats = {"F": f, "p": p}
    return result


def run_delay_study(config: WebConfig, trials: int = 30, seed: int = 0,
                    detector: Optional[DetectorConfig] = None) -> StudyResult:
    """Neighbor peak delay on the assembled web.

    Radii are plucked in turn at the spiral junction (mid-span); every neighbor
    whose first peak is captured contributes one delay row.
    """
    if trials < 2:
        raise InvalidParameterError("trials must be >= 2")
    detector = detector or DetectorConfig()
    rng = np.random.default_rng(seed)
    n_train = int(round(TRAINING_WINDOW_S * config.sample_rate_hz))
    rows = []
    for trial in range(trials):
        fiber = trial % 6
        onset = float(rng.uniform(0.06, 0.08))
        traces = synthesize(SimScenario(config, [PluckEvent(fiber, onset, 0.5)],
                                        DELAY_DURATION_S, int(rng.integers(0, 2**63 - 1))))
        res = run_pipeline(traces, training_stats(traces, n_train), detector, n_train)
        t_pluck = res.first_peak_times_s[fiber]
        if t_pluck is None:
            continue
        for nb in neighbors(fiber):
            t_nb = res.first_peak_times_s[nb]
            if t_nb is not None:
                rows.append(Trial(len(rows), {"trial": trial, "fiber": fiber, "neighbor": nb},
                                  {DELAY: t_nb - t_pluck}))
    return _summarize(StudyResult("delay", None, (DELAY,), rows))


def measure_neighbor_delay(config: WebConfig, trials: int = 30, seed: int = 0,
                           detector: Optional[DetectorConfig] = None) -> tuple[float, float]:
    """Mean and SD (seconds) of neighbor-minus-plucked first-peak times."""
    result = run_delay_study(config, trials, seed, detector)
    return result.mean(DELAY), result.sd(DELAY)
