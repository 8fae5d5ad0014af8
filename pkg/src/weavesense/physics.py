"""Seeded synthesis of six-channel photodiode traces from pluck events.

Each radius rings as a lightly damped fundamental string mode. The spiral
thread is abstracted as a delay/attenuation channel: first neighbors receive an
attenuated copy after a random delay tau, second neighbors a much weaker copy
after 2*tau, and the opposite radius nothing. Coupled-in vibration rings at the
receiving fiber's own frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, InvalidParameterError, ScenarioError
from .web import N_FIBERS, FiberParams, PluckEvent, WebConfig, validate_config

_ANGLE_ANCHORS = (0.0, 20.0, 40.0)
_GAIN_ANCHORS = (1.0, 2.0, 1.0)
ISOLATION_ANGLE_DEG = 20.0  # at or above this the bridges isolate the span
MIN_TAIL_S = 0.1


@dataclass(frozen=True, eq=False)
class TraceSet:
    """Synchronized six-channel sample buffers, shape ``(6, n_samples)``."""

    sample_rate_hz: float
    channels: np.ndarray
    t0_offset_s: float = 0.0

    def __post_init__(self):
        ch = np.array(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] != N_FIBERS:
            raise ValueError(f"channels must have shape (6, n), got {ch.shape}")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return self.t0_offset_s + np.arange(self.n_samples) / self.sample_rate_hz

    def time_of(self, index: int) -> float:
        return self.t0_offset_s + index / self.sample_rate_hz

    def __eq__(self, other):
        if not isinstance(other, TraceSet):
            return NotImplemented
        return (self.sample_rate_hz == other.sample_rate_hz
                and self.t0_offset_s == other.t0_offset_s
                and np.array_equal(self.channels, other.channels))


@dataclass(frozen=True)
class SimScenario:
    config: WebConfig
    events: Sequence[PluckEvent] = ()
    duration_s: float = 0.3
    seed: int = 0
    failure_scales: Mapping[int, float] = field(default_factory=dict)


def break_angle_gain(angle_deg: float) -> float:
    """Optical sensitivity factor of the bridge break angle.

    Piecewise linear through 0 deg -> 1, 20 deg -> 2, 40 deg -> 1 and held at
    1 beyond 40 deg.
    """
    if not angle_deg >= 0:
        raise InvalidParameterError(f"break angle must be non-negative, got {angle_deg!r}")
    return float(np.interp(angle_deg, _ANGLE_ANCHORS, _GAIN_ANCHORS))


def _shallow_weight(angle_deg: float) -> float:
    # 1 at 0 deg, falling linearly to 0 at the isolation angle
    return max(0.0, 1.0 - angle_deg / ISOLATION_ANGLE_DEG)


def artifact_fraction(config: WebConfig, angle_deg: float) -> float:
    return config.artifact_fraction * _shallow_weight(angle_deg)


def frequency_jitter_sd(config: WebConfig, angle_deg: float) -> float:
    w = _shallow_weight(angle_deg)
    return w * config.shallow_freq_jitter_sd + (1.0 - w) * config.freq_jitter_sd


def mode_amplitude(params: FiberParams, pluck: PluckEvent) -> float:
    """Initial modal amplitude in volts: gain x mode shape x break-angle gain."""
    return (params.optical_gain_v * math.sin(math.pi * pluck.position_frac)
            * break_angle_gain(params.break_angle_deg))


def fiber_response(params: FiberParams, pluck: PluckEvent, t_rel, freq_scale: float = 1.0):
    """Baseline-removed photodiode response ``t_rel`` seconds after the pluck.

    ``A sin(pi x) g(angle) exp(-zeta w0 t) sin(wd t)`` with ``wd = w0 sqrt(1 - zeta^2)``
    and zero for negative ``t_rel``. ``freq_scale`` multiplies the natural
    frequency (used by the simulator for per-pluck jitter). Accepts scalars or
    arrays.
    """
    t = np.asarray(t_rel, dtype=float)
    zeta = params.damping_ratio
    w0 = 2.0 * math.pi * params.natural_frequency_hz * freq_scale
    wd = w0 * math.sqrt(1.0 - zeta * zeta)
    tc = np.maximum(t, 0.0)
    y = mode_amplitude(params, pluck) * np.exp(-zeta * w0 * tc) * np.sin(wd * tc)
    y = np.where(t >= 0, y, 0.0)
    return float(y) if y.ndim == 0 else y


def _artifact(params: FiberParams, pluck: PluckEvent, t_rel: np.ndarray, config: WebConfig,
              freq_scale: float, phase: float) -> np.ndarray:
    frac = artifact_fraction(config, params.break_angle_deg)
    if frac == 0.0:
        return np.zeros_like(t_rel)
    w0 = 2.0 * math.pi * params.natural_frequency_hz * freq_scale
    tc = np.maximum(t_rel, 0.0)
    y = (frac * mode_amplitude(params, pluck) * np.exp(-params.damping_ratio * w0 * tc)
         * np.sin(2.0 * math.pi * config.artifact_freq_hz * tc + phase))
    return np.where(t_rel >= 0, y, 0.0)


def sample_coupling_delay(rng: np.random.Generator, config: WebConfig) -> float:
    """Draw one spiral-thread delay from Normal(mean, sd) clamped to mean +/- 3 sd."""
    mean, sd = config.coupling_delay_mean_s, config.coupling_delay_sd_s
    if sd == 0:
        # keep the stream position independent of sd
        rng.standard_normal()
        return mean
    tau = mean + sd * rng.standard_normal()
    return float(min(max(tau, mean - 3.0 * sd), mean + 3.0 * sd))


def check_scenario(scenario: SimScenario) -> None:
    errors = validate_config(scenario.config)
    if errors:
        raise ConfigError(errors)
    problems = []
    for k, ev in enumerate(scenario.events):
        if not (isinstance(ev.fiber, (int, np.integer)) and 0 <= ev.fiber < N_FIBERS):
            problems.append(f"event {k}: fiber must be in 0..5")
        if not 0 < ev.position_frac < 1:
            problems.append(f"event {k}: position_frac must be in (0, 1)")
        if not ev.onset_s >= 0:
            problems.append(f"event {k}: onset_s must be non-negative")
    last = max((ev.onset_s for ev in scenario.events), default=0.0)
    if not scenario.duration_s > last + MIN_TAIL_S:
        problems.append(f"duration too short: duration_s must exceed last onset + {MIN_TAIL_S} s")
    for fiber, scale in dict(scenario.failure_scales).items():
        if not (isinstance(fiber, (int, np.integer)) and 0 <= fiber < N_FIBERS):
            problems.append(f"failure_scales: unknown fiber {fiber!r}")
        if not 0 <= scale <= 1:
            problems.append(f"failure_scales: scale for fiber {fiber} must be in [0, 1]")
    if problems:
        raise ScenarioError("; ".join(problems))


def synthesize(scenario: SimScenario) -> TraceSet:
    """Render a scenario into a TraceSet; bit-identical for identical inputs.

    RNG streams are split from the seed into per-fiber draws (frequency jitter
    and artifact phase, a fixed number regardless of events), coupling delays
    (two per event, in event order) and additive noise.
    """
    check_scenario(scenario)
    config = scenario.config
    rate = config.sample_rate_hz
    n = int(round(scenario.duration_s * rate))
    t = np.arange(n) / rate
    fibers = config.ordered_fibers()

    fiber_ss, delay_ss, noise_ss = np.random.SeedSequence(scenario.seed).spawn(3)
    fiber_rng = np.random.default_rng(fiber_ss)
    delay_rng = np.random.default_rng(delay_ss)
    noise_rng = np.random.default_rng(noise_ss)

    z = fiber_rng.standard_normal(N_FIBERS)
    phases = fiber_rng.uniform(0.0, 2.0 * math.pi, N_FIBERS)
    freq_scale = [max(0.5, 1.0 + frequency_jitter_sd(config, f.break_angle_deg) * z[f.index])
                  for f in fibers]

    def excite(out, fiber_index, pluck, t_rel, weight):
        f = fibers[fiber_index]
        s = freq_scale[fiber_index]
        out[fiber_index] += weight * (fiber_response(f, pluck, t_rel, s)
                                      + _artifact(f, pluck, t_rel, config, s, phases[fiber_index]))

    out = np.zeros((N_FIBERS, n))
    for ev in scenario.events:
        p = int(ev.fiber)
        excite(out, p, ev, t - ev.onset_s, 1.0)
        for side in (-1, 1):
            tau = sample_coupling_delay(delay_rng, config)
            excite(out, (p + side) % N_FIBERS, ev, t - ev.onset_s - tau,
                   config.coupling_attenuation)
            excite(out, (p + 2 * side) % N_FIBERS, ev, t - ev.onset_s - 2.0 * tau,
                   config.second_neighbor_attenuation)

    out += np.array([f.baseline_v for f in fibers])[:, None]
    out += noise_rng.standard_normal((N_FIBERS, n)) * np.array([f.noise_std_v for f in fibers])[:, None]
    for fiber, scale in dict(scenario.failure_scales).items():
        out[int(fiber)] *= scale
    return TraceSet(sample_rate_hz=rate, channels=out, t0_offset_s=0.0)
