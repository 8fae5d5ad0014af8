"""Web geometry and per-radius physical parameters.

The sensor is a ring of six radial TPU waveguides. Each radius is a tensioned
string clamped between two bridges; its tension is recorded as the calibration
weight (grams-force) hung on it before clamping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import InvalidIndexError, InvalidParameterError

N_FIBERS = 6
GRAVITY = 9.81  # m/s^2, grams-force -> newtons

TPU_DENSITY = 1200.0  # kg/m^3
THREAD_DIAMETER_M = 0.8e-3
DEFAULT_LINEAR_DENSITY = 6.03e-4  # TPU_DENSITY * pi * (0.4 mm)^2, rounded
DEFAULT_LENGTH_M = 0.175

# Tensions of the assembled web: one 50 g, four 100 g, one 150 g radius.
DEFAULT_TENSIONS_G = (50.0, 100.0, 100.0, 150.0, 100.0, 100.0)


@dataclass(frozen=True)
class FiberParams:
    """Physical and sensing parameters of one radius."""

    index: int
    tension_grams: float = 100.0
    vibrating_length_m: float = DEFAULT_LENGTH_M
    linear_density_kg_per_m: float = DEFAULT_LINEAR_DENSITY
    damping_ratio: float = 0.02
    break_angle_deg: float = 20.0
    optical_gain_v: float = 0.5
    baseline_v: float = 2.5
    noise_std_v: float = 0.005

    @property
    def natural_frequency_hz(self) -> float:
        return natural_frequency(self.tension_grams, self.vibrating_length_m,
                                 self.linear_density_kg_per_m)


@dataclass(frozen=True)
class WebConfig:
    """The six-fiber ring plus coupling and acquisition parameters.

    The last four fields control the shallow-break-angle model: below 20 deg
    the span is not isolated by the bridges, which shows up as a low-frequency
    artifact and a larger spread of natural frequency between plucks.
    """

    fibers: tuple[FiberParams, ...] = field(default_factory=lambda: tuple(
        FiberParams(index=i, tension_grams=t) for i, t in enumerate(DEFAULT_TENSIONS_G)))
    coupling_delay_mean_s: float = 0.005
    coupling_delay_sd_s: float = 0.0008
    coupling_attenuation: float = 0.4
    second_neighbor_attenuation: float = 0.001
    sample_rate_hz: float = 10000.0
    artifact_freq_hz: float = 20.0
    artifact_fraction: float = 0.3
    freq_jitter_sd: float = 0.01
    shallow_freq_jitter_sd: float = 0.08

    def fiber(self, index: int) -> FiberParams:
        for f in self.fibers:
            if f.index == index:
                return f
        raise InvalidIndexError(f"no fiber with index {index}")

    def ordered_fibers(self) -> list[FiberParams]:
        return sorted(self.fibers, key=lambda f: f.index)


@dataclass(frozen=True)
class PluckEvent:
    """One impulse on a radius.

    ``position_frac`` is the pluck point as a fraction of the vibrating length
    (0.5 = center, 0.25 = quarter span). ``impulse_weight_g`` is the plucker's
    calibration weight; it is bookkeeping only and never scales the response.
    """

    fiber: int
    onset_s: float
    position_frac: float = 0.5
    impulse_weight_g: float = 50.0


def default_config() -> WebConfig:
    return WebConfig()


def natural_frequency(tension_grams: float, vibrating_length_m: float,
                      linear_density_kg_per_m: float) -> float:
    """Fundamental of an ideal string, f1 = sqrt(T / mu) / (2 L), in Hz.

    ``tension_grams`` is grams-force and is converted with g = 9.81 m/s^2.
    """
    for name, value in (("tension_grams", tension_grams),
                        ("vibrating_length_m", vibrating_length_m),
                        ("linear_density_kg_per_m", linear_density_kg_per_m)):
        if not value > 0:
            raise InvalidParameterError(f"{name} must be positive, got {value!r}")
    tension_n = tension_grams * 1e-3 * GRAVITY
    return math.sqrt(tension_n / linear_density_kg_per_m) / (2.0 * vibrating_length_m)


def _check_index(i: int) -> None:
    if not (isinstance(i, int) and 0 <= i < N_FIBERS):
        raise InvalidIndexError(f"fiber index must be in 0..{N_FIBERS - 1}, got {i!r}")


def ring_distance(i: int, j: int) -> int:
    """Hop count between radii ``i`` and ``j`` around the ring."""
    _check_index(i)
    _check_index(j)
    d = abs(i - j)
    return min(d, N_FIBERS - d)


def neighbors(i: int) -> tuple[int, int]:
    _check_index(i)
    return ((i - 1) % N_FIBERS, (i + 1) % N_FIBERS)


def midpoint_fiber(i: int, j: int) -> Optional[int]:
    """The radius between ``i`` and ``j`` when they are two hops apart, else None."""
    if ring_distance(i, j) != 2:
        return None
    for k in neighbors(i):
        if ring_distance(k, j) == 1:
            return k
    return None  # unreachable on a 6-ring


def validate_config(config: WebConfig) -> list[str]:
    """Return every invariant violation of ``config``; an empty list means valid."""
    errors: list[str] = []
    fibers = tuple(config.fibers)
    if len(fibers) != N_FIBERS:
        errors.append(f"fiber count: expected {N_FIBERS}, got {len(fibers)}")
    indices = sorted(f.index for f in fibers)
    if len(fibers) == N_FIBERS and indices != list(range(N_FIBERS)):
        errors.append(f"fiber indices: expected a permutation of 0..5, got {indices}")

    for f in fibers:
        tag = f"fiber {f.index}"
        for name in ("tension_grams", "vibrating_length_m", "linear_density_kg_per_m",
                     "baseline_v"):
            if not getattr(f, name) > 0:
                errors.append(f"{tag}: {name} must be positive")
        if not 0 < f.damping_ratio < 1:
            errors.append(f"{tag}: damping_ratio must be in (0, 1)")
        if not f.noise_std_v >= 0:
            errors.append(f"{tag}: noise_std_v must be non-negative")
        if not f.break_angle_deg >= 0:
            errors.append(f"{tag}: break_angle_deg must be non-negative")
        if not math.isfinite(f.optical_gain_v):
            errors.append(f"{tag}: optical_gain_v must be finite")

    if not config.coupling_delay_mean_s > 0:
        errors.append("coupling delay: mean must be positive")
    if not config.coupling_delay_sd_s >= 0:
        errors.append("coupling delay: sd must be non-negative")
    if not 0 <= config.coupling_attenuation < 1:
        errors.append("attenuation range: coupling_attenuation must be in [0, 1)")
    if not 0 <= config.second_neighbor_attenuation < config.coupling_attenuation:
        errors.append("attenuation range: second_neighbor_attenuation must be in "
                      "[0, coupling_attenuation)")
    if not config.sample_rate_hz > 0:
        errors.append("sample_rate_hz must be positive")
    if not config.artifact_freq_hz > 0:
        errors.append("artifact_freq_hz must be positive")
    for name in ("artifact_fraction", "freq_jitter_sd", "shallow_freq_jitter_sd"):
        if not getattr(config, name) >= 0:
            errors.append(f"{name} must be non-negative")
    return errors


FIBER_FIELDS = tuple(f.name for f in fields(FiberParams))
CONFIG_FIELDS = tuple(f.name for f in fields(WebConfig))
