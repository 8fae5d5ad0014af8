"""Simulator and localization pipeline for a six-radius optical waveguide web."""

from .characterize import (StudyResult, measure_neighbor_delay, run_break_angle_study,
                           run_delay_study, run_impulse_study, run_position_study,
                           run_tension_study)
from .dsp import (PeakInfo, PeakParams, estimate_baseline_noise, estimate_natural_frequency,
                  find_peaks, first_peak)
from .localizer import (DetectorConfig, LocalizationResult, collect_and_extract, compute_deltas,
                        detect_trigger, localize, run_pipeline, training_stats)
from .physics import (SimScenario, TraceSet, break_angle_gain, fiber_response,
                      sample_coupling_delay, synthesize)
from .stats import anova_one_way
from .web import (FiberParams, PluckEvent, WebConfig, default_config, midpoint_fiber,
                  natural_frequency, ring_distance, validate_config)

__version__ = "0.1.0"
