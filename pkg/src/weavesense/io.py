"""File formats: JSON config/scenario documents, CSV traces, event logs, study CSVs.

Trace files are text::

    # weavesense-trace v1
    # sample_rate_hz=10000.0
    # channel_count=6
    # t0_offset_s=0.0
    # seed=42                       (optional)
    time_s,ch0,ch1,ch2,ch3,ch4,ch5
    0.0,2.50093131,...

Times are written with shortest round-trip precision so the uniform-spacing
check can be strict; voltages carry 9 significant digits, which is the format
precision.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, fields
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .characterize import StudyResult
from .dsp import PeakParams
from .errors import ConfigFormatError, TraceFormatError
from .localizer import DetectorConfig, LocalizationResult
from .physics import SimScenario, TraceSet
from .web import N_FIBERS, FiberParams, PluckEvent, WebConfig

TRACE_MAGIC = "# weavesense-trace v1"
VOLT_FMT = ".9g"
SPACING_RTOL = 1e-9
COLUMNS = ["time_s"] + [f"ch{i}" for i in range(N_FIBERS)]


# -- JSON documents -----------------------------------------------------------

def _number(value, where: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigFormatError(f"{where}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigFormatError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _object(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigFormatError(f"{where}: expected an object")
    return value


def _build(cls, doc: dict, where: str, ints=(), special=None):
    special = special or {}
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(doc) - names)
    if unknown:
        raise ConfigFormatError(f"{where}.{unknown[0]}: unknown field")
    kwargs = {}
    for name, value in doc.items():
        path = f"{where}.{name}"
        if name in special:
            kwargs[name] = special[name](value, path)
        else:
            kwargs[name] = _number(value, path, integer=name in ints)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigFormatError(f"{where}: {exc}") from exc
    except ValueError as exc:
        raise ConfigFormatError(f"{where}: {exc}") from exc


def _fibers(value, where):
    if not isinstance(value, list):
        raise ConfigFormatError(f"{where}: expected a list")
    return tuple(_build(FiberParams, _object(f, f"{where}[{k}]"), f"{where}[{k}]", ints=("index",))
                 for k, f in enumerate(value))


def _band(value, where):
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigFormatError(f"{where}: expected [lower, upper]")
    return (_number(value[0], f"{where}[0]"), _number(value[1], f"{where}[1]"))


def _peak_params(value, where):
    return _build(PeakParams, _object(value, where), where, ints=("min_distance_samples",))


def detector_from_dict(doc: dict, where: str = "detector") -> DetectorConfig:
    return _build(DetectorConfig, _object(doc, where), where, ints=("window_samples",),
                  special={"neighbor_delay_band_s": _band, "peak_params": _peak_params})


def config_from_dict(doc: dict) -> tuple[WebConfig, DetectorConfig]:
    """Parse a config document: WebConfig fields plus an optional ``detector`` object."""
    doc = dict(_object(doc, "config"))
    detector = detector_from_dict(doc.pop("detector")) if "detector" in doc else DetectorConfig()
    web = _build(WebConfig, doc, "config", special={"fibers": _fibers})
    return web, detector


def config_to_dict(web: WebConfig, detector: Optional[DetectorConfig] = None) -> dict:
    d = asdict(web)
    d["fibers"] = [asdict(f) for f in web.fibers]
    if detector is not None:
        det = asdict(detector)
        det["neighbor_delay_band_s"] = list(detector.neighbor_delay_band_s)
        d["detector"] = det
    return d


def config_hash(web: WebConfig, detector: Optional[DetectorConfig] = None) -> str:
    blob = json.dumps(config_to_dict(web, detector), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFormatError(f"{path}: invalid JSON ({exc})") from exc


def load_config(path) -> tuple[WebConfig, DetectorConfig]:
    return config_from_dict(_read_json(path))


def _events(value, where):
    if not isinstance(value, list):
        raise ConfigFormatError(f"{where}: expected a list")
    return [_build(PluckEvent, _object(e, f"{where}[{k}]"), f"{where}[{k}]", ints=("fiber",))
            for k, e in enumerate(value)]


def _failure_scales(value, where):
    out = {}
    for key, scale in _object(value, where).items():
        try:
            fiber = int(key)
        except ValueError:
            raise ConfigFormatError(f"{where}.{key}: fiber key must be an integer") from None
        out[fiber] = _number(scale, f"{where}.{key}")
    return out


def scenario_from_dict(doc: dict, config: WebConfig) -> SimScenario:
    doc = _object(doc, "scenario")
    allowed = {"events", "duration_s", "seed", "failure_scales"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigFormatError(f"scenario.{unknown[0]}: unknown field")
    kwargs = {"config": config}
    if "events" in doc:
        kwargs["events"] = _events(doc["events"], "scenario.events")
    if "duration_s" in doc:
        kwargs["duration_s"] = _number(doc["duration_s"], "scenario.duration_s")
    if "seed" in doc:
        kwargs["seed"] = _number(doc["seed"], "scenario.seed", integer=True)
    if "failure_scales" in doc:
        kwargs["failure_scales"] = _failure_scales(doc["failure_scales"], "scenario.failure_scales")
    return SimScenario(**kwargs)


def scenario_to_dict(scenario: SimScenario) -> dict:
    return {
        "events": [asdict(e) for e in scenario.events],
        "duration_s": scenario.duration_s,
        "seed": scenario.seed,
        "failure_scales": {str(k): v for k, v in sorted(dict(scenario.failure_scales).items())},
    }


def load_scenario(path, config: WebConfig) -> SimScenario:
    return scenario_from_dict(_read_json(path), config)


# -- trace files --------------------------------------------------------------

def trace_header(sample_rate_hz: float, t0_offset_s: float, seed: Optional[int] = None) -> list[str]:
    lines = [TRACE_MAGIC, f"# sample_rate_hz={float(sample_rate_hz)!r}",
             f"# channel_count={N_FIBERS}", f"# t0_offset_s={float(t0_offset_s)!r}"]
    if seed is not None:
        lines.append(f"# seed={int(seed)}")
    lines.append(",".join(COLUMNS))
    return lines


def format_row(t: float, values: Iterable[float]) -> str:
    return ",".join([repr(float(t))] + [format(float(v), VOLT_FMT) for v in values])


def write_trace(path, traces: TraceSet, seed: Optional[int] = None) -> None:
    times = traces.times()
    lines = trace_header(traces.sample_rate_hz, traces.t0_offset_s, seed)
    ch = traces.channels
    for k in range(traces.n_samples):
        lines.append(format_row(times[k], ch[:, k]))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_header_line(line: str, meta: dict) -> None:
    body = line.lstrip("#").strip()
    if "=" not in body:
        return
    key, value = (s.strip() for s in body.split("=", 1))
    try:
        if key == "sample_rate_hz" or key == "t0_offset_s":
            meta[key] = float(value)
        elif key in ("channel_count", "seed"):
            meta[key] = int(value)
    except ValueError:
        raise TraceFormatError(f"header {key}: bad value {value!r}") from None


def parse_row(line: str) -> tuple[float, np.ndarray]:
    parts = line.strip().split(",")
    if len(parts) != N_FIBERS + 1:
        raise TraceFormatError(f"expected {N_FIBERS + 1} columns, got {len(parts)}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise TraceFormatError(f"non-numeric field in row {line.strip()!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise TraceFormatError(f"non-finite value in row {line.strip()!r}")
    return vals[0], np.array(vals[1:])


def check_header(meta: dict) -> None:
    if meta.get("channel_count", N_FIBERS) != N_FIBERS:
        raise TraceFormatError(f"channel_count must be {N_FIBERS}, got {meta['channel_count']}")
    if "sample_rate_hz" in meta and not meta["sample_rate_hz"] > 0:
        raise TraceFormatError("sample_rate_hz must be positive")


def check_time(t: float, k: int, rate: float, t0: float) -> None:
    expected = t0 + k / rate
    if abs(t - expected) > SPACING_RTOL / rate:
        raise TraceFormatError(f"row {k}: time {t!r} is off the {rate} Hz grid "
                               f"(expected {expected!r})")


def read_trace(path) -> tuple[TraceSet, dict]:
    """Parse a trace file; returns the TraceSet and its header metadata."""
    meta: dict = {}
    times, rows = [], []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parse_header_line(line, meta)
                continue
            if line.startswith("time_s"):
                continue
            t, v = parse_row(line)
            times.append(t)
            rows.append(v)
    check_header(meta)
    if "sample_rate_hz" not in meta:
        raise TraceFormatError("missing sample_rate_hz header")
    if not rows:
        raise TraceFormatError("trace has no samples")
    rate = meta["sample_rate_hz"]
    t0 = meta.setdefault("t0_offset_s", times[0])
    for k, t in enumerate(times):
        check_time(t, k, rate, t0)
    return TraceSet(rate, np.array(rows).T, t0), meta


# -- event log ----------------------------------------------------------------

def event_record(result: LocalizationResult, seed: Optional[int], cfg_hash: str) -> dict:
    rec = result.to_dict()
    rec["seed"] = seed
    rec["config_hash"] = cfg_hash
    return rec


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


def parse_record(line: str) -> tuple[LocalizationResult, dict]:
    rec = json.loads(line)
    return LocalizationResult.from_dict(rec), {"seed": rec.get("seed"),
                                               "config_hash": rec.get("config_hash")}


# -- study CSVs ---------------------------------------------------------------

def _cell(v):
    return repr(v) if isinstance(v, float) else v


def write_study_csv(result: StudyResult, path) -> tuple[Path, Path]:
    """Write per-trial rows to ``path`` and per-level summary next to it."""
    path = Path(path)
    summary_path = path.with_name(path.stem + "_summary" + path.suffix)
    factor_cols = sorted({k for t in result.trials for k in t.factors})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["study", "trial", *factor_cols, *result.metrics])
        for t in result.trials:
            w.writerow([result.study_name, t.index, *(_cell(t.factors.get(c)) for c in factor_cols),
                        *(_cell(t.responses[m]) for m in result.metrics)])
    stat_cols = sorted(result.stats)
    summary_cols = ["study"] + (list(result.summary[0]) if result.summary else []) + stat_cols
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(summary_cols)
        for row in result.summary:
            w.writerow([result.study_name, *(_cell(v) for v in row.values()),
                        *(_cell(result.stats[c]) for c in stat_cols)])
    return path, summary_path
