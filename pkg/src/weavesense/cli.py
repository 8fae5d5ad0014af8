"""Command-line entry point: ``weavesense {simulate,localize,characterize,stream}``.

Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 no detection.
Set ``WEAVESENSE_LOG`` (DEBUG, INFO, WARNING, ...) to control stderr logging.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from . import io
from .characterize import (run_break_angle_study, run_delay_study, run_impulse_study,
                           run_position_study, run_tension_study)
from .errors import ConfigError, TraceFormatError, WeaveSenseError
from .localizer import NONE, DetectorConfig, run_pipeline, training_stats
from .physics import synthesize
from .stream import StreamDetector
from .web import default_config

log = logging.getLogger("weavesense")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NO_DETECTION = 0, 1, 2, 3

STUDIES = {
    "break-angle": run_break_angle_study,
    "tension": run_tension_study,
    "position": run_position_study,
    "impulse": run_impulse_study,
    "delay": run_delay_study,
}


def _setup_logging():
    level = os.environ.get("WEAVESENSE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(path):
    if path is None:
        return default_config(), DetectorConfig()
    return io.load_config(path)


def cmd_simulate(args) -> int:
    web, _ = _load_config(args.config)
    scenario = io.load_scenario(args.scenario, web)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    traces = synthesize(scenario)
    io.write_trace(args.out, traces, seed=scenario.seed)
    log.info("wrote %d samples to %s", traces.n_samples, args.out)
    return EXIT_OK


def cmd_localize(args) -> int:
    web, detector = _load_config(args.config)
    traces, meta = io.read_trace(args.trace)
    n_train = int(round(args.training_window * traces.sample_rate_hz))
    result = run_pipeline(traces, training_stats(traces, n_train), detector, n_train)
    record = io.event_record(result, meta.get("seed"), io.config_hash(web, detector))
    print(io.dumps_record(record))
    return EXIT_NO_DETECTION if result.mode == NONE else EXIT_OK


def cmd_characterize(args) -> int:
    web, detector = _load_config(args.config)
    study = STUDIES[args.study]
    kwargs = {"seed": args.seed, "detector": detector}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    result = study(web, **kwargs)
    raw, summary = io.write_study_csv(result, args.out)
    log.info("wrote %s and %s", raw, summary)
    return EXIT_OK


def run_stream(lines, out, web, detector, training_window_s: float) -> int:
    """Drive a StreamDetector from trace-format text lines; results go to ``out``."""
    meta: dict = {}
    detector_state = None
    cfg_hash = io.config_hash(web, detector)
    expected = 0
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            try:
                io.parse_header_line(line, meta)
                io.check_header(meta)
            except TraceFormatError as exc:
                log.warning("bad header line skipped: %s", exc)
            continue
        if line.startswith("time_s"):
            continue
        try:
            t, values = io.parse_row(line)
            if detector_state is None:
                rate = meta.get("sample_rate_hz", web.sample_rate_hz)
                t0 = meta.get("t0_offset_s", t)
                detector_state = StreamDetector(rate, int(round(training_window_s * rate)),
                                                detector, t0)
            k = int(round((t - detector_state.t0) * detector_state.rate))
            io.check_time(t, k, detector_state.rate, detector_state.t0)
        except TraceFormatError as exc:
            log.warning("malformed row skipped: %s", exc)
            continue
        if k < expected:
            log.warning("row at t=%r is out of order, skipped", t)
            continue
        if k > expected:
            log.warning("%d samples missing before t=%r, holding last value", k - expected, t)
            results = detector_state.hold(k - expected)
        else:
            results = []
        expected = k + 1
        r = detector_state.feed(values)
        if r is not None:
            results.append(r)
        for r in results:
            out.write(io.dumps_record(io.event_record(r, meta.get("seed"), cfg_hash)) + "\n")
            out.flush()
    if detector_state is not None and detector_state.capture_pending:
        log.warning("partial capture: input ended inside a collection window")
    return EXIT_OK


def cmd_stream(args) -> int:
    web, detector = _load_config(args.config)
    return run_stream(sys.stdin, sys.stdout, web, detector, args.training_window)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weavesense", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="synthesize a trace file from a scenario")
    s.add_argument("--config")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("localize", help="run the detector over a trace file")
    s.add_argument("trace")
    s.add_argument("--config")
    s.add_argument("--training-window", type=float, default=0.05,
                   help="seconds of quiet prefix used for baseline/noise (default 0.05)")
    s.set_defaults(func=cmd_localize)

    s = sub.add_parser("characterize", help="run a characterization study")
    s.add_argument("--study", required=True, choices=sorted(STUDIES))
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_characterize)

    s = sub.add_parser("stream", help="detect events in trace rows read from stdin")
    s.add_argument("--config")
    s.add_argument("--training-window", type=float, default=0.05)
    s.set_defaults(func=cmd_stream)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except WeaveSenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
