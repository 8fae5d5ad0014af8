import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from weavesense import io
from weavesense.cli import main
from weavesense.errors import ConfigFormatError, TraceFormatError
from weavesense.localizer import DetectorConfig
from weavesense.physics import SimScenario, TraceSet, synthesize
from weavesense.web import PluckEvent, default_config

CFG = default_config()


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def scenario_file(tmp_path):
    return write_json(tmp_path / "scenario.json", {
        "events": [{"fiber": 3, "onset_s": 0.07, "position_frac": 0.5}],
        "duration_s": 0.3, "seed": 42, "failure_scales": {"3": 0.1},
    })


def test_trace_roundtrip(tmp_path):
    tr = synthesize(SimScenario(CFG, [PluckEvent(1, 0.06)], 0.2, seed=5))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_trace(p1, tr, seed=5)
    back, meta = io.read_trace(p1)
    assert meta["seed"] == 5 and back.sample_rate_hz == tr.sample_rate_hz
    np.testing.assert_allclose(back.channels, tr.channels, rtol=1e-8)
    np.testing.assert_array_equal(back.times(), tr.times())
    io.write_trace(p2, back, seed=5)
    assert p1.read_bytes() == p2.read_bytes()
    again, _ = io.read_trace(p2)
    assert again == back


def test_trace_rejects_bad_rows(tmp_path):
    p = tmp_path / "bad.csv"
    good = io.trace_header(1e4, 0.0) + [io.format_row(k / 1e4, [2.5] * 6) for k in range(3)]
    p.write_text("\n".join(good + ["0.0003,1,2,3"]) + "\n")
    with pytest.raises(TraceFormatError):
        io.read_trace(p)
    p.write_text("\n".join(good[:-1] + [io.format_row(0.0005, [2.5] * 6)]) + "\n")
    with pytest.raises(TraceFormatError, match="grid"):
        io.read_trace(p)
    p.write_text("\n".join(["# weavesense-trace v1", "# sample_rate_hz=10000.0",
                            "# channel_count=5"] + good[4:]) + "\n")
    with pytest.raises(TraceFormatError, match="channel_count"):
        io.read_trace(p)


def test_config_roundtrip_and_hash():
    det = DetectorConfig(threshold_k=4.0)
    doc = io.config_to_dict(CFG, det)
    web, det2 = io.config_from_dict(json.loads(json.dumps(doc)))
    assert web == CFG and det2 == det
    assert io.config_hash(CFG, det) == io.config_hash(web, det2)
    assert io.config_hash(CFG, det) != io.config_hash(CFG, DetectorConfig())


@pytest.mark.parametrize("doc,field", [
    ({"sample_rate": 1e4}, "config.sample_rate"),
    ({"coupling_attenuation": "high"}, "config.coupling_attenuation"),
    ({"fibers": [{"index": 0, "tension": 5}]}, "config.fibers[0].tension"),
    ({"detector": {"window_samples": 10.5}}, "detector.window_samples"),
])
def test_config_errors_name_field(doc, field):
    with pytest.raises(ConfigFormatError, match=field.replace("[", r"\[").replace("]", r"\]")):
        io.config_from_dict(doc)


def test_scenario_roundtrip():
    sc = SimScenario(CFG, [PluckEvent(2, 0.05, 0.3, 75.0)], 0.4, 7, {2: 0.1})
    back = io.scenario_from_dict(json.loads(json.dumps(io.scenario_to_dict(sc))), CFG)
    assert back == sc


def test_record_roundtrip():
    tr = synthesize(SimScenario(CFG, [PluckEvent(4, 0.07)], 0.3, seed=1))
    from weavesense.localizer import run_pipeline, training_stats
    res = run_pipeline(tr, training_stats(tr, 500), DetectorConfig(), 500)
    line = io.dumps_record(io.event_record(res, 1, "abc"))
    back, meta = io.parse_record(line)
    assert back == res and meta == {"seed": 1, "config_hash": "abc"}


# -- cli ----------------------------------------------------------------------

def test_simulate_byte_identical(tmp_path, scenario_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--scenario", scenario_file, "--out", str(a)]) == 0
    assert main(["simulate", "--scenario", scenario_file, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(["simulate", "--scenario", scenario_file, "--out", str(c), "--seed", "43"])
    assert c.read_bytes() != a.read_bytes()


def test_localize_dead_fiber_case(tmp_path, scenario_file, capsys):
    out = tmp_path / "t.csv"
    main(["simulate", "--scenario", scenario_file, "--out", str(out)])
    capsys.readouterr()
    assert main(["localize", str(out)]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["fiber"] == 3 and rec["mode"] == "inferred"
    assert rec["seed"] == 42 and len(rec["config_hash"]) == 16


def test_localize_quiet_exit_3(tmp_path, capsys):
    sc = write_json(tmp_path / "q.json", {"events": [], "duration_s": 0.3})
    out = tmp_path / "q.csv"
    main(["simulate", "--scenario", sc, "--out", str(out)])
    assert main(["localize", str(out)]) == 3
    assert json.loads(capsys.readouterr().out)["mode"] == "none"


def test_validation_exit_2(tmp_path, capsys):
    sc = write_json(tmp_path / "bad.json", {"events": [], "sed": 1})
    assert main(["simulate", "--scenario", sc, "--out", str(tmp_path / "x.csv")]) == 2
    assert "scenario.sed" in capsys.readouterr().err
    cfg = write_json(tmp_path / "cfg.json", {"coupling_attenuation": 2.0, "coupling_delay_mean_s": -1})
    sc = write_json(tmp_path / "ok.json", {"events": []})
    assert main(["simulate", "--config", cfg, "--scenario", sc, "--out", str(tmp_path / "x.csv")]) == 2
    err = capsys.readouterr().err
    assert "attenuation range" in err and "coupling delay" in err


def test_missing_file_exit_1(tmp_path):
    assert main(["localize", str(tmp_path / "nope.csv")]) == 1


@pytest.mark.parametrize("study,levels", [("impulse", 4), ("tension", 3)])
def test_characterize_csv(tmp_path, study, levels):
    out = tmp_path / f"{study}.csv"
    assert main(["characterize", "--study", study, "--out", str(out), "--trials", "2"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == levels * 3 * 2
    summary = list(csv.DictReader((tmp_path / f"{study}_summary.csv").open()))
    assert len(summary) == levels
    if study == "impulse":
        assert {"F", "p"} <= set(summary[0])
        assert 0 <= float(summary[0]["p"]) <= 1


def test_characterize_delay_csv(tmp_path):
    out = tmp_path / "delay.csv"
    assert main(["characterize", "--study", "delay", "--out", str(out), "--trials", "6"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows and all(0.002 < float(r["delay_s"]) < 0.009 for r in rows)


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "weavesense.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
