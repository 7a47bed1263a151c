import json
import math
from pathlib import Path

import numpy as np
import pytest

from fockslit.cli import csv_text, main
from fockslit.config import ConfigError, load_config, parse_config

ROOT = Path(__file__).resolve().parents[1]
LAM = 2 * math.pi


def base_doc(**over):
    doc = {
        "lattice": {"box_length": 10 * LAM, "cutoff": 4, "mass": 0.0, "epsilon": 0.2},
        "slit": {"d": LAM, "k": 1.0, "amp_a": 1.0, "theta_a": 0.0, "amp_b": 1.0, "theta_b": 0.0},
        "experiment": "overlap-sweep",
        "output": "out",
        "seed": 0,
        "params": {"d_values": [0.05, 0.5, 1.0, math.pi, 5.0]},
    }
    doc.update(over)
    return doc


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=2))
    return p


def test_shipped_configs_are_valid(capsys):
    configs = sorted((ROOT / "configs").rglob("*.json"))
    assert configs
    for p in configs:
        assert main(["validate", str(p)]) == 0
    assert "0 diagnostics" in capsys.readouterr().out


def test_separation_beyond_half_box_is_geometry_error(tmp_path, capsys):
    doc = base_doc()
    doc["slit"]["d"] = 6 * LAM
    assert main(["validate", str(write(tmp_path, doc))]) == 1
    err = capsys.readouterr().err
    assert "geometry" in err and "L/2" in err
    assert "cfg.json:9: slit.d" in err  # line of the "d" key


def test_zero_epsilon_is_invariant_error(tmp_path, capsys):
    doc = base_doc()
    doc["lattice"]["epsilon"] = 0.0
    assert main(["validate", str(write(tmp_path, doc))]) == 1
    assert "lattice.epsilon" in capsys.readouterr().err


def test_unknown_keys_rejected():
    doc = base_doc(colour="blue")
    doc["slit"]["width"] = 1.0
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps(doc, indent=2))
    paths = [d.path for d in exc.value.diagnostics]
    assert "colour" in paths and "slit.width" in paths


def test_parse_error_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('{\n  "lattice": {\n    "cutoff": 3,\n  }\n}')
    assert exc.value.diagnostics[0].line == 4


def test_screen_required_for_scans():
    with pytest.raises(ConfigError, match="needs a screen"):
        parse_config(json.dumps(base_doc(experiment="scan")))


def test_missing_file_is_config_error(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 1
    assert main(["run", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 1


def test_overlap_sweep_sinc_column(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, base_doc())), "--out", str(out), "--quiet"]) == 0
    lines = (out / "overlap.csv").read_text().split("\n")
    assert lines[0] == "d,kd,re_ratio,im_ratio,sinc" and lines[-1] == ""
    rows = [list(map(float, ln.split(","))) for ln in lines[1:-1]]
    assert len(rows) == 5
    for d, kd, _, _, sn in rows:
        assert sn == pytest.approx(math.sin(kd) / kd, rel=1e-15)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["files"] == {"overlap.csv": 5}
    assert manifest["config"]["experiment"] == "overlap-sweep"


def test_incoherent_analytic_summary(tmp_path):
    doc = base_doc(experiment="incoherent")
    doc["slit"]["d"] = 200.0
    doc["lattice"]["box_length"] = 10000.0
    doc["screen"] = {"distance": 4000.0, "x_min": -400.0, "x_max": 400.0, "samples": 401}
    doc["params"] = {"observable": "INTENSITY", "n_phase": 4}
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, doc)), "--out", str(out), "--quiet"]) == 0
    header, row = (out / "summary.csv").read_text().splitlines()
    vis, resid = map(float, row.split(",")[:2])
    assert vis < 1e-3 and resid < 1e-18
    assert len((out / "scan.csv").read_text().splitlines()) == 402


def test_runtime_failure_removes_outputs(tmp_path, capsys):
    doc = base_doc(experiment="fringes")
    doc["slit"]["amp_b"] = 0.0  # single source: no fringes
    doc["lattice"]["box_length"] = 10000.0
    doc["slit"]["d"] = 200.0
    doc["screen"] = {"distance": 4000.0, "x_min": -400.0, "x_max": 400.0, "samples": 401}
    doc["params"] = {"observable": "INTENSITY"}
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, doc)), "--out", str(out)]) == 2
    assert "fewer than 2 maxima" in capsys.readouterr().err
    assert not out.exists()


def test_manifest_rerun_reproduces_bundle(tmp_path):
    doc = base_doc(experiment="scan")
    doc["screen"] = {"distance": 12.0, "x_min": -3.0, "x_max": 3.0, "y": 1.0, "samples": 21}
    doc["params"] = {"observable": "ENERGY", "state": "coherent", "time": 0.4}
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(write(tmp_path, doc)), "--out", str(a), "--quiet"]) == 0
    assert main(["run", str(a / "manifest.json"), "--out", str(b), "--quiet"]) == 0
    for name in ("scan.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_threads_env_fallback(tmp_path, monkeypatch):
    doc = base_doc(experiment="scan")
    doc["screen"] = {"distance": 12.0, "x_min": -3.0, "x_max": 3.0, "y": 1.0, "samples": 101}
    p = write(tmp_path, doc)
    assert main(["run", str(p), "--out", str(tmp_path / "a"), "--threads", "1", "--quiet"]) == 0
    monkeypatch.setenv("FOCKSLIT_THREADS", "4")
    assert main(["run", str(p), "--out", str(tmp_path / "b"), "--quiet"]) == 0
    assert (tmp_path / "a" / "scan.csv").read_bytes() == (tmp_path / "b" / "scan.csv").read_bytes()


def test_csv_number_format():
    text = csv_text(("a", "b", "c"), [(0.1, 3, np.float64(1 / 3))])
    assert text == "a,b,c\n0.10000000000000001,3,0.33333333333333331\n"


def test_config_roundtrip():
    cfg = load_config(ROOT / "configs" / "acceptance" / "c3_reconstruct.json")
    again = parse_config(json.dumps(cfg.to_json()))
    assert again == cfg
