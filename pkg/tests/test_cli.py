import csv
import json

import pytest

from qmdyn.aperiodic import ModelSet
from qmdyn.cli import main
from qmdyn.qm import CountingQM, defect
from qmdyn.words import GroupSpec, format_word


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_defect_matches_library(tmp_path):
    code, out = run(tmp_path, "defect", "--rank", "2", "--qm", "counting:ab", "--L", "3")
    assert code == 0
    rows = read_csv(out / "defect.csv")
    assert rows[0] == ["L", "defect", "g", "h"]
    d = defect(CountingQM((1, 2)), 3, GroupSpec(2))
    assert rows[-1] == ["3", str(d.value), format_word(d.pair[0]), format_word(d.pair[1])]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["ok"] is True and manifest["config"]["L"] == 3


def test_drift_zero_column(tmp_path):
    code, out = run(tmp_path, "drift", "--qm", "counting:ab", "--n", "4")
    assert code == 0
    assert [r[1] for r in read_csv(out / "drift.csv")[1:]] == ["0"] * 5


def test_json_format(tmp_path):
    code, out = run(tmp_path, "generic-set", "--K", "3", "--format", "json")
    assert code == 0
    data = json.loads((out / "generic-set.json").read_text())
    assert data["ok"] and data["length"] == 34
    assert data["tables"]["generic_set"]["header"] == ["position", "bit"]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "model-set", "R": "10"}))
    code, out = run(tmp_path, "model-set", "--config", str(cfg), "--R", "5")
    assert code == 0
    assert json.loads((out / "manifest.json").read_text())["config"]["R"] == "5"
    pts = [r[1] for r in read_csv(out / "points.csv")[1:]]
    assert pts == [str(x) for x in ModelSet().enumerate(5)]


@pytest.mark.parametrize("args", [
    ["defect", "--rank", "0"],
    ["defect", "--qm", "weird:1"],
    ["defect", "--qm", "hom:1"],
    ["model-set", "--R", "x"],
    ["model-set", "--window", "1", "-1"],
    ["defect", "--perturb"],
])
def test_invalid_config_exit_2(tmp_path, args):
    code, _ = run(tmp_path, *args)
    assert code == 2


def test_config_for_other_command_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "drift"}))
    assert run(tmp_path, "defect", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"command": "defect", "extra": 1}))
    assert run(tmp_path, "defect", "--config", str(cfg))[0] == 2


def test_failing_check_exit_1(tmp_path):
    # C = 1/2 is too small a covering set, so witnesses appear
    code, out = run(tmp_path, "approx-check", "--R", "20", "--C", "1/2")
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    assert report["ok"] is False and report["report"]["witnesses"]
    assert len(read_csv(out / "witnesses.csv")) > 1


def test_orbit_closure(tmp_path):
    code, out = run(tmp_path, "orbit-closure", "--B", "0,2", "--W", "4")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["checks"] == {"match": True, "negated_match": True}
    rows = read_csv(out / "orbit_closure.csv")[1:]
    assert all(r[1] == r[2] and r[3] == r[4] for r in rows)


def test_hull_walk_and_perturbed_qm(tmp_path):
    code, out = run(tmp_path, "hull-walk", "--qm", "counting:ab", "--rescale3", "--perturb",
                    "--K", "4", "--L", "1", "--steps", "300")
    assert code == 0
    rows = read_csv(out / "histogram.csv")[1:]
    assert sum(int(r[1]) for r in rows) == 300


def test_example_final_q1(tmp_path):
    code, out = run(tmp_path, "example-final", "--variant", "Q1", "--steps", "2000")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["checks"] == {"no_fixed_point": True, "separates": True,
                                "uniform_approximate_lattice": True}


def test_example_final_q2_residuals(tmp_path):
    code, out = run(tmp_path, "example-final", "--variant", "Q2", "--N", "2")
    assert code == 0
    rows = read_csv(out / "residuals.csv")
    assert rows == [["N", "residual"], ["1", "1/8"], ["2", "1/32"]]
