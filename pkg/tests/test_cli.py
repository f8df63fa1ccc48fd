import csv
import json
import math

import pytest

from delaybvp.cli import main

PI = math.pi

BASE_PROBLEM = {
    "q_left": "0", "q_right": "0",
    "retard_left": "0", "retard_right": "0",
    "alpha": "pi/2", "beta": "pi/2", "coupling": 1.0,
}


def write_config(tmp_path, name="cfg.json", problem=None, solver=None,
                 range_=None, output=None, extra=None):
    doc = {"problem": dict(BASE_PROBLEM, **(problem or {})),
           "range": range_ or {"n_min": 1, "n_max": 3}}
    if solver:
        doc["solver"] = solver
    if output:
        doc["output"] = output
    if extra:
        doc.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


FAST = {"steps_per_segment": 512, "refine_tol": 1e-9}


def test_solve_n_range(tmp_path):
    cfg = write_config(tmp_path, solver=FAST, range_={"n_min": 1, "n_max": 5})
    out = tmp_path / "table.csv"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["n"] for r in rows] == ["1", "2", "3", "4", "5"]
    for r in rows:
        assert abs(float(r["s_n"]) - int(r["n"])) < 1e-7
        assert float(r["lambda_n"]) == float(r["s_n"]) ** 2
        assert r["simplicity_ok"] == "true"


def test_solve_s_range_scan(tmp_path):
    cfg = write_config(tmp_path, solver=FAST,
                       range_={"s_min": 0.5, "s_max": 3.5, "samples": 300})
    out = tmp_path / "scan.csv"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 3
    assert [round(float(r["s_n"])) for r in rows] == [1, 2, 3]


def test_malformed_json_rejected(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["solve", "--config", str(path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_missing_key_named(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"problem": dict(BASE_PROBLEM),
                                "range": {"n_min": 1}}))
    assert main(["solve", "--config", str(path)]) == 1
    assert "range.n_max" in capsys.readouterr().err


def test_invalid_problem_rejected_with_report(tmp_path, capsys):
    cfg = write_config(tmp_path, problem={"retard_left": "2*x"})
    assert main(["solve", "--config", cfg]) == 1
    assert "delayed_argument_left" in capsys.readouterr().err


def test_charfn_closed_form_pattern(tmp_path):
    cfg = write_config(tmp_path,
                       range_={"s_min": 1.0, "s_max": 2.0, "samples": 3})
    out = tmp_path / "charfn.csv"
    assert main(["charfn", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    values = [float(r["F"]) for r in rows]
    assert abs(values[0]) < 1e-8
    assert values[1] == pytest.approx(1.5 ** (1.0 / 3.0), abs=1e-8)
    assert abs(values[2]) < 1e-8
    assert [float(r["lambda"]) for r in rows] == [1.0, 2.25, 4.0]


def test_charfn_requires_s_range(tmp_path, capsys):
    cfg = write_config(tmp_path, range_={"n_min": 1, "n_max": 9})
    assert main(["charfn", "--config", cfg]) == 1
    assert "s-range" in capsys.readouterr().err


def test_zero_samples_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path,
                       range_={"s_min": 1.0, "s_max": 2.0, "samples": 0})
    assert main(["charfn", "--config", cfg]) == 1
    assert "samples" in capsys.readouterr().err


def test_eigfn_table(tmp_path):
    cfg = write_config(tmp_path, solver=FAST, range_={"n_min": 1, "n_max": 9},
                       extra={"grid": {"x_samples": 101}})
    out = tmp_path / "eig.csv"
    assert main(["eigfn", "--config", cfg, "--n", "4", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 100  # the interface sample is dropped
    for r in rows:
        x = float(r["x"])
        assert abs(x - PI / 2) > 1e-9
        if x < PI / 2:
            assert float(r["abs_err_leading"]) < 1e-7
    # amplitude drop across the interface ~ n^(-2/3)
    left_max = max(abs(float(r["u_computed"])) for r in rows if float(r["x"]) < PI / 2)
    right_max = max(abs(float(r["u_computed"])) for r in rows if float(r["x"]) > PI / 2)
    assert right_max / left_max == pytest.approx(4.0 ** (-2.0 / 3.0), rel=0.05)


def test_eigfn_needs_index(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["eigfn", "--config", cfg]) == 1
    assert "--n" in capsys.readouterr().err


def test_verify_insufficient_range(tmp_path, capsys):
    cfg = write_config(tmp_path, range_={"n_min": 5, "n_max": 9})
    assert main(["verify", "--config", cfg]) == 1
    assert "at least 8" in capsys.readouterr().err


def test_verify_null_passes(tmp_path, capsys):
    # default steps: rate verification needs full resolution so eigenvalue
    # noise stays under the measurement floor
    cfg = write_config(tmp_path, range_={"n_min": 5, "n_max": 13})
    out = tmp_path / "report.json"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert report["refined_s_fit"]["floor_limited"] is True
    assert len(report["residual_table"]) == 9
    assert "PASS" in capsys.readouterr().err


def test_validate_reports_and_exit_codes(tmp_path, capsys):
    good = write_config(tmp_path, "good.json")
    assert main(["validate", "--config", good]) == 0
    bad = write_config(tmp_path, "bad.json", problem={"retard_left": "2*x"})
    assert main(["validate", "--config", bad]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_validate_json_format(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "validate.json"
    assert main(["validate", "--config", cfg, "--format", "json",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["valid"] is True and doc["case1"] is True


def test_json_output_format(tmp_path):
    cfg = write_config(tmp_path, solver=FAST, range_={"n_min": 2, "n_max": 2},
                       output={"format": "json"})
    out = tmp_path / "rows.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert rows[0]["n"] == 2
    assert abs(rows[0]["s_n"] - 2.0) < 1e-7


def test_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path, solver=FAST, range_={"n_min": 1, "n_max": 4})
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["solve", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["solve", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
