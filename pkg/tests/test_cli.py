import csv
import io
import json

import pytest

from cwpotts.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_lines_csv(capsys):
    code, out, _ = run(["lines", "--name", "b2b", "--s-range", "0.67:3", "--samples", "25"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 25
    assert all(float(r["residual_norm"]) < 1e-10 for r in rows)


def test_lines_json_to_file(tmp_path):
    path = tmp_path / "eu.json"
    assert (
        main(["lines", "--name", "eu", "--beta-range", "3:4", "--samples", "5", "--format", "json", "--out", str(path)])
        == 0
    )
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == 1
    recs = doc["lines"]["EU"]["records"]
    assert len(recs) == 5 and recs[0]["t"] is None


def test_lines_svg(tmp_path):
    path = tmp_path / "ew.svg"
    assert main(["lines", "--name", "ew", "--samples", "10", "--format", "svg", "--out", str(path)]) == 0
    assert path.read_text().startswith("<svg")


def test_wrong_range_kind_is_usage_error(capsys):
    code, _, err = run(["lines", "--name", "mte", "--s-range", "1:2"], capsys)
    assert code == 2 and "error" in err


def test_oracle(capsys):
    code, out, _ = run(["oracle", "--n", "6", "--beta", "2.5", "--t", "0.5", "--counts", "2,2,1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["max_abs_difference"] < 1e-12
    assert abs(sum(doc["exact"]) - 1) < 1e-12


@pytest.mark.parametrize(
    "args",
    [
        ["oracle", "--n", "4", "--beta", "1", "--t", "0.5", "--counts", "1,1"],
        ["oracle", "--n", "4", "--beta", "1", "--t", "0.5", "--g", "0.3"],
        ["oracle", "--n", "4", "--beta", "1"],
        ["slice", "--beta", "2.7", "--g", "-1"],
        ["slice", "--beta", "2.7", "--g", "0.3", "--resolution", "2"],
    ],
)
def test_usage_errors(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2 and err


def test_slice_output_is_deterministic(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["slice", "--kind", "maxwell", "--beta", "2.9", "--t", "0.7", "--resolution", "60"]
    assert main(base + ["--out", str(a)]) == 0
    monkeypatch.setenv("CWPOTTS_WORKERS", "3")
    assert main(base + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["topology"]["label"] == "star"


def test_bifurcation_slice_csv(capsys):
    code, out, _ = run(
        ["slice", "--kind", "bifurcation", "--beta", "2.755", "--g", "0.5", "--resolution", "80", "--format", "csv"],
        capsys,
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["space"] for r in rows} >= {"alpha"}
    assert any(r["inside"] in ("0", "False", "false") for r in rows)


def test_classify_short(capsys):
    code, out, _ = run(
        ["classify", "--beta", "2.4", "--t-range", "0.2:2", "--n-t", "3", "--resolution", "40", "--no-doubling"], capsys
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["regime"] == "I"


def test_phase_diagram(tmp_path):
    path = tmp_path / "pd.json"
    assert main(["phase-diagram", "--samples", "20", "--out", str(path)]) == 0
    doc = json.loads(path.read_text())
    assert set(doc["constants"]) >= {"beta_NG", "beta_BE", "beta_*"}
    assert max(doc["junction_gaps"].values()) < 1e-4
