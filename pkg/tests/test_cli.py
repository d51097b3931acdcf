import json

import numpy as np
import pytest

from wegnerflow.cli import main, _fmt


def write(path, obj):
    path.write_text(json.dumps(obj))


MATRIX_SPEC = {
    "dim": 2,
    "entries": [[[1.0, 0.0], [0.3, 0.1]], [[0.3, -0.1], [2.0, 0.0]]],
}


def test_fmt_floats_17_digits():
    assert _fmt(0.1) == "0.10000000000000001"
    assert _fmt(1.0) == "1"
    assert _fmt(float("inf")) == '"inf"'
    assert _fmt({"a": [1, 2.5, True, None, "x"]}) == \
        '{"a": [1, 2.5, true, null, "x"]}'
    with pytest.raises(TypeError):
        _fmt(object())


def test_flow_command(tmp_path):
    spec = tmp_path / "spec.json"
    write(spec, MATRIX_SPEC)
    out = tmp_path / "out"
    assert main(["flow", "--spec", str(spec), "--out", str(out)]) == 0

    summary = json.loads((out / "summary.json").read_text())
    assert summary["stop_reason"] == "converged"
    assert summary["eigenvalue_match_error"] < 1e-8
    assert summary["trace_drift"] < 1e-9

    lines = (out / "trajectory.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header[:5] == ["l", "trace_h", "trace_h2",
                          "offdiag_sq", "eps_sq_sum"]
    assert "band_i1_sq" in header
    assert len(lines) > 2
    assert (out / "metadata.json").exists()


def test_flow_outputs_are_deterministic(tmp_path):
    spec = tmp_path / "spec.json"
    write(spec, MATRIX_SPEC)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["flow", "--spec", str(spec), "--out", str(out)]) == 0
        outs.append((out / "trajectory.csv").read_bytes()
                    + (out / "summary.json").read_bytes())
    assert outs[0] == outs[1]


def test_flow_model_spec_with_band_generator(tmp_path):
    spec = tmp_path / "spec.json"
    write(spec, {"model": "gho", "omega": 1.0, "lam": 0.2, "n_max": 20,
                 "generator": {"band": 2},
                 "flow": {"l_max": 0.5, "sample_dl": 0.1}})
    out = tmp_path / "out"
    assert main(["flow", "--spec", str(spec), "--out", str(out)]) == 0


def test_metric_command(tmp_path):
    spec = tmp_path / "spec.json"
    write(spec, {"family": "spin", "s": 0.5, "base_m": 0.5,
                 "points": [[0.7, 0.3]]})
    out = tmp_path / "out"
    assert main(["metric", "--spec", str(spec), "--out", str(out)]) == 0
    lines = (out / "metric.csv").read_text().strip().splitlines()
    assert lines[0] == "theta,phi,g_00,g_01,g_10,g_11"
    vals = [float(v) for v in lines[1].split(",")]
    assert vals[2] == pytest.approx(0.25, abs=1e-6)
    assert vals[5] == pytest.approx(0.25 * np.sin(0.7) ** 2, abs=1e-6)


def test_condition_command(capsys):
    assert main(["condition", "--bands", "1,4", "--a", "1"]) == 0
    assert capsys.readouterr().out.startswith("true")
    assert main(["condition", "--bands", "1,2", "--a", "1"]) == 0
    assert "band 2 = 2x" in capsys.readouterr().out


def test_spec_errors_exit_2(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    out = tmp_path / "out"
    assert main(["flow", "--spec", str(missing), "--out", str(out)]) == 2

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["flow", "--spec", str(bad), "--out", str(out)]) == 2

    write(bad, {"model": "unknown"})
    assert main(["flow", "--spec", str(bad), "--out", str(out)]) == 2

    write(bad, {"model": "gho", "lam": 0.9})  # omega <= 2|lambda|
    assert main(["flow", "--spec", str(bad), "--out", str(out)]) == 2

    assert main(["condition", "--bands", "1,x", "--a", "1"]) == 2
    assert main(["condition", "--bands", "1,2", "--a", "3"]) == 2
    capsys.readouterr()


def test_geodesic_command(tmp_path):
    spec = tmp_path / "spec.json"
    write(spec, {"model": "spin", "s": 0.5,
                 "b_field": [0.70710678, 0.0, 0.70710678]})
    out = tmp_path / "out"
    assert main(["geodesic", "--spec", str(spec), "--out", str(out)]) == 0
    verdict = json.loads((out / "verdict.json").read_text())
    assert verdict["schema_version"] == 1
    names = {c["name"] for c in verdict["checks"]}
    assert {"geodesic_residual", "variational_gradient",
            "xi_residual"} <= names
    assert all(c["pass"] for c in verdict["checks"])


def test_geodesic_rejects_matrix_spec(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    write(spec, MATRIX_SPEC)
    out = tmp_path / "out"
    assert main(["geodesic", "--spec", str(spec), "--out", str(out)]) == 2
    capsys.readouterr()
