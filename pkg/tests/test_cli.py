import json
import subprocess
import sys

import pytest

from gentleq.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_IO, EXIT_OK, main


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_success_and_outputs(tmp_path):
    cfg = write_config(tmp_path, {"alpha": 0.3, "n": 300, "reps": 20, "seed": 7})
    out = tmp_path / "r.csv"
    assert main(["tomography", "--config", cfg, "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "kind,alpha,n,epsilon,trial_index,metric_name,metric_value,seed"
    assert len(lines) == 21
    summary = json.loads((tmp_path / "r.csv.summary.json").read_text())
    assert {"bound", "mean", "pass"} <= set(summary)


def test_overrides_beat_config(tmp_path):
    cfg = write_config(tmp_path, {"alpha": 0.3, "n": 300, "reps": 20, "seed": 7, "out": str(tmp_path / "ignored.csv")})
    out = tmp_path / "r.json"
    rc = main(["tomography", "--config", cfg, "--alpha", "0.2,0.4", "--reps", "3", "--out", str(out), "--format", "json"])
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert sorted({r["alpha"] for r in doc["records"]}) == [0.2, 0.4]
    assert len(doc["records"]) == 6
    assert not (tmp_path / "ignored.csv").exists()


def test_stdout_output(capsys):
    assert main(["tomography", "--alpha", "0.5", "--n", "10", "--reps", "2"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("kind,alpha,n,")


def test_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, {"alpha": 2.0, "n": 10})
    assert main(["tomography", "--config", cfg]) == EXIT_CONFIG
    assert "alpha" in capsys.readouterr().err


def test_kind_mismatch(tmp_path):
    cfg = write_config(tmp_path, {"kind": "certify", "alpha": 0.2})
    assert main(["tomography", "--config", cfg, "--n", "5"]) == EXIT_CONFIG


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["tomography", "--config", str(path)]) == EXIT_CONFIG


def test_io_errors(tmp_path):
    assert main(["tomography", "--config", str(tmp_path / "nope.json")]) == EXIT_IO
    assert main(["tomography", "--n", "5", "--reps", "1", "--out", str(tmp_path / "no" / "x.csv")]) == EXIT_IO


def test_check_flag(tmp_path):
    from gentleq.gentle import qls_qubit
    from gentleq.measurements import measurement_to_json

    ok = write_config(tmp_path, {"alpha": 0.3, "reps": 1, "samples": 2000}, "ok.json")
    assert main(["gentleness-scan", "--config", ok, "--check", "--out", str(tmp_path / "a.csv")]) == EXIT_OK
    bad = write_config(tmp_path, {"alpha": 0.3, "reps": 1, "samples": 2000, "measurement": measurement_to_json(qls_qubit("z", 0.6))}, "bad.json")
    assert main(["gentleness-scan", "--config", bad, "--out", str(tmp_path / "b.csv")]) == EXIT_OK
    assert main(["gentleness-scan", "--config", bad, "--check", "--out", str(tmp_path / "b.csv")]) == EXIT_CHECK


def test_unknown_kind_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "gentleq", "np-error", "--alpha", "0.5", "--reps", "5", "--seed", "1", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 11


def test_byte_identical_across_runs_and_threads(tmp_path):
    cfg = write_config(tmp_path, {"alpha": [0.2, 0.5], "n": [100, 300], "reps": 300, "seed": 5})
    outs = []
    for threads in ("1", "4", "4"):
        path = tmp_path / f"t{threads}_{len(outs)}.csv"
        assert main(["tomography", "--config", cfg, "--threads", threads, "--out", str(path)]) == EXIT_OK
        outs.append((path.read_bytes(), (tmp_path / (path.name + ".summary.json")).read_bytes()))
    assert outs[0] == outs[1] == outs[2]
