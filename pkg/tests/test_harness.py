import json
import math

import numpy as np
import pytest
from scipy import stats

from gentleq import harness
from gentleq.errors import ConfigInvalid
from gentleq.harness import ExperimentConfig, TrialRecord, derive_trial_rng, read_records, run_experiment, write_records


def test_rng_determinism():
    a = derive_trial_rng(0, 0).random(100)
    b = derive_trial_rng(0, 0).random(100)
    assert np.array_equal(a, b)


def test_rng_distinct_indices_and_seeds():
    base = derive_trial_rng(0, 0).random(100)
    assert not np.array_equal(base, derive_trial_rng(0, 1).random(100))
    assert not np.array_equal(base, derive_trial_rng(1, 0).random(100))
    assert not np.array_equal(derive_trial_rng(2**64 - 1, 5).random(10), derive_trial_rng(2**64 - 1, 6).random(10))


def test_rng_uniformity_chi_square():
    u = derive_trial_rng(123, 0).random(1_000_000)
    counts = np.bincount((u * 100).astype(int), minlength=100)
    assert stats.chisquare(counts).pvalue > 1e-6


def test_rng_adjacent_streams_uncorrelated():
    x = np.array([derive_trial_rng(7, i).random(2000) for i in range(50)])
    c = np.corrcoef(x)
    off = c[~np.eye(50, dtype=bool)]
    assert np.max(np.abs(off)) < 5 / math.sqrt(2000)


def record(i, value=0.5, eps=None):
    return TrialRecord("tomography", 0.3, 3000, eps, i, "sq_trace_err", value, 7)


def test_record_rejects_non_finite():
    with pytest.raises(ValueError):
        record(0, float("nan"))


def test_empty_csv_is_header_only(tmp_path):
    path = tmp_path / "out.csv"
    write_records([], None, path, "csv")
    assert path.read_bytes() == b"kind,alpha,n,epsilon,trial_index,metric_name,metric_value,seed\n"


def test_two_records_three_lines(tmp_path):
    path = tmp_path / "out.csv"
    write_records([record(0), record(1, 0.1)], {"pass": True}, path, "csv")
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    assert len(text.splitlines()) == 3
    assert text.splitlines()[1] == "tomography,0.3,3000,,0,sq_trace_err,0.5,7"
    assert json.loads((tmp_path / "out.csv.summary.json").read_text()) == {"pass": True}


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, fmt):
    recs = [record(0, 1 / 3), record(1, 2.5e-17, eps=0.2), TrialRecord("np-error", 1.0, None, None, 2, "type1", 0.0, 2**64 - 1)]
    path = tmp_path / f"out.{fmt}"
    write_records(recs, {"x": 1}, path, fmt)
    assert read_records(path, fmt) == recs


def test_json_layout(tmp_path):
    path = tmp_path / "out.json"
    write_records([record(0)], {"bound": 1.0, "mean": 0.5}, path, "json")
    doc = json.loads(path.read_text())
    assert set(doc) == {"records", "summary"}
    assert set(doc["records"][0]) == set(harness.CSV_HEADER)


def test_write_to_missing_directory(tmp_path):
    with pytest.raises(OSError):
        write_records([], None, tmp_path / "missing" / "x.csv", "csv")


def test_config_validation_messages():
    with pytest.raises(ConfigInvalid) as info:
        ExperimentConfig(kind="tomography", alpha=1.5, n=None, reps=0).validate()
    assert set(info.value.errors) == {"alpha", "n", "reps"}
    with pytest.raises(ConfigInvalid) as info:
        ExperimentConfig(kind="certify", alpha=0.2).validate()
    assert "epsilon" in info.value.errors
    with pytest.raises(ConfigInvalid) as info:
        ExperimentConfig(kind="qdpi-scan", alpha=[0.1, 1.0]).validate()
    assert "alpha" in info.value.errors
    with pytest.raises(ConfigInvalid) as info:
        ExperimentConfig(kind="bogus", seed=-1, format="xml").validate()
    assert {"kind", "seed", "format"} <= set(info.value.errors)
    with pytest.raises(ConfigInvalid) as info:
        ExperimentConfig(kind="np-error", rho0={"bloch": [2, 0, 0]}).validate()
    assert "rho0" in info.value.errors


def test_config_from_dict():
    cfg = ExperimentConfig.from_dict({"kind": "tomography", "n": 10, "out": "x.csv"})
    assert cfg.out_path == "x.csv"
    with pytest.raises(ConfigInvalid) as info:
        ExperimentConfig.from_dict({"kind": "tomography", "colour": "red"})
    assert "colour" in info.value.errors
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict({})


def test_tomography_example():
    res = run_experiment(ExperimentConfig(kind="tomography", alpha=0.3, n=3000, reps=100, seed=7))
    assert len(res.records) == 100
    assert {r.metric_name for r in res.records} == {"sq_trace_err"}
    assert [r.trial_index for r in res.records] == list(range(100))
    s = res.summary
    assert s["bound"] == pytest.approx(3 * 1.09**2 / (16 * 0.09 * 3000), rel=1e-15)
    assert s["mean"] == pytest.approx(np.mean([r.metric_value for r in res.records]), rel=1e-12)
    assert s["mean"] <= s["bound"]
    assert "variance" in s and s["pass"]


def test_np_error_example():
    cfg = ExperimentConfig(kind="np-error", alpha=0.5, reps=1000, shots=1000, seed=1, rho0={"bloch": [0, 0, 1]}, rho1={"bloch": [0, 0, -1]})
    s = run_experiment(cfg).summary
    assert s["analytic"] == pytest.approx(0.2, abs=1e-15)
    assert s["trials"] == 10**6
    assert abs(s["empirical"] - 0.2) <= 3 * s["sigma"]
    assert s["pass"]


def test_gentleness_scan_example():
    s = run_experiment(ExperimentConfig(kind="gentleness-scan", alpha=0.3, reps=1, seed=1, samples=100_000)).summary
    assert 0.3 - 1e-6 <= s["worst_disturbance"] <= 0.3 + 1e-9
    assert s["analytic"] == 0.3
    assert s["qdp_delta_observed"] == pytest.approx(4 * math.atanh(0.3), abs=1e-12)


def test_gentleness_scan_user_measurement_fails_claim():
    from gentleq.gentle import qls_qubit
    from gentleq.measurements import measurement_to_json

    cfg = ExperimentConfig(kind="gentleness-scan", alpha=0.3, reps=1, seed=1, samples=5000, measurement=measurement_to_json(qls_qubit("x", 0.5)))
    s = run_experiment(cfg).summary
    assert s["worst_disturbance"] == pytest.approx(0.5, abs=1e-6)
    assert not s["pass"]


def test_qdpi_scan():
    res = run_experiment(ExperimentConfig(kind="qdpi-scan", alpha=[0.05, 0.3], reps=200, seed=3))
    assert res.summary["pass"] and len(res.summary["grid"]) == 2
    names = {r.metric_name for r in res.records}
    assert {"sym_kl", "lower_bound", "upper_bound_positive", "upper_bound_general", "trace_distance"} <= names


def test_certify_kind():
    res = run_experiment(ExperimentConfig(kind="certify", alpha=0.3, epsilon=0.3, reps=300, seed=4, alternatives=3))
    s = res.summary
    assert s["n"] == 1 + math.floor(3 * 1.09**2 / (2 / 3 * 0.09 * 0.09))
    assert set(s["type2"]) == {"type2_alt0", "type2_alt1", "type2_alt2"}
    assert s["total_error"] == pytest.approx(s["type1"] + s["worst_type2"])
    assert s["pass"] and s["bound"] > 0
    assert all(r.epsilon == 0.3 for r in res.records)


def test_tomography_grid_order_and_scaling_summary():
    res = run_experiment(ExperimentConfig(kind="tomography", alpha=[0.2, 0.4], n=[100, 200], reps=5, seed=0))
    keys = [(r.alpha, r.n, r.trial_index) for r in res.records]
    assert keys == sorted(keys, key=lambda k: ([0.2, 0.4].index(k[0]), k[1], k[2]))
    assert "mse_times_n_alpha2_spread" in res.summary


def test_thread_count_invariance(monkeypatch):
    cfg = ExperimentConfig(kind="tomography", alpha=[0.1, 0.5], n=[50, 500], reps=700, seed=99)
    one = run_experiment(cfg, threads=1)
    monkeypatch.setattr(harness, "CHUNK", 37)
    many = run_experiment(cfg, threads=4)
    assert harness.records_to_csv(one.records) == harness.records_to_csv(many.records)
    assert harness.summary_to_json(one.summary) == harness.summary_to_json(many.summary)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("GENTLEQ_THREADS", "2")
    assert harness._worker_count(8) == 2
    assert harness._worker_count(None) == 2
    monkeypatch.setenv("GENTLEQ_THREADS", "junk")
    assert harness._worker_count(3) == 3
