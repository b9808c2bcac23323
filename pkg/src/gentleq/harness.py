"""Seeded Monte Carlo experiments and their CSV/JSON output.

Every trial draws from its own counter-based stream keyed on
(master seed, grid point, trial index), so results do not depend on how trials
are scheduled across worker threads.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from . import divergences, gentle, learning
from .errors import ConfigInvalid, GentleqError
from .measurements import measurement_from_json, outcome_distribution
from .states import bloch_array, bloch_to_density, sample_bloch, state_from_json, trace_distance

KINDS = ("tomography", "certify", "qdpi-scan", "gentleness-scan", "np-error")
FORMATS = ("csv", "json")
CSV_HEADER = ("kind", "alpha", "n", "epsilon", "trial_index", "metric_name", "metric_value", "seed")
SEED_MASK = (1 << 64) - 1
_GRID_SHIFT = 40
_SETUP_TRIAL = (1 << _GRID_SHIFT) - 1  # reserved stream per grid point for state setup
CHUNK = 256


def derive_trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent Philox stream keyed on (seed, index); identical inputs give identical streams."""
    key = (int(master_seed) & SEED_MASK) | ((int(trial_index) & SEED_MASK) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def _stream_index(grid_index: int, trial_index: int) -> int:
    return (grid_index << _GRID_SHIFT) | trial_index


@dataclass(frozen=True)
class TrialRecord:
    kind: str
    alpha: float | None
    n: int | None
    epsilon: float | None
    trial_index: int
    metric_name: str
    metric_value: float
    seed: int

    def __post_init__(self):
        if not math.isfinite(self.metric_value):
            raise ValueError(f"metric {self.metric_name} is not finite")


@dataclass
class ExperimentConfig:
    kind: str
    alpha: Any = 0.3
    n: Any = None
    epsilon: float | None = None
    reps: int = 100
    seed: int = 0
    state: Any = "random"
    rho0: Any = None
    rho1: Any = None
    out_path: str | None = None
    format: str = "csv"
    allocation: str = "per_axis"
    samples: int = 10_000
    refine_steps: int = 8
    alternatives: int = 8
    shots: int = 1
    axis: str = "z"
    measurement: Any = None

    @property
    def alphas(self) -> list:
        return [float(a) for a in (self.alpha if isinstance(self.alpha, list) else [self.alpha])]

    @property
    def ns(self) -> list:
        if self.n is None:
            return [None]
        return [None if v in (None, "auto") else int(v) for v in (self.n if isinstance(self.n, list) else [self.n])]

    def validate(self) -> "ExperimentConfig":
        errs = {}
        if self.kind not in KINDS:
            errs["kind"] = f"must be one of {', '.join(KINDS)}"
        if self.format not in FORMATS:
            errs["format"] = "must be csv or json"
        if not isinstance(self.reps, int) or self.reps < 1:
            errs["reps"] = "must be an integer >= 1"
        if not isinstance(self.seed, int) or not (0 <= self.seed <= SEED_MASK):
            errs["seed"] = "must be an unsigned 64-bit integer"
        try:
            alphas = self.alphas
        except (TypeError, ValueError):
            alphas, errs["alpha"] = [], "must be a number or a list of numbers"
        lo_open = self.kind in ("tomography", "certify")
        for a in alphas:
            if not (0.0 <= a <= 1.0) or (lo_open and a == 0.0):
                errs["alpha"] = f"{a!r} is outside {'(0, 1]' if lo_open else '[0, 1]'}"
            elif self.kind == "qdpi-scan" and a >= 1.0:
                errs["alpha"] = "qdpi-scan needs alpha < 1"
        try:
            ns = self.ns
        except (TypeError, ValueError):
            ns, errs["n"] = [], "must be an integer or a list of integers"
        if self.kind == "tomography" and None in ns:
            errs["n"] = "tomography needs n"
        for v in ns:
            if v is not None and v < (3 if self.allocation == "split" else 1):
                errs["n"] = f"{v} copies is too few"
        if self.kind == "certify":
            if self.epsilon is None or not (0.0 < float(self.epsilon) <= 1.0):
                errs["epsilon"] = "certify needs epsilon in (0, 1]"
            if self.alternatives < 1:
                errs["alternatives"] = "must be >= 1"
        if self.allocation not in learning.ALLOCATIONS:
            errs["allocation"] = f"must be one of {learning.ALLOCATIONS}"
        if self.samples < 1:
            errs["samples"] = "must be >= 1"
        if self.shots < 1:
            errs["shots"] = "must be >= 1"
        if self.axis not in ("x", "y", "z"):
            errs["axis"] = "must be x, y or z"
        for name in ("state", "rho0", "rho1"):
            v = getattr(self, name)
            if v is not None and v != "random":
                try:
                    state_from_json(v)
                except (GentleqError, KeyError, TypeError, ValueError) as exc:
                    errs[name] = f"invalid state: {exc}"
        if self.measurement is not None:
            try:
                measurement_from_json(self.measurement)
            except (GentleqError, KeyError, TypeError, ValueError) as exc:
                errs["measurement"] = f"invalid measurement: {exc}"
        if errs:
            raise ConfigInvalid(errs)
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "out" in d:
            d["out_path"] = d.pop("out")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigInvalid({k: "unknown field" for k in unknown})
        if "kind" not in d:
            raise ConfigInvalid({"kind": "missing"})
        return cls(**d)


@dataclass
class ExperimentResult:
    records: list
    summary: dict = field(default_factory=dict)


def _state_or_random(obj, rng) -> np.ndarray:
    if obj is None or obj == "random":
        return bloch_to_density(sample_bloch(rng, "ball"))
    return state_from_json(obj)


# --- per-kind trial functions ------------------------------------------------------
# Each returns a list of (metric_name, value) for one trial.


def _tomography_trial(ctx, rng):
    est = learning.tomography(ctx["rho"], ctx["n"], ctx["alpha"], rng, ctx["allocation"])
    return [("sq_trace_err", est.squared_error(ctx["r"]))]


def _certify_trial(ctx, rng):
    out = []
    d = learning.certify(ctx["rho0"], ctx["rho0"], ctx["epsilon"], ctx["n"], ctx["alpha"], rng, ctx["allocation"])
    out.append(("type1", 1.0 if d.decision == "H1" else 0.0))
    for k, rho1 in enumerate(ctx["alts"]):
        d = learning.certify(rho1, ctx["rho0"], ctx["epsilon"], ctx["n"], ctx["alpha"], rng, ctx["allocation"])
        out.append((f"type2_alt{k}", 1.0 if d.decision == "H0" else 0.0))
    return out


def _qdpi_trial(ctx, rng):
    a = ctx["alpha"]
    rho0 = bloch_to_density(sample_bloch(rng, "ball"))
    rho1 = bloch_to_density(sample_bloch(rng, "ball"))
    t = trace_distance(rho0, rho1)
    m = gentle.gentle_np_measurement(rho0, rho1, a)
    skl = divergences.sym_kl(outcome_distribution(m, rho0), outcome_distribution(m, rho1))
    out = [
        ("trace_distance", t),
        ("sym_kl", skl),
        ("lower_bound", divergences.qdpi_lower_bound(a, t)),
        ("upper_bound_positive", divergences.qdpi_upper_bound(a, t, positive_ops=True)),
    ]
    if a < 0.5:
        out.append(("upper_bound_general", divergences.qdpi_upper_bound(a, t)))
    return out


def _gentleness_trial(ctx, rng):
    rep = gentle.worst_case_disturbance(ctx["measurement"], ctx["samples"], ctx["refine_steps"], rng)
    return [("worst_disturbance", rep.worst_disturbance)]


def _np_trial(ctx, rng):
    e1, e2 = gentle.simulate_np_error(ctx["rho0"], ctx["rho1"], ctx["alpha"], ctx["shots"], rng)
    return [("type1", e1 / ctx["shots"]), ("type2", e2 / ctx["shots"])]


_TRIALS = {
    "tomography": _tomography_trial,
    "certify": _certify_trial,
    "qdpi-scan": _qdpi_trial,
    "gentleness-scan": _gentleness_trial,
    "np-error": _np_trial,
}


def _grid_context(cfg: ExperimentConfig, alpha: float, n, grid_index: int) -> dict:
    setup = derive_trial_rng(cfg.seed, _stream_index(grid_index, _SETUP_TRIAL))
    ctx = {"alpha": alpha, "n": n, "allocation": cfg.allocation, "epsilon": cfg.epsilon}
    kind = cfg.kind
    if kind == "tomography":
        ctx["rho"] = _state_or_random(cfg.state, setup)
        ctx["r"] = bloch_array(ctx["rho"])
    elif kind == "certify":
        ctx["rho0"] = _state_or_random(cfg.state, setup)
        if n is None:
            ctx["n"] = learning.required_copies_certification(cfg.epsilon, alpha)
        r0 = bloch_array(ctx["rho0"])
        ctx["alts"] = [bloch_to_density(r) for r in learning.alternatives_at_distance(r0, cfg.epsilon, cfg.alternatives, setup)]
    elif kind == "gentleness-scan":
        if cfg.measurement is not None:
            ctx["measurement"] = measurement_from_json(cfg.measurement)
        else:
            ctx["measurement"] = gentle.qls_qubit(cfg.axis, alpha)
        ctx["samples"] = cfg.samples
        ctx["refine_steps"] = cfg.refine_steps
    elif kind == "np-error":
        ctx["rho0"] = _state_or_random(cfg.rho0, setup)
        ctx["rho1"] = _state_or_random(cfg.rho1, setup)
        ctx["shots"] = cfg.shots
    return ctx


def _summarize(cfg: ExperimentConfig, ctx: dict, metrics: dict) -> dict:
    a, n = ctx["alpha"], ctx["n"]
    s: dict = {"alpha": a, "n": n}
    kind = cfg.kind
    if kind == "tomography":
        v = np.asarray(metrics["sq_trace_err"])
        bound = learning.tomography_mse_bound(n, a)
        s.update(
            metric="sq_trace_err",
            mean=float(v.mean()),
            variance=float(v.var(ddof=1)) if v.size > 1 else 0.0,
            bound=bound,
            mse_times_n_alpha2=float(v.mean()) * n * a * a,
            state={"bloch": [float(x) for x in ctx["r"]]},
            allocation=cfg.allocation,
        )
        s["pass"] = bool(s["mean"] <= bound)
    elif kind == "certify":
        reps = len(metrics["type1"])
        t1 = float(np.mean(metrics["type1"]))
        t2 = {k: float(np.mean(v)) for k, v in metrics.items() if k.startswith("type2")}
        worst_key = max(t2, key=lambda k: (t2[k], k))
        w = t2[worst_key]
        total = t1 + w
        sigma = math.sqrt((t1 * (1 - t1) + w * (1 - w)) / reps)
        bound = min(1.0, learning.certification_error_bound(ctx["n"], cfg.epsilon, a))
        s.update(
            epsilon=cfg.epsilon,
            n=ctx["n"],
            type1=t1,
            type2=t2,
            worst_type2=w,
            total_error=total,
            sigma=sigma,
            bound=bound,
            budget=1.0 / 3.0,
            state={"bloch": [float(x) for x in bloch_array(ctx["rho0"])]},
        )
        s["pass"] = bool(total <= bound + 3.0 * sigma)
    elif kind == "qdpi-scan":
        skl = np.asarray(metrics["sym_kl"])
        lo = np.asarray(metrics["lower_bound"])
        up = np.asarray(metrics["upper_bound_positive"])
        viol = int(np.sum(skl < lo * (1 - 1e-12) - 1e-15) + np.sum(skl > up * (1 + 1e-12) + 1e-15))
        if "upper_bound_general" in metrics:
            ug = np.asarray(metrics["upper_bound_general"])
            viol += int(np.sum(skl > ug * (1 + 1e-12) + 1e-15))
        s.update(
            pairs=int(skl.size),
            mean_sym_kl=float(skl.mean()),
            min_ratio_to_lower=float(np.min(skl / np.where(lo > 0, lo, np.inf))) if np.any(lo > 0) else None,
            max_ratio_to_upper=float(np.max(skl / np.where(up > 0, up, np.inf))) if np.any(up > 0) else None,
            violations=viol,
        )
        s["pass"] = viol == 0
    elif kind == "gentleness-scan":
        w = float(np.max(metrics["worst_disturbance"]))
        rep_delta = gentle.qdp_delta_of_measurement(ctx["measurement"])
        s.update(
            worst_disturbance=w,
            qdp_delta_observed=None if math.isinf(rep_delta) else rep_delta,
            qdp_singular=math.isinf(rep_delta),
            samples=cfg.samples,
            refine_steps=cfg.refine_steps,
            note="empirical lower bound on the supremum over pure states",
        )
        if cfg.measurement is None:
            s.update(analytic=a, measurement=f"qls-{cfg.axis}")
            s["pass"] = bool(a - 1e-6 <= w <= a + 1e-9)
        else:
            s.update(measurement="user", claimed_alpha=a)
            s["pass"] = bool(w <= a + 1e-9)
    elif kind == "np-error":
        trials = len(metrics["type1"]) * cfg.shots
        e1 = float(np.mean(metrics["type1"]))
        e2 = float(np.mean(metrics["type2"]))
        p1, p2 = gentle.np_error_probabilities(ctx["rho0"], ctx["rho1"], a)
        analytic = gentle.np_total_error(ctx["rho0"], ctx["rho1"], a)
        sigma = math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / trials)
        emp = e1 + e2
        s.update(
            shots=cfg.shots,
            trials=trials,
            empirical=emp,
            type1=e1,
            type2=e2,
            analytic=analytic,
            sigma=sigma,
            trace_distance=trace_distance(ctx["rho0"], ctx["rho1"]),
        )
        s["pass"] = bool(abs(emp - analytic) <= 3.0 * sigma + 1e-12)
    return s


def _worker_count(threads: int | None) -> int:
    env = os.environ.get("GENTLEQ_THREADS", "")
    cap = int(env) if env.isdigit() and int(env) > 0 else None
    want = threads if threads and threads > 0 else (cap or os.cpu_count() or 1)
    return max(1, min(want, cap) if cap else want)


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Run every (alpha, n) grid point for ``reps`` trials; records come back in grid/trial order."""
    cfg.validate()
    trial_fn = _TRIALS[cfg.kind]
    uses_n = cfg.kind in ("tomography", "certify")
    grid = [(a, n) for a in cfg.alphas for n in (cfg.ns if uses_n else [None])]
    records: list = []
    summaries = []
    workers = _worker_count(threads)

    def run_chunk(args):
        ctx, g, start, stop = args
        return [trial_fn(ctx, derive_trial_rng(cfg.seed, _stream_index(g, i))) for i in range(start, stop)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for g, (a, n) in enumerate(grid):
            ctx = _grid_context(cfg, a, n, g)
            chunks = [(ctx, g, s, min(s + CHUNK, cfg.reps)) for s in range(0, cfg.reps, CHUNK)]
            results = [r for chunk in pool.map(run_chunk, chunks) for r in chunk]
            metrics: dict = {}
            eps = cfg.epsilon if cfg.kind == "certify" else None
            for i, trial in enumerate(results):
                for name, value in trial:
                    metrics.setdefault(name, []).append(value)
                    records.append(TrialRecord(cfg.kind, a, ctx["n"], eps, i, name, float(value), cfg.seed))
            summaries.append(_summarize(cfg, ctx, metrics))
    summary = {
        "kind": cfg.kind,
        "seed": cfg.seed,
        "reps": cfg.reps,
        "grid": summaries,
        "pass": all(s["pass"] for s in summaries),
    }
    if len(summaries) == 1:
        summary.update({k: v for k, v in summaries[0].items() if k not in summary})
    if cfg.kind == "tomography" and len(summaries) > 1:
        prod = [s["mse_times_n_alpha2"] for s in summaries]
        summary["mse_times_n_alpha2_spread"] = max(prod) / min(prod) if min(prod) > 0 else None
    return ExperimentResult(records, summary)


# --- output -------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(getattr(r, h)) for h in CSV_HEADER])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def summary_to_json(summary: dict) -> str:
    return json.dumps(_json_safe(summary), indent=2) + "\n"


def write_records(records, summary, path, fmt: str = "csv") -> None:
    """Write records (and the summary) to ``path``.

    CSV output goes to ``path`` with the summary in ``path + ".summary.json"``;
    JSON output holds both under "records" and "summary".
    """
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(records_to_csv(records))
        if summary is not None:
            with open(f"{path}.summary.json", "w", encoding="utf-8") as fh:
                fh.write(summary_to_json(summary))
    elif fmt == "json":
        doc = {"records": [asdict(r) for r in records], "summary": _json_safe(summary)}
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_records(path, fmt: str = "csv") -> list:
    """Inverse of :func:`write_records` for the record list."""
    with open(path, encoding="utf-8") as fh:
        if fmt == "json":
            return [TrialRecord(**r) for r in json.load(fh)["records"]]
        rows = list(csv.DictReader(fh))

    def opt(v, cast):
        return None if v == "" else cast(v)

    return [
        TrialRecord(
            kind=r["kind"],
            alpha=opt(r["alpha"], float),
            n=opt(r["n"], int),
            epsilon=opt(r["epsilon"], float),
            trial_index=int(r["trial_index"]),
            metric_name=r["metric_name"],
            metric_value=float(r["metric_value"]),
            seed=int(r["seed"]),
        )
        for r in rows
    ]
