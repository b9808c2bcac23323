"""Quantum measurements given by measurement operators {M_y}.

A measurement is stored together with its labels; outcome probabilities are
``Tr(rho M_y* M_y)`` and the post-measurement state for outcome ``y`` is
``M_y rho M_y* / p(y)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    InvalidMeasurement,
    NotAProjector,
    UnknownLabel,
    ZeroProbabilityOutcome,
)

COMPLETENESS_TOL = 1e-9
PROB_FLOOR = 1e-12


class Measurement:
    """Finite family of labelled measurement operators satisfying completeness."""

    __slots__ = ("labels", "operators", "_effects", "_index")

    def __init__(self, labels: Sequence[str], operators: Sequence, *, tol: float = COMPLETENESS_TOL):
        labels = tuple(str(l) for l in labels)
        if not labels:
            raise InvalidMeasurement("a measurement needs at least one outcome")
        if len(labels) != len(operators):
            raise InvalidMeasurement("labels and operators differ in length")
        if len(set(labels)) != len(labels):
            raise InvalidMeasurement("duplicate outcome labels")
        ops = []
        for op in operators:
            m = linalg.as_matrix(op).copy()
            m.setflags(write=False)
            ops.append(m)
        d = ops[0].shape[0]
        if any(m.shape != (d, d) for m in ops):
            raise DimensionMismatch("all measurement operators must share one dimension")
        effects = []
        for m in ops:
            e = m.conj().T @ m
            e = 0.5 * (e + e.conj().T)
            e.setflags(write=False)
            effects.append(e)
        dev = float(np.max(np.abs(sum(effects) - np.eye(d))))
        if dev > tol:
            raise InvalidMeasurement(f"completeness violated: max |sum E_y - 1| = {dev:.3g}")
        self.labels = labels
        self.operators = tuple(ops)
        self._effects = tuple(effects)
        self._index = {l: i for i, l in enumerate(labels)}

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def effects(self) -> tuple:
        """The positive operators E_y = M_y* M_y."""
        return self._effects

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(label) from None

    def operator(self, label: str) -> np.ndarray:
        return self.operators[self.index(label)]

    def effect(self, label: str) -> np.ndarray:
        return self._effects[self.index(label)]

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"Measurement(dim={self.dim}, labels={list(self.labels)})"


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    labels: tuple
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if p.size != len(self.labels):
            raise ValueError("labels and probabilities differ in length")
        if np.any(p < -PROB_FLOOR) or np.any(p > 1 + PROB_FLOOR):
            raise ValueError("probability outside [0, 1]")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "p", p)

    def __eq__(self, other):
        if not isinstance(other, OutcomeDistribution):
            return NotImplemented
        return self.labels == other.labels and bool(np.array_equal(self.p, other.p))

    __hash__ = None

    def __getitem__(self, label):
        try:
            return float(self.p[self.labels.index(label)])
        except ValueError:
            raise UnknownLabel(label) from None

    def as_dict(self) -> dict:
        return dict(zip(self.labels, (float(v) for v in self.p)))

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "p": [float(v) for v in self.p]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "OutcomeDistribution":
        return cls(tuple(obj["labels"]), np.asarray(obj["p"], dtype=float))


def _check_dims(m: Measurement, rho: np.ndarray) -> np.ndarray:
    rho = linalg.as_matrix(rho)
    if rho.shape[0] != m.dim:
        raise DimensionMismatch(f"state has d={rho.shape[0]}, measurement d={m.dim}")
    return rho


def outcome_probabilities(m: Measurement, rho) -> np.ndarray:
    rho = _check_dims(m, rho)
    return np.array([np.sum(e * rho.T).real for e in m.effects])


def outcome_distribution(m: Measurement, rho) -> OutcomeDistribution:
    return OutcomeDistribution(m.labels, outcome_probabilities(m, rho))


def post_measurement_state(m: Measurement, rho, label: str) -> np.ndarray:
    rho = _check_dims(m, rho)
    op = m.operator(label)
    out = op @ rho @ op.conj().T
    p = np.trace(out).real
    if p < PROB_FLOOR:
        raise ZeroProbabilityOutcome(f"p({label}) = {p:.3g} is below {PROB_FLOOR:g}")
    out = out / p
    return 0.5 * (out + out.conj().T)


def _draw_indices(p: np.ndarray, rng: np.random.Generator, size=None):
    cdf = np.cumsum(np.clip(p, 0.0, None))
    u = rng.random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(p) - 1)


def sample_outcome(m: Measurement, rho, rng: np.random.Generator) -> tuple[str, np.ndarray]:
    """Draw one outcome and return it with the corresponding post-measurement state."""
    label = m.labels[int(_draw_indices(outcome_probabilities(m, rho), rng))]
    return label, post_measurement_state(m, rho, label)


def sample_labels(m: Measurement, rho, rng: np.random.Generator, size: int) -> np.ndarray:
    """Outcome indices of ``size`` independent measurements of fresh copies of ``rho``."""
    return _draw_indices(outcome_probabilities(m, rho), rng, size)


def tensor_product(m1: Measurement, m2: Measurement) -> Measurement:
    """Product measurement with operators M_a (x) M_b and labels ``"a,b"``."""
    labels = []
    ops = []
    for la, a in zip(m1.labels, m1.operators):
        for lb, b in zip(m2.labels, m2.operators):
            labels.append(f"{la},{lb}")
            ops.append(np.kron(a, b))
    return Measurement(labels, ops)


def identity_measurement(d: int) -> Measurement:
    return Measurement(["id"], [np.eye(d)])


def two_outcome_pvm(p1, labels: tuple[str, str] = ("1", "0")) -> Measurement:
    """The projective measurement (P1, 1 - P1)."""
    p1 = linalg.as_matrix(p1)
    if not linalg.is_projector(p1):
        raise NotAProjector("P1 must be a hermitian idempotent")
    p1 = 0.5 * (p1 + p1.conj().T)
    return Measurement(labels, [p1, np.eye(p1.shape[0]) - p1])


def basis_pvm(kets: Iterable, labels: Sequence[str]) -> Measurement:
    """Rank-one projective measurement onto an orthonormal basis."""
    ops = [np.outer(k, np.conj(k)) for k in (np.asarray(k, dtype=np.complex128) for k in kets)]
    return Measurement(labels, ops)


def computational_pvm(d: int = 2) -> Measurement:
    if d == 2:
        return basis_pvm(np.eye(2), ["z+", "z-"])
    return basis_pvm(np.eye(d), [str(k) for k in range(d)])


def measurement_to_json(m: Measurement) -> dict:
    return {
        "dim": m.dim,
        "outcomes": [
            {"label": l, "re": [float(v) for v in op.real.reshape(-1)], "im": [float(v) for v in op.imag.reshape(-1)]}
            for l, op in zip(m.labels, m.operators)
        ],
    }


def measurement_from_json(obj: Mapping) -> Measurement:
    """Load ``{"dim": d, "outcomes": [{"label", "re", "im"}]}``; completeness is enforced."""
    try:
        d = int(obj["dim"])
        labels, ops = [], []
        for o in obj["outcomes"]:
            re = np.asarray(o["re"], dtype=float)
            im = np.asarray(o.get("im", [0.0] * (d * d)), dtype=float)
            if re.size != d * d or im.size != d * d:
                raise InvalidMeasurement(f"operator {o.get('label')!r} needs {d * d} entries")
            labels.append(o["label"])
            ops.append((re + 1j * im).reshape(d, d))
    except (KeyError, TypeError) as exc:
        raise InvalidMeasurement(f"malformed measurement JSON: {exc}") from exc
    return Measurement(labels, ops)
