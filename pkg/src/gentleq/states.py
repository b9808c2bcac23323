"""Quantum states: density matrices, Bloch vectors and pure states."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidState, OutsideBall, WrongDimension

STATE_TOL = 1e-9
BALL_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

_S = 1.0 / np.sqrt(2.0)
AXIS_KETS = {
    "x": (np.array([_S, _S], dtype=np.complex128), np.array([_S, -_S], dtype=np.complex128)),
    "y": (np.array([_S, 1j * _S], dtype=np.complex128), np.array([_S, -1j * _S], dtype=np.complex128)),
    "z": (np.array([1, 0], dtype=np.complex128), np.array([0, 1], dtype=np.complex128)),
}
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not np.isfinite(v):
                raise InvalidState("Bloch vector has non-finite component")
        if self.norm() > 1.0 + BALL_TOL:
            raise OutsideBall(f"|r| = {self.norm():.17g} > 1")

    @classmethod
    def from_array(cls, r) -> "BlochVector":
        x, y, z = (float(v) for v in np.asarray(r, dtype=float).reshape(3))
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.sqrt(self.x * self.x + self.y * self.y + self.z * self.z))


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector with its global phase fixed.

    The first amplitude whose modulus exceeds 1e-12 is made real and positive,
    so two vectors describing the same ray compare equal.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if a.size < 1 or not np.all(np.isfinite(a)):
            raise InvalidState("amplitudes must be a non-empty finite vector")
        norm = np.linalg.norm(a)
        if norm == 0.0:
            raise InvalidState("zero vector is not a state")
        a = a / norm
        nz = np.flatnonzero(np.abs(a) > 1e-12)
        a = a * (abs(a[nz[0]]) / a[nz[0]])
        a[nz[0]] = abs(a[nz[0]])
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dim == other.dim and bool(np.allclose(self.amplitudes, other.amplitudes, atol=1e-12))

    __hash__ = None


def density_matrix(m, tol: float = STATE_TOL) -> np.ndarray:
    """Validate ``m`` as a density matrix and return a symmetrized copy."""
    try:
        rho = linalg.symmetrize(m, tol)
    except linalg.NotHermitian as exc:
        raise InvalidState(str(exc)) from exc
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"trace {tr!r} differs from 1")
    if not linalg.is_psd(rho, tol):
        raise InvalidState("matrix is not positive semi-definite")
    return rho


def bloch_to_density(r) -> np.ndarray:
    if not isinstance(r, BlochVector):
        r = BlochVector.from_array(r)
    return 0.5 * (IDENTITY2 + r.x * SIGMA_X + r.y * SIGMA_Y + r.z * SIGMA_Z)


def density_to_bloch(rho) -> BlochVector:
    rho = linalg.as_matrix(rho)
    if rho.shape != (2, 2):
        raise WrongDimension(f"Bloch vectors exist for d=2 only, got d={rho.shape[0]}")
    return BlochVector.from_array([np.trace(rho @ s).real for s in PAULIS])


def bloch_array(rho) -> np.ndarray:
    """Bloch coordinates without the ball check (for estimator internals)."""
    rho = linalg.as_matrix(rho)
    if rho.shape != (2, 2):
        raise WrongDimension(f"Bloch vectors exist for d=2 only, got d={rho.shape[0]}")
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def axis_state(axis: str, sign: str = "+") -> PureState:
    """One of the six mutually unbiased basis states, e.g. ``axis_state("y", "-")``."""
    plus, minus = AXIS_KETS[axis]
    return PureState(plus if sign == "+" else minus)


def trace_distance(rho1, rho2) -> float:
    rho1 = linalg.as_matrix(rho1)
    rho2 = linalg.as_matrix(rho2)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    return min(linalg.trace_norm_distance(rho1, rho2), 1.0)


def bloch_trace_distance(r1, r2) -> float:
    """Closed form for qubits: half the Euclidean distance of Bloch vectors."""
    return 0.5 * float(np.linalg.norm(np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)))


def trace_distance_pure(psi1: PureState, psi2: PureState, n: int = 1) -> float:
    """Trace distance between the n-fold tensor powers of two pure states."""
    if psi1.dim != psi2.dim:
        raise DimensionMismatch(f"{psi1.dim} vs {psi2.dim}")
    if n < 1:
        raise ValueError("n must be >= 1")
    overlap2 = min(abs(np.vdot(psi1.amplitudes, psi2.amplitudes)) ** 2, 1.0)
    return float(np.sqrt(max(1.0 - overlap2**n, 0.0)))


def sample_haar_pure(d: int, rng: np.random.Generator) -> PureState:
    if d < 2:
        raise ValueError("d must be >= 2")
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(z)


def sample_haar_batch(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-random unit vectors as rows (no phase canonicalization)."""
    z = rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_bloch(rng: np.random.Generator, mode: Literal["surface", "ball"] = "ball") -> BlochVector:
    if mode == "surface":
        v = rng.standard_normal(3)
        return BlochVector.from_array(v / np.linalg.norm(v))
    if mode == "ball":
        while True:
            v = rng.uniform(-1.0, 1.0, 3)
            if v @ v <= 1.0:
                return BlochVector.from_array(v)
    raise ValueError(f"unknown mode {mode!r}")


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a d x rank Ginibre matrix (full rank by default)."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def state_from_json(obj) -> np.ndarray:
    """Parse ``{"bloch": [x, y, z]}`` or ``{"matrix": {"dim", "re", "im"}}``."""
    if not isinstance(obj, dict):
        raise InvalidState("state must be a JSON object")
    if "bloch" in obj:
        return bloch_to_density(BlochVector.from_array(obj["bloch"]))
    if "matrix" in obj:
        m = obj["matrix"]
        d = int(m["dim"])
        re = np.asarray(m["re"], dtype=float)
        im = np.asarray(m.get("im", [0.0] * (d * d)), dtype=float)
        if re.size != d * d or im.size != d * d:
            raise InvalidState(f"matrix needs {d * d} entries")
        return density_matrix((re + 1j * im).reshape(d, d))
    raise InvalidState('state JSON needs a "bloch" or "matrix" key')


def state_to_json(rho, prefer_bloch: bool = True) -> dict:
    rho = linalg.as_matrix(rho)
    if prefer_bloch and rho.shape == (2, 2):
        return {"bloch": [float(v) for v in bloch_array(rho)]}
    d = rho.shape[0]
    return {
        "matrix": {
            "dim": d,
            "re": [float(v) for v in rho.real.reshape(-1)],
            "im": [float(v) for v in rho.imag.reshape(-1)],
        }
    }
