"""Gentle measurements: quantum label switch, gentleness search, qDP constants.

A two-outcome projective measurement (P1, P0) is made alpha-gentle by mixing
its projectors,

    M_1 = sqrt(keep) P1 + sqrt(switch) P0,   M_0 = sqrt(switch) P1 + sqrt(keep) P0,

with keep = e^d / (e^d + 1), switch = 1 / (e^d + 1) and d = 4 artanh(alpha).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from . import linalg
from .errors import AlphaOutOfRange, InvalidAlpha, NotAProjector, ZeroProbabilityOutcome
from .measurements import (
    PROB_FLOOR,
    Measurement,
    basis_pvm,
    outcome_probabilities,
    post_measurement_state,
)
from .states import AXES, AXIS_KETS, PureState, trace_distance


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0):
        raise InvalidAlpha(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class GentlenessParams:
    alpha: float
    delta: float = field(init=False)

    def __post_init__(self):
        a = _check_alpha(self.alpha)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "delta", math.inf if a == 1.0 else 4.0 * math.atanh(a))

    @property
    def exp_half_delta(self) -> float:
        """e^(delta/2) = (1 + alpha) / (1 - alpha)."""
        return math.inf if self.alpha == 1.0 else (1.0 + self.alpha) / (1.0 - self.alpha)

    @property
    def keep_probability(self) -> float:
        a = self.alpha
        return (1.0 + a) ** 2 / (2.0 * (1.0 + a * a))

    @property
    def switch_probability(self) -> float:
        a = self.alpha
        return (1.0 - a) ** 2 / (2.0 * (1.0 + a * a))

    @property
    def contrast(self) -> float:
        """(e^d - 1)/(e^d + 1) = 2 alpha / (1 + alpha^2), the shrink factor of E[outcome]."""
        a = self.alpha
        return 2.0 * a / (1.0 + a * a)


def _label_switch_ops(p1: np.ndarray, p0: np.ndarray, params: GentlenessParams):
    sk = math.sqrt(params.keep_probability)
    ss = math.sqrt(params.switch_probability)
    return sk * p1 + ss * p0, ss * p1 + sk * p0


def gentleize_two_outcome(pvm: Measurement, alpha: float) -> Measurement:
    """Label-switch version of a two-outcome projective measurement.

    The first label keeps most of the weight on the first projector. ``alpha=1``
    returns ``pvm`` unchanged; ``alpha=0`` gives two copies of 1/sqrt(2).
    """
    params = GentlenessParams(alpha)
    if len(pvm) != 2:
        raise NotAProjector("need exactly two outcomes")
    p1, p0 = pvm.operators
    if not (linalg.is_projector(p1) and linalg.is_projector(p0)):
        raise NotAProjector("operators must be orthogonal projectors")
    if float(np.max(np.abs(p1 + p0 - np.eye(pvm.dim)))) > 1e-9:
        raise NotAProjector("projectors must sum to the identity")
    if params.alpha == 1.0:
        return pvm
    return Measurement(pvm.labels, _label_switch_ops(p1, p0, params))


@lru_cache(maxsize=256)
def qls_qubit(axis: str, alpha: float) -> Measurement:
    """Quantum label switch on a qubit along the Pauli ``axis`` with labels "+" and "-"."""
    if axis not in AXIS_KETS:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return gentleize_two_outcome(basis_pvm(AXIS_KETS[axis], ["+", "-"]), alpha)


def qls_post_state_closed_form(r, alpha: float, axis: str, outcome: str) -> np.ndarray:
    """Bloch vector after a qubit label-switch measurement, without matrices.

    Along the measured axis k and transverse axes j (sign s = +1 for "+"):

        r'_k = (r_k + s c) / (1 + s c r_k),
        r'_j = (1 - a^2)/(1 + a^2) * r_j / (1 + s c r_k),

    with c = 2a/(1+a^2); this is the z-axis formula with e^(d/2) = (1+a)/(1-a)
    divided through by e^d + 1, and coordinate-permuted for x and y.
    """
    params = GentlenessParams(alpha)
    r = np.asarray(r.as_array() if hasattr(r, "as_array") else r, dtype=float).reshape(3)
    k = AXES.index(axis)
    s = {"+": 1.0, "-": -1.0}[outcome]
    c = params.contrast
    a2 = params.alpha * params.alpha
    denom = 1.0 + s * c * r[k]
    if 0.5 * denom < PROB_FLOOR:
        raise ZeroProbabilityOutcome(f"p({axis}{outcome}) = {0.5 * denom:.3g}")
    out = (1.0 - a2) / (1.0 + a2) * r / denom
    out[k] = (r[k] + s * c) / denom
    return out


# --- gentleness certification -------------------------------------------------


@dataclass(frozen=True)
class GentlenessReport:
    """Empirical lower bound on the worst-case disturbance of a measurement."""

    worst_disturbance: float
    witness_state: PureState
    witness_outcome: str
    qdp_delta_observed: float
    samples_used: int
    kind: str = "empirical lower bound on the supremum over pure states"

    @property
    def qdp_singular(self) -> bool:
        return math.isinf(self.qdp_delta_observed)

    def to_json(self) -> dict:
        amps = self.witness_state.amplitudes
        return {
            "worst_disturbance": self.worst_disturbance,
            "witness_state": {"re": [float(v) for v in amps.real], "im": [float(v) for v in amps.imag]},
            "witness_outcome": self.witness_outcome,
            "qdp_delta_observed": None if self.qdp_singular else self.qdp_delta_observed,
            "qdp_singular": self.qdp_singular,
            "samples_used": self.samples_used,
            "kind": self.kind,
        }


def pure_disturbance(op: np.ndarray, psis: np.ndarray) -> np.ndarray:
    """Trace distance between |psi> and M|psi>/|M psi| for each row of ``psis``.

    Rows where the outcome probability falls below the floor give ``nan``.
    """
    psis = np.atleast_2d(psis)
    phi = psis @ op.T
    p = np.einsum("ij,ij->i", phi.conj(), phi).real
    ov = np.einsum("ij,ij->i", psis.conj(), phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        fid = np.abs(ov) ** 2 / p
    out = np.sqrt(np.clip(1.0 - fid, 0.0, None))
    out[p < PROB_FLOOR] = np.nan
    return out


def _to_angles(psi: np.ndarray) -> np.ndarray:
    """Hyperspherical magnitudes + relative phases (2(d-1) reals)."""
    mags = np.abs(psi)
    d = psi.size
    thetas = np.empty(d - 1)
    for k in range(d - 1):
        tail = np.linalg.norm(mags[k:])
        thetas[k] = math.acos(min(mags[k] / tail, 1.0)) if tail > 0 else 0.0
    phases = np.angle(psi[1:]) - np.angle(psi[0])
    return np.concatenate([thetas, np.mod(phases, 2 * math.pi)])


def _from_angles(x: np.ndarray, d: int) -> np.ndarray:
    thetas, phases = x[: d - 1], x[d - 1 :]
    mags = np.empty(d)
    rem = 1.0
    for k in range(d - 1):
        mags[k] = rem * math.cos(thetas[k])
        rem *= math.sin(thetas[k])
    mags[d - 1] = rem
    psi = mags.astype(np.complex128)
    psi[1:] *= np.exp(1j * phases)
    return psi


def _refine(op: np.ndarray, psi: np.ndarray, steps: int, width: float) -> np.ndarray:
    d = psi.size
    x = _to_angles(psi)

    def f(v):
        val = pure_disturbance(op, _from_angles(v, d)[None, :])[0]
        return -1.0 if math.isnan(val) else -val

    best = f(x)
    for _ in range(steps):
        for i in range(x.size):
            lo, hi = x[i] - width, x[i] + width
            if i < d - 1:
                lo, hi = max(lo, 0.0), min(hi, math.pi / 2)
            trial = x.copy()

            def g(t, i=i):
                trial[i] = t
                return f(trial)

            res = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            if res.fun < best:
                best = res.fun
                x[i] = res.x
        width *= 0.5
    return _from_angles(x, d)


def worst_case_disturbance(
    m: Measurement,
    n_samples: int = 10_000,
    refine_steps: int = 8,
    rng: np.random.Generator | None = None,
) -> GentlenessReport:
    """Search pure states for the largest disturbance max_y ||psi - psi_{M->y}||.

    Haar-random samples are scored in one batch; the best one is polished by
    coordinate-wise bounded 1-d searches on the hyperspherical chart, with the
    search window halving on every pass. The result is a lower bound on the
    true supremum.
    """
    if rng is None:
        rng = np.random.default_rng()
    d = m.dim
    best_val, best_psi, best_y = -1.0, None, m.labels[0]
    if d == 1:
        best_psi = np.ones(1, dtype=np.complex128)
        best_val = 0.0
    else:
        z = rng.standard_normal((n_samples, d)) + 1j * rng.standard_normal((n_samples, d))
        psis = z / np.linalg.norm(z, axis=1, keepdims=True)
        for label, op in zip(m.labels, m.operators):
            dist = pure_disturbance(op, psis)
            if np.all(np.isnan(dist)):
                continue
            i = int(np.nanargmax(dist))
            if dist[i] > best_val:
                best_val, best_psi, best_y = float(dist[i]), psis[i], label
        if best_psi is None:
            best_psi, best_val = psis[0], 0.0
        elif refine_steps > 0:
            op = m.operator(best_y)
            cand = _refine(op, best_psi, refine_steps, width=0.25)
            val = pure_disturbance(op, cand[None, :])[0]
            if not math.isnan(val) and val > best_val:
                best_val, best_psi = float(val), cand
    return GentlenessReport(
        worst_disturbance=min(max(best_val, 0.0), 1.0),
        witness_state=PureState(best_psi),
        witness_outcome=best_y,
        qdp_delta_observed=qdp_delta_of_measurement(m),
        samples_used=n_samples if d > 1 else 0,
    )


def mixed_disturbance(m: Measurement, rho) -> float:
    """max_y ||rho - rho_{M->y}||_Tr for a (possibly mixed) state."""
    worst = 0.0
    for label, p in zip(m.labels, outcome_probabilities(m, rho)):
        if p >= PROB_FLOOR:
            worst = max(worst, trace_distance(rho, post_measurement_state(m, rho, label)))
    return worst


def qls_disturbance_at(gamma_plus: float, alpha: float) -> float:
    """sqrt(g(gamma)): disturbance of outcome "+" as a function of the weight on P1."""
    params = GentlenessParams(alpha)
    if params.alpha == 1.0:
        return math.sqrt(1.0 - gamma_plus) if gamma_plus > 0 else float("nan")
    q = params.exp_half_delta
    g = gamma_plus
    # 1 - (q g + 1 - g)^2 / (q^2 g + 1 - g), rearranged to avoid cancellation near q = 1
    val = g * (1.0 - g) * (q - 1.0) ** 2 / (q * q * g + 1.0 - g)
    return math.sqrt(max(val, 0.0))


def qls_worst_gamma(alpha: float) -> float:
    """Maximizer 1/(e^(d/2) + 1) = (1 - alpha)/2 of the disturbance profile."""
    params = GentlenessParams(alpha)
    return 1.0 / (params.exp_half_delta + 1.0)


# --- differential privacy constants ------------------------------------------


def qdp_delta_bound(alpha: float, positive_ops: bool = False) -> float:
    """Privacy level implied by alpha-gentleness.

    General operators: 2 log((1+2a)/(1-2a)) for a < 1/2.
    Positive-definite operators: 2 log((1+a)/(1-a)) for a < 1.
    """
    alpha = float(alpha)
    if positive_ops:
        if not (0.0 <= alpha < 1.0):
            raise AlphaOutOfRange(f"positive-operator bound needs 0 <= alpha < 1, got {alpha!r}")
        return 2.0 * math.log((1.0 + alpha) / (1.0 - alpha))
    if not (0.0 <= alpha < 0.5):
        raise AlphaOutOfRange(f"general bound needs 0 <= alpha < 1/2, got {alpha!r}")
    return 2.0 * math.log((1.0 + 2.0 * alpha) / (1.0 - 2.0 * alpha))


def qdp_delta_of_measurement(m: Measurement, singular_tol: float = 1e-14) -> float:
    """max_y log(lambda_max(E_y) / lambda_min(E_y)); ``inf`` if some E_y is singular."""
    worst = 0.0
    for e in m.effects:
        w = linalg.eigvalsh(e)
        if w[0] <= singular_tol * max(w[-1], 1.0):
            return math.inf
        worst = max(worst, math.log(w[-1] / w[0]))
    return worst


# --- gentle Neyman-Pearson ------------------------------------------------------


def helstrom_projector(rho0, rho1) -> np.ndarray:
    """Projector onto the non-negative eigenspace of rho0 - rho1."""
    return linalg.positive_part_projector(linalg.as_matrix(rho0) - linalg.as_matrix(rho1))


def gentle_np_measurement(rho0, rho1, alpha: float) -> Measurement:
    """Label-switched Helstrom measurement for H0: rho0 vs H1: rho1.

    Outcome "0" (decide H0) weights the projector P+ where rho0 - rho1 >= 0 by
    sqrt(keep); outcome "1" (decide H1) weights the complement. ``alpha=1`` is the
    Helstrom measurement itself.
    """
    p_plus = helstrom_projector(rho0, rho1)
    p_minus = np.eye(p_plus.shape[0]) - p_plus
    return gentleize_two_outcome(Measurement(["0", "1"], [p_plus, p_minus]), alpha)


def np_total_error(rho0, rho1, alpha: float) -> float:
    """Type-I plus type-II error of the gentle Neyman-Pearson test: 1 - c ||rho0 - rho1||."""
    params = GentlenessParams(alpha)
    t = trace_distance(rho0, rho1)
    return min(max(1.0 - params.contrast * t, 0.0), 1.0)


def np_error_probabilities(rho0, rho1, alpha: float) -> tuple[float, float]:
    """(P_0(decide H1), P_1(decide H0)) computed from the measurement itself."""
    m = gentle_np_measurement(rho0, rho1, alpha)
    p0 = outcome_probabilities(m, rho0)
    p1 = outcome_probabilities(m, rho1)
    return float(p0[m.index("1")]), float(p1[m.index("0")])


def simulate_np_error(rho0, rho1, alpha: float, trials: int, rng: np.random.Generator) -> tuple[int, int]:
    """Run ``trials`` decisions under each hypothesis; return the two error counts."""
    e1, e2 = np_error_probabilities(rho0, rho1, alpha)
    type1 = int(np.count_nonzero(rng.random(trials) < e1))
    type2 = int(np.count_nonzero(rng.random(trials) < e2))
    return type1, type2
