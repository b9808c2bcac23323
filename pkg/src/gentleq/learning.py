"""Locally-gentle qubit tomography and state certification.

Each copy is measured once with a label-switch measurement along x, y or z.
The per-axis frequency difference shrinks the Bloch coordinate by
c = 2 alpha / (1 + alpha^2); dividing by c gives an unbiased estimate, which is
then scaled back into the Bloch ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaOutOfRange, InvalidAlpha, InvalidInput, TooFewCopies
from .gentle import GentlenessParams, qls_qubit
from .measurements import outcome_probabilities
from .states import AXES, BlochVector, bloch_array, bloch_to_density

ALLOCATIONS = ("per_axis", "split")


@dataclass(frozen=True)
class TomographyEstimate:
    raw_r: np.ndarray
    r_hat: BlochVector
    counts: dict  # axis -> (n_plus, n_minus)
    alpha: float
    n_total: int

    def density(self) -> np.ndarray:
        return bloch_to_density(self.r_hat)

    def squared_error(self, r_true) -> float:
        """||rho_hat - rho||_Tr^2 via the qubit closed form |dr|^2 / 4."""
        diff = self.r_hat.as_array() - np.asarray(r_true, dtype=float)
        return 0.25 * float(diff @ diff)

    def to_json(self) -> dict:
        return {
            "raw_r": [float(v) for v in self.raw_r],
            "r_hat": [float(v) for v in self.r_hat.as_array()],
            "counts": {k: list(v) for k, v in self.counts.items()},
            "alpha": self.alpha,
            "n_total": self.n_total,
        }


@dataclass(frozen=True)
class CertificationDecision:
    decision: str  # "H0" or "H1"
    statistic: float
    threshold: float
    estimate: TomographyEstimate


def _learning_alpha(alpha: float) -> GentlenessParams:
    params = GentlenessParams(alpha)
    if params.alpha == 0.0:
        raise InvalidAlpha("alpha = 0 is the identity measurement and carries no information")
    return params


def axis_allocation(n: int, allocation: str = "per_axis") -> dict:
    """Copies measured along each axis.

    ``per_axis``: every axis gets ``n`` copies (3n in total).
    ``split``: ``n`` copies in total, floor(n/3) per axis, remainder to z then x.
    """
    n = int(n)
    if allocation == "per_axis":
        if n < 1:
            raise TooFewCopies("need at least one copy per axis")
        return {a: n for a in AXES}
    if allocation == "split":
        if n < 3:
            raise TooFewCopies("need at least 3 copies to cover three axes")
        base, rem = divmod(n, 3)
        out = {a: base for a in AXES}
        for a in ("z", "x")[:rem]:
            out[a] += 1
        return out
    raise ValueError(f"allocation must be one of {ALLOCATIONS}")


def tomography(rho_true, n: int, alpha: float, rng: np.random.Generator, allocation: str = "per_axis") -> TomographyEstimate:
    """Simulate gentle scaled direct inversion on copies of a qubit state."""
    params = _learning_alpha(alpha)
    alloc = axis_allocation(n, allocation)
    c = params.contrast
    raw = np.empty(3)
    counts = {}
    for k, axis in enumerate(AXES):
        m = alloc[axis]
        p_plus = float(np.clip(outcome_probabilities(qls_qubit(axis, params.alpha), rho_true)[0], 0.0, 1.0))
        n_plus = int(rng.binomial(m, p_plus))
        counts[axis] = (n_plus, m - n_plus)
        raw[k] = (2 * n_plus - m) / (m * c)
    scale = max(float(np.linalg.norm(raw)), 1.0)
    r_hat = BlochVector.from_array(raw / scale)
    return TomographyEstimate(raw, r_hat, counts, params.alpha, sum(alloc.values()))


def certify(
    rho_true,
    rho0,
    epsilon: float,
    n: int,
    alpha: float,
    rng: np.random.Generator,
    allocation: str = "per_axis",
) -> CertificationDecision:
    """Decide H0 iff the tomography estimate is within epsilon/2 of rho0 in trace norm."""
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 1.0):
        raise InvalidInput(f"epsilon must lie in (0, 1], got {epsilon!r}")
    est = tomography(rho_true, n, alpha, rng, allocation)
    stat = 0.5 * float(np.linalg.norm(est.r_hat.as_array() - bloch_array(rho0)))
    threshold = epsilon / 2.0
    return CertificationDecision("H1" if stat > threshold else "H0", stat, threshold, est)


def alternatives_at_distance(r0, epsilon: float, count: int, rng: np.random.Generator, max_tries: int = 100_000) -> list:
    """Bloch vectors at trace distance exactly ``epsilon`` from ``r0`` in random directions."""
    r0 = np.asarray(r0, dtype=float)
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        u = rng.standard_normal(3)
        r1 = r0 + 2.0 * epsilon * u / np.linalg.norm(u)
        if r1 @ r1 <= 1.0:
            out.append(r1)
    if len(out) < count:
        raise InvalidInput(f"no room in the Bloch ball for alternatives at distance {epsilon}")
    return out


# --- sample complexity formulas ---------------------------------------------------


def _unit_interval(name: str, v: float) -> float:
    v = float(v)
    if not (0.0 < v <= 1.0):
        raise InvalidInput(f"{name} must lie in (0, 1], got {v!r}")
    return v


def _ceil(x: float) -> int:
    k = math.ceil(x)
    # x landing a few ulps above an integer is rounding noise, e.g. 3*4/(2/3) = 18.000000000000004
    if math.isclose(x, k - 1, rel_tol=1e-13, abs_tol=0.0):
        k -= 1
    return int(k)


def tomography_mse_bound(n: int, alpha: float) -> float:
    """3(1+a^2)^2 / (16 a^2 n): bound on E||rho_hat - rho||_Tr^2 with n copies per axis."""
    a = float(alpha)
    return 3.0 * (1.0 + a * a) ** 2 / (16.0 * a * a * n)


def certification_error_bound(n: int, epsilon: float, alpha: float) -> float:
    """3(1+a^2)^2 / (2 n eps^2 a^2): bound on type-I plus worst type-II error."""
    a = float(alpha)
    return 3.0 * (1.0 + a * a) ** 2 / (2.0 * n * epsilon * epsilon * a * a)


def required_copies_tomography(epsilon: float, alpha: float) -> int:
    eps = _unit_interval("epsilon", epsilon)
    a = _unit_interval("alpha", alpha)
    return _ceil(3.0 * (1.0 + a * a) ** 2 / (16.0 * a * a * eps * eps))


def required_copies_certification(epsilon: float, alpha: float, error_budget: float = 1.0 / 3.0) -> int:
    eps = _unit_interval("epsilon", epsilon)
    a = _unit_interval("alpha", alpha)
    b = _unit_interval("error_budget", error_budget)
    return _ceil(3.0 * (1.0 + a * a) ** 2 / (2.0 * b * eps * eps * a * a))


def _lower_alpha(alpha: float) -> float:
    a = float(alpha)
    if not (0.0 < a < 0.5):
        raise AlphaOutOfRange(f"lower bounds need 0 < alpha < 1/2, got {a!r}")
    return a


def certification_lower_bound_copies(epsilon: float, alpha: float) -> float:
    """((1-2a)^2/12)^2 / (eps^2 a^2): copies necessary for error at most 1/3."""
    a = _lower_alpha(alpha)
    eps = _unit_interval("epsilon", epsilon)
    return ((1.0 - 2.0 * a) ** 2 / 12.0) ** 2 / (eps * eps * a * a)


def tomography_minimax_lower(n: int, alpha: float) -> float:
    """min{1/8, (1-2a)^4 / (864 n a^2)}."""
    a = _lower_alpha(alpha)
    if int(n) < 1:
        raise InvalidInput("n must be >= 1")
    return min(0.125, (1.0 - 2.0 * a) ** 4 / (864.0 * int(n) * a * a))
