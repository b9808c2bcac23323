"""Classical divergences between outcome distributions, and the qDPI bounds.

All logarithms are natural.
"""
from __future__ import annotations

import numpy as np

from .errors import AlphaOutOfRange, InvalidAlpha, SupportMismatch
from .measurements import OutcomeDistribution

LOG_FLOOR = 1e-300


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, OutcomeDistribution) and isinstance(q, OutcomeDistribution):
        if p.labels != q.labels:
            raise SupportMismatch(f"label sets differ: {p.labels} vs {q.labels}")
        return p.p, q.p
    p = np.asarray(getattr(p, "p", p), dtype=float)
    q = np.asarray(getattr(q, "p", q), dtype=float)
    if p.shape != q.shape:
        raise SupportMismatch(f"shapes differ: {p.shape} vs {q.shape}")
    return p, q


def kl_divergence(p, q) -> float:
    """D(P || Q) = sum p log(p/q), with 0 log(0/q) = 0."""
    p, q = _pair(p, q)
    live = p > LOG_FLOOR
    if np.any(live & (q <= LOG_FLOOR)):
        raise SupportMismatch("P puts mass where Q has none")
    return max(float(np.sum(p[live] * np.log(p[live] / q[live]))), 0.0)


def sym_kl(p, q) -> float:
    return kl_divergence(p, q) + kl_divergence(q, p)


def total_variation(p, q) -> float:
    p, q = _pair(p, q)
    return min(0.5 * float(np.sum(np.abs(p - q))), 1.0)


def product_distribution(p: OutcomeDistribution, q: OutcomeDistribution) -> OutcomeDistribution:
    """Joint law of independent outcomes, labels joined as ``"a,b"``."""
    labels = tuple(f"{a},{b}" for a in p.labels for b in q.labels)
    return OutcomeDistribution(labels, np.outer(p.p, q.p).reshape(-1))


def qdpi_upper_bound(alpha: float, trace_dist: float, positive_ops: bool = False) -> float:
    """Upper bound on sym-KL of outcomes of an alpha-gentle measurement.

    (8a/(1-2a)^2)^2 t^2 for general operators (a < 1/2) and
    (4a/(1-a)^2)^2 t^2 for positive-definite operators (a < 1).
    """
    alpha = float(alpha)
    if positive_ops:
        if not (0.0 <= alpha < 1.0):
            raise AlphaOutOfRange(f"needs 0 <= alpha < 1, got {alpha!r}")
        c = 4.0 * alpha / (1.0 - alpha) ** 2
    else:
        if not (0.0 <= alpha < 0.5):
            raise AlphaOutOfRange(f"needs 0 <= alpha < 1/2, got {alpha!r}")
        c = 8.0 * alpha / (1.0 - 2.0 * alpha) ** 2
    return c * c * trace_dist * trace_dist


def qdpi_lower_bound(alpha: float, trace_dist: float) -> float:
    """(4a/(1+a^2))^2 t^2, attained by the gentle Neyman-Pearson measurement."""
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0):
        raise InvalidAlpha(f"alpha must lie in [0, 1], got {alpha!r}")
    c = 4.0 * alpha / (1.0 + alpha * alpha)
    return c * c * trace_dist * trace_dist
