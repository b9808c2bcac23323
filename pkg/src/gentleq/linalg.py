"""Small dense complex linear algebra (d <= 16).

Matrices are plain ``numpy`` complex128 arrays. The eigensolver is a cyclic
Jacobi method so results do not depend on the installed LAPACK.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-9
MAX_SWEEPS = 100


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite square complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermitian_deviation(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def symmetrize(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return (H + H*)/2, raising ``NotHermitian`` if H is not hermitian within tol."""
    m = as_matrix(h)
    dev = hermitian_deviation(m)
    if dev > tol:
        raise NotHermitian(f"max |H - H*| = {dev:.3g} exceeds {tol:g}")
    return 0.5 * (m + m.conj().T)


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    mag = abs(apq)
    w = (apq / mag).conjugate()
    # phase-rotate column q so the pivot is real, then a real Jacobi rotation
    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    # G = [[c, s], [-s w, c w]];  A <- A G, then A <- G* A, V <- V G
    for m in (a, v):
        cp = m[:, p].copy()
        cq = m[:, q].copy()
        m[:, p] = c * cp - (s * w) * cq
        m[:, q] = s * cp + (c * w) * cq
    rp = a[p, :].copy()
    rq = a[q, :].copy()
    wc = w.conjugate()
    a[p, :] = c * rp - (s * wc) * rq
    a[q, :] = s * rp + (c * wc) * rq
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def hermitian_eig(h, tol: float = HERMITIAN_TOL) -> HermitianEigenDecomposition:
    """Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.

    Raises ``NotHermitian`` if ``max|H - H*| > tol`` and ``NoConvergence`` if
    the off-diagonal mass does not vanish within ``MAX_SWEEPS`` sweeps.
    """
    a = symmetrize(h, tol).copy()
    d = a.shape[0]
    v = np.eye(d, dtype=np.complex128)
    scale = float(np.linalg.norm(a))
    if d > 1 and scale > 0.0:
        eps = np.finfo(float).eps
        offdiag = ~np.eye(d, dtype=bool)
        for _ in range(MAX_SWEEPS):
            off = float(np.linalg.norm(a[offdiag]))
            if off <= d * eps * scale:
                break
            rotated = False
            for p in range(d - 1):
                for q in range(p + 1, d):
                    if abs(a[p, q]) > 0.1 * eps * scale:
                        _rotate(a, v, p, q)
                        rotated = True
            if not rotated:
                break
        else:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return HermitianEigenDecomposition(w[order], v[:, order])


def eigvalsh(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    return hermitian_eig(h, tol).eigenvalues


def trace_norm_distance(a, b) -> float:
    """Half the sum of absolute eigenvalues of ``A - B``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return 0.5 * float(np.sum(np.abs(eigvalsh(a - b))))


def positive_part_projector(h) -> np.ndarray:
    """Projector onto the span of eigenvectors with eigenvalue >= 0.

    Zero eigenvalues go to the positive part, so the zero matrix maps to the
    identity.
    """
    dec = hermitian_eig(h)
    keep = dec.eigenvectors[:, dec.eigenvalues >= 0.0]
    p = keep @ keep.conj().T
    return 0.5 * (p + p.conj().T)


def is_psd(h, tol: float = 0.0) -> bool:
    return bool(eigvalsh(h)[0] >= -tol)


def is_projector(p, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(p)
    return hermitian_deviation(m) <= tol and float(np.max(np.abs(m @ m - m))) <= tol


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T
