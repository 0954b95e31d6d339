"""Cyclic Jacobi eigenvalue solver for small dense Hermitian matrices."""

from __future__ import annotations

import numpy as np

__all__ = ["jacobi_eigh", "jacobi_eigvalsh"]


def _off_norm(h: np.ndarray) -> float:
    off = h - np.diag(np.diag(h))
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def jacobi_eigh(
    matrix: np.ndarray,
    tol: float = 1e-12,
    max_sweeps: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalise a Hermitian matrix with complex cyclic Jacobi rotations.

    Each rotation first removes the phase of the pivot ``h[p, q]`` with a
    diagonal unitary, then zeroes it with an ordinary real Jacobi rotation.

    Args:
        matrix: square Hermitian matrix.
        tol: stop once the off-diagonal Frobenius norm drops below
            ``tol * max(1, ||matrix||_F)``.
        max_sweeps: safety cap on the number of full cyclic sweeps.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues in ascending order and
        eigenvectors as columns.

    Raises:
        ValueError: non-square input.
        RuntimeError: no convergence within ``max_sweeps``.
    """
    h = np.array(matrix, dtype=np.complex128, copy=True)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    n = h.shape[0]
    h = 0.5 * (h + h.conj().T)
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * max(1.0, float(np.linalg.norm(h)))

    for _ in range(max_sweeps):
        if _off_norm(h) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = h[p, q]
                mag = abs(hpq)
                if mag < 1e-300:
                    continue
                phase = hpq / mag
                app = h[p, p].real
                aqq = h[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) on (p, q) followed by the real rotation
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                h[:, idx] = h[:, idx] @ g
                h[idx, :] = g.conj().T @ h[idx, :]
                h[p, q] = h[q, p] = 0.0
                h[p, p] = h[p, p].real
                h[q, q] = h[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        if _off_norm(h) >= threshold:
            raise RuntimeError("Jacobi iteration did not converge")

    w = np.diag(h).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_eigvalsh(matrix: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Eigenvalues (ascending) of a Hermitian matrix via :func:`jacobi_eigh`."""
    return jacobi_eigh(matrix, tol=tol)[0]
