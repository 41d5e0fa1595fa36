"""Dense complex linear algebra helpers.

Ranges are computed with column-pivoted QR, null spaces with the SVD. Both use
the threshold ``eps * ||M||`` so decisions scale with the data.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .config import TOL


class InfeasibleError(ValueError):
    """The linear constraints defining a witness have no solution."""


def as_complex_matrix(M, rows: int | None = None) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.size == 0 and rows is not None:
        M = M.reshape(rows, 0)
    return M


def orth(M: np.ndarray, eps: float = TOL.eps) -> np.ndarray:
    """Orthonormal basis of the column span of ``M`` (rank-revealing QR)."""
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    if M.size == 0:
        return np.zeros((d, 0), dtype=complex)
    Q, R, _ = sla.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((d, 0), dtype=complex)
    rank = int(np.sum(diag > eps * diag[0]))
    return Q[:, :rank]


def null_space(M: np.ndarray, eps: float = TOL.eps) -> np.ndarray:
    """Orthonormal basis of ``{z : M z = 0}``."""
    M = np.asarray(M, dtype=complex)
    ncols = M.shape[1]
    if M.shape[0] == 0 or M.size == 0:
        return np.eye(ncols, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(ncols, dtype=complex)
    rank = int(np.sum(s > eps * s[0]))
    return Vh[rank:].conj().T


def orth_complement(v: np.ndarray) -> np.ndarray:
    """Basis of ``v^perp`` from pivoted QR of the projector ``I - v v^dag / |v|^2``.

    Pivoting makes the choice deterministic and avoids picking up a zero column.
    """
    v = np.asarray(v, dtype=complex).ravel()
    d = v.size
    P = np.eye(d, dtype=complex) - np.outer(v, v.conj()) / np.vdot(v, v)
    Q, _, _ = sla.qr(P, pivoting=True)
    return Q[:, : d - 1]


def affine_min_norm(C: np.ndarray, d: np.ndarray, W: np.ndarray, tol: float):
    """Minimise ``||W z||`` subject to ``C z = d`` by null-space substitution.

    Returns the minimiser, or raises :class:`InfeasibleError` when the residual of
    the least-squares particular solution exceeds ``tol``.
    """
    C = np.asarray(C, dtype=complex)
    d = np.asarray(d, dtype=complex)
    ncols = C.shape[1]
    if C.shape[0] == 0:
        z0 = np.zeros(ncols, dtype=complex)
    else:
        z0 = np.linalg.lstsq(C, d, rcond=None)[0]
        resid = np.linalg.norm(C @ z0 - d)
        if resid > tol:
            raise InfeasibleError(f"constraint residual {resid:.3e} exceeds {tol:.1e}")
    N = null_space(C) if C.shape[0] else np.eye(ncols, dtype=complex)
    if N.shape[1] == 0:
        return z0
    WN = W @ N
    y = -np.linalg.lstsq(WN, W @ z0, rcond=None)[0]
    return z0 + N @ y


def spectral_norm(M: np.ndarray) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if np.allclose(M, M.conj().T):
        return float(np.max(np.abs(np.linalg.eigvalsh(M))))
    return float(np.linalg.norm(M, 2))
