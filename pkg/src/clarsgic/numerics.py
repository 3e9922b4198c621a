"""Complex dense linear-algebra helpers shared by the solvers."""

from __future__ import annotations

import numpy as np
from scipy.linalg import qr, solve_triangular

from .exceptions import RankDeficient

RANK_RTOL = 1e-10


def as_cvector(v) -> np.ndarray:
    """Return ``v`` as a 1-D complex128 array, rejecting non-finite entries."""
    out = np.asarray(v, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(out)):
        raise ValueError("vector has non-finite entries")
    return out


def as_cmatrix(X) -> np.ndarray:
    out = np.asarray(X, dtype=np.complex128)
    if out.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix has non-finite entries")
    return out


def correlations(X: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Inner products ``x_j^H r`` for every column ``x_j`` of ``X``."""
    return X.conj().T @ r


def _qr_checked(X_A: np.ndarray):
    Q, R = qr(X_A, mode="economic")
    k = X_A.shape[1]
    scale = np.max(np.linalg.norm(X_A, axis=0))
    diag = np.abs(np.diag(R))
    if np.any(diag <= RANK_RTOL * scale):
        rank = int(np.sum(diag > RANK_RTOL * scale))
        raise RankDeficient(f"numerical rank {rank} < {k} columns")
    return Q, R


def ls_fit(X_A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares coefficients of ``y`` on the columns of ``X_A``.

    Uses a Householder QR factorization, never the normal equations.

    Parameters
    ----------
    X_A : ndarray, shape (n, k)
        Full column-rank submatrix. ``k = 0`` gives the null model.
    y : ndarray, shape (n,)

    Returns
    -------
    coeffs : ndarray, shape (k,)
    residual : ndarray, shape (n,)
        ``y - X_A @ coeffs``.

    Raises
    ------
    RankDeficient
        If some ``|R_ii|`` is at most ``1e-10`` times the largest column norm.
    """
    y = np.asarray(y, dtype=np.complex128)
    n, k = X_A.shape
    if k == 0:
        return np.zeros(0, dtype=np.complex128), y.copy()
    if k > n:
        raise RankDeficient(f"{k} columns exceed {n} rows")
    Q, R = _qr_checked(X_A)
    coeffs = solve_triangular(R, Q.conj().T @ y)
    residual = y - X_A @ coeffs
    return coeffs, residual


def gram_solve(X_A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(X_A^H X_A) d = rhs`` through the R factor of ``X_A``."""
    _, R = _qr_checked(X_A)
    z = solve_triangular(R, rhs, trans="C")
    return solve_triangular(R, z)


def soft_threshold(z: complex, t: float) -> complex:
    """Complex soft-threshold ``(z/|z|) * max(|z| - t, 0)``.

    >>> soft_threshold(3j, 1.0)
    2j
    >>> soft_threshold(0.3, 0.5)
    0j
    """
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    z = complex(z)
    if t == 0:
        return z
    mag = abs(z)
    if mag <= t:
        return 0j
    return z * ((mag - t) / mag)
