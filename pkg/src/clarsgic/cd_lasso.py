"""Grid-based complex Lasso by cyclic coordinate descent, with GIC selection.

This is the conventional baseline: Lasso solutions on a geometric grid of
penalties from ``lambda_0`` down to ``epsilon * lambda_0``, warm-started from
one grid point to the next, scored with GIC on the raw (shrunken) Lasso fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .clars_path import lambda_zero
from .exceptions import NoConvergence
from .model_select import Selection, argmin_first, penalty_sequence
from .numerics import as_cmatrix, as_cvector

DEFAULT_L = 100
DEFAULT_EPSILON = 1e-3
CD_TOL = 1e-8
MAX_SWEEPS = 1_000_000
ANDERSON_K = 5


@njit(cache=True)
def _cd_kernel(Gh, beta, grad, lam, tol, max_sweeps):
    # Gh = conj(G) row-major, so column j of G is conj(Gh[j]); grad holds X^H r
    p = beta.shape[0]
    for sweep in range(max_sweeps):
        max_change = 0.0
        max_coef = 0.0
        for j in range(p):
            z = beta[j] + grad[j]
            mag = abs(z)
            if mag <= lam:
                new = 0j
            else:
                new = z * ((mag - lam) / mag)
            d = new - beta[j]
            if d != 0:
                for i in range(p):
                    grad[i] -= Gh[j, i] * d
                beta[j] = new
                if abs(d) > max_change:
                    max_change = abs(d)
            if abs(new) > max_coef:
                max_coef = abs(new)
        if max_change <= tol * max(1.0, max_coef):
            return sweep + 1, True
    return max_sweeps, False


def _objective(G, c, yy, beta, lam):
    quad = float(np.vdot(beta, G @ beta).real) - 2.0 * float(np.vdot(c, beta).real)
    return 0.5 * (yy + quad) + lam * float(np.sum(np.abs(beta)))


def _anderson(hist):
    # offline Anderson extrapolation from K+1 stacked iterates (Bertrand & Massias, 2021)
    U = np.diff(hist, axis=0)
    U = np.concatenate([U.real, U.imag], axis=1)
    UU = U @ U.T
    ones = np.ones(UU.shape[0])
    try:
        z = np.linalg.solve(UU, ones)
    except np.linalg.LinAlgError:
        return None
    s = z.sum()
    if not np.isfinite(s) or s == 0:
        return None
    w = z / s
    return w @ hist[1:]


def _run_cd(G, Gh, c, yy, lam, beta, tol, max_sweeps, accel=ANDERSON_K):
    """Cyclic CD from ``beta`` (modified in place); returns the sweep count or raises."""
    grad = c - G @ beta
    if not accel:
        sweeps, ok = _cd_kernel(Gh, beta, grad, lam, tol, max_sweeps)
        if not ok:
            raise NoConvergence(f"no convergence in {max_sweeps} sweeps at lambda={lam:.6g}")
        return sweeps
    p = beta.size
    hist = np.empty((accel + 1, p), dtype=np.complex128)
    sweeps = 0
    while sweeps < max_sweeps:
        hist[0] = beta
        for i in range(1, accel + 1):
            _, ok = _cd_kernel(Gh, beta, grad, lam, tol, 1)
            sweeps += 1
            if ok:
                return sweeps
            if sweeps >= max_sweeps:
                break
            hist[i] = beta
        else:
            extr = _anderson(hist)
            if extr is not None and _objective(G, c, yy, extr, lam) < _objective(G, c, yy, beta, lam):
                beta[:] = extr
                grad[:] = c - G @ beta
    raise NoConvergence(f"no convergence in {max_sweeps} sweeps at lambda={lam:.6g}")


@dataclass(frozen=True)
class LambdaGrid:
    values: np.ndarray
    epsilon: float
    L: int


@dataclass
class GridSolution:
    grid: LambdaGrid
    betas: np.ndarray  # (L + 1, p)
    nnz: np.ndarray
    sigma2_u: np.ndarray  # +inf where nnz >= n
    sweeps: np.ndarray


def lambda_grid(lambda0: float, L: int = DEFAULT_L, epsilon: float = DEFAULT_EPSILON) -> LambdaGrid:
    """Geometric grid ``lambda_l = epsilon**(l/L) * lambda0`` for ``l = 0..L``."""
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    if L < 1:
        raise ValueError("L must be at least 1")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    values = lambda0 * epsilon ** (np.arange(L + 1) / L)
    values[0] = lambda0
    return LambdaGrid(values=values, epsilon=epsilon, L=L)


def lasso_objective(X, y, beta, lam) -> float:
    r = y - X @ beta
    return 0.5 * float(np.vdot(r, r).real) + lam * float(np.sum(np.abs(beta)))


class _Gram:
    """Cached ``X^H X``, ``X^H y`` and ``||y||^2`` for repeated solves on one problem."""

    def __init__(self, X, y):
        self.G = X.conj().T @ X
        self.Gh = np.ascontiguousarray(self.G.conj())
        self.c = X.conj().T @ y
        self.yy = float(np.vdot(y, y).real)


def cd_sweep(X, y, lam: float, beta) -> np.ndarray:
    """One plain cyclic pass over all coordinates; returns the updated copy."""
    X = as_cmatrix(X)
    gram = _Gram(X, as_cvector(y))
    beta = np.array(beta, dtype=np.complex128)
    grad = gram.c - gram.G @ beta
    _cd_kernel(gram.Gh, beta, grad, float(lam), 0.0, 1)
    return beta


def cd_solve(X, y, lam: float, init=None, *, tol: float = CD_TOL, max_sweeps: int = MAX_SWEEPS,
             accel: int = ANDERSON_K) -> np.ndarray:
    """Minimize ``0.5 ||y - X b||^2 + lam ||b||_1`` over complex ``b``.

    Columns of ``X`` must have unit norm so that each coordinate update is a
    single complex soft-threshold. Every ``accel`` sweeps an Anderson
    extrapolation of the last iterates is tried and kept only if it lowers
    the objective (``accel=0`` disables it). Stops when the largest
    coefficient change in a sweep is at most ``tol * max(1, max_j |b_j|)``.

    Raises
    ------
    NoConvergence
        If ``max_sweeps`` sweeps do not satisfy the stopping rule.
    """
    X = as_cmatrix(X)
    gram = _Gram(X, as_cvector(y))
    p = X.shape[1]
    if lam >= float(np.max(np.abs(gram.c))):
        # zero satisfies the optimality conditions exactly
        return np.zeros(p, dtype=np.complex128)
    beta = np.zeros(p, dtype=np.complex128) if init is None else np.array(init, dtype=np.complex128)
    _run_cd(gram.G, gram.Gh, gram.c, gram.yy, float(lam), beta, tol, max_sweeps, accel)
    return beta


def grid_path(X, y, L: int = DEFAULT_L, epsilon: float = DEFAULT_EPSILON) -> GridSolution:
    """Warm-started Lasso solutions over the whole penalty grid."""
    X = as_cmatrix(X)
    y = as_cvector(y)
    n, p = X.shape
    lam0, _ = lambda_zero(X, y)
    grid = lambda_grid(lam0, L, epsilon)
    gram = _Gram(X, y)
    betas = np.zeros((L + 1, p), dtype=np.complex128)
    sweeps = np.zeros(L + 1, dtype=np.int64)
    beta = np.zeros(p, dtype=np.complex128)
    for l in range(1, L + 1):
        sweeps[l] = _run_cd(gram.G, gram.Gh, gram.c, gram.yy, float(grid.values[l]), beta,
                            CD_TOL, MAX_SWEEPS)
        betas[l] = beta
    nnz = np.count_nonzero(betas, axis=1)
    resid = y[None, :] - betas @ X.T
    rss = np.sum(np.abs(resid) ** 2, axis=1)
    sigma2_u = np.full(L + 1, np.inf)
    ok = nnz < n
    sigma2_u[ok] = rss[ok] / (n - nnz[ok])
    return GridSolution(grid=grid, betas=betas, nnz=nnz, sigma2_u=sigma2_u, sweeps=sweeps)


def grid_scores(sol: GridSolution, n: int, c: float) -> np.ndarray:
    """GIC per grid point; ``+inf`` when ``||b||_0 >= n``, ``-inf`` on a perfect fit."""
    scores = np.empty(sol.nnz.size)
    for l, (s2, k) in enumerate(zip(sol.sigma2_u, sol.nnz)):
        if not math.isfinite(s2):
            scores[l] = math.inf
        elif s2 == 0:
            scores[l] = -math.inf
        else:
            scores[l] = n * math.log(s2) + k * c
    return scores


def select_from_grid(sol: GridSolution, n: int, gamma: int) -> Selection:
    p = sol.betas.shape[1]
    scores = grid_scores(sol, n, penalty_sequence(n, p, gamma))
    l = argmin_first(scores)
    beta = sol.betas[l].copy()
    A = tuple(int(j) for j in np.flatnonzero(beta))
    return Selection(
        k_hat=len(A),
        active_set_hat=A,
        beta_hat=beta,
        scores=scores,
        orders=sol.nnz.copy(),
        gamma=gamma,
        knot_index=l,
    )


def grid_gic_select(X, y, gamma: int, L: int = DEFAULT_L, epsilon: float = DEFAULT_EPSILON) -> Selection:
    """Conventional grid-based GIC choice of the Lasso solution (no refit)."""
    X = as_cmatrix(X)
    return select_from_grid(grid_path(X, y, L, epsilon), X.shape[0], gamma)
