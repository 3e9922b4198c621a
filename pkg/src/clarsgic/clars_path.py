"""Complex-valued LARS computation of Lasso knots and active sets.

The path starts at ``lambda_0 = max_j |<x_j, y>|`` with an empty model and
moves knot to knot. Between knots the active coefficients move along the
equiangular direction ``(X_A^H X_A)^{-1} s_A`` where ``s_A`` holds the unit
phasors of the active correlations, so every active correlation keeps its
phase and shrinks in modulus at unit rate. For real data this is exactly the
LARS-Lasso algorithm of Efron et al.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import RankDeficient, ZeroSignal
from .numerics import as_cmatrix, as_cvector, correlations, gram_solve

DROP_TOL = 1e-8
UNDERFLOW_RTOL = 1e-12


@dataclass(frozen=True)
class Knot:
    """One knot of the path.

    ``active_set`` is the set of predictors that were active on the segment
    ending at ``lam``; ``event``/``variable`` describe the change that happens
    at this knot (``"enter"`` or ``"drop"``, ``"start"`` for knot 0).
    """

    index: int
    lam: float
    active_set: tuple[int, ...]
    beta: np.ndarray
    event: str
    variable: int | None
    gamma: float = 0.0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta))


@dataclass
class LassoPath:
    knots: list[Knot]
    K_requested: int
    termination: str = "complete"
    # per-step diagnostics kept for self-consistency checks: (k, j, a_j, b_j, lam_k, gamma)
    entry_log: list[tuple] = field(default_factory=list, repr=False)

    @property
    def K_actual(self) -> int:
        return len(self.knots) - 1

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([kn.lam for kn in self.knots])

    @property
    def active_sets(self) -> list[tuple[int, ...]]:
        return [kn.active_set for kn in self.knots]

    def coef_matrix(self) -> np.ndarray:
        """Coefficients as a ``(p, K_actual + 1)`` array, one column per knot."""
        return np.column_stack([kn.beta for kn in self.knots])

    def beta_at(self, lam: float) -> np.ndarray:
        """Piecewise-linear interpolation of the coefficients between knots."""
        lams = self.lambdas
        if lam >= lams[0]:
            return np.zeros_like(self.knots[0].beta)
        if lam <= lams[-1]:
            return self.knots[-1].beta.copy()
        k = int(np.searchsorted(-lams, -lam))
        hi, lo = self.knots[k - 1], self.knots[k]
        w = (hi.lam - lam) / (hi.lam - lo.lam)
        return hi.beta + w * (lo.beta - hi.beta)


def lambda_zero(X, y) -> tuple[float, int]:
    """Smallest penalty giving the all-zero Lasso solution, and its argmax column.

    Returns
    -------
    lam0 : float
        ``max_j |x_j^H y|``.
    j1 : int
        0-based index of the first predictor to enter (lowest index on ties).
    """
    X = as_cmatrix(X)
    y = as_cvector(y)
    mags = np.abs(correlations(X, y))
    j1 = int(np.argmax(mags))
    lam0 = float(mags[j1])
    if lam0 == 0.0:
        raise ZeroSignal("all correlations vanish; y is zero or orthogonal to X")
    return lam0, j1


def _entry_roots(a, b, lam, zero_const=None):
    """Smallest root in (0, lam] of |a - g b|^2 = (lam - g)^2, per candidate.

    Returns ``inf`` where no admissible root exists.
    """
    A = np.abs(b) ** 2 - 1.0
    B = 2.0 * (lam - np.real(np.conj(a) * b))
    C = np.abs(a) ** 2 - lam**2
    if zero_const is not None:
        C[zero_const] = 0.0

    disc = B * B - 4.0 * A * C
    disc = np.where((disc < 0) & (disc > -1e-12 * B * B), 0.0, disc)
    real_ok = disc >= 0
    sq = np.sqrt(np.where(real_ok, disc, 0.0))
    sgn = np.where(B >= 0, 1.0, -1.0)
    q = -0.5 * (B + sgn * sq)

    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(A != 0, q / A, np.inf)
        r2 = np.where(q != 0, C / q, np.inf)
        # linear case: B g + C = 0
        lin = np.where(B != 0, -C / B, np.inf)
    r1 = np.where(A == 0, lin, r1)
    r2 = np.where(A == 0, np.inf, r2)

    roots = np.stack([r1, r2])
    valid = real_ok & np.isfinite(roots) & (roots > 0) & (roots <= lam)
    roots = np.where(valid, roots, np.inf)
    return roots.min(axis=0)


def compute_path(X, y, K: int | None = None) -> LassoPath:
    """Trace the complex Lasso path through its first ``K`` knots.

    Parameters
    ----------
    X : array_like, shape (n, p)
        Dictionary with unit-norm columns.
    y : array_like, shape (n,)
    K : int, optional
        Number of knots after ``lambda_0``; defaults to ``min(n - 1, p)``.

    Returns
    -------
    LassoPath
        ``K_actual < K_requested`` when the path terminates early; the reason
        is in ``termination`` (``"stalled"``, ``"underflow"`` or
        ``"rank_deficient"``).
    """
    X = as_cmatrix(X)
    y = as_cvector(y)
    n, p = X.shape
    K_max = min(n - 1, p)
    if K is None:
        K = K_max
    if K > K_max:
        raise ValueError(f"K={K} exceeds min(n-1, p)={K_max}")

    lam0, j1 = lambda_zero(X, y)
    beta = np.zeros(p, dtype=np.complex128)
    path = LassoPath(knots=[Knot(0, lam0, (), beta.copy(), "start", j1)], K_requested=K)

    lam = lam0
    active = [j1]
    just_dropped: int | None = None

    for k in range(1, K + 1):
        XA = X[:, active]
        r = y - X @ beta
        c = correlations(X, r)
        cA = c[active]
        sA = cA / np.abs(cA)
        try:
            delta = gram_solve(XA, sA)
        except RankDeficient:
            path.termination = "rank_deficient"
            break
        b = correlations(X, XA @ delta)

        inactive = np.ones(p, dtype=bool)
        inactive[active] = False
        idx = np.flatnonzero(inactive)
        zero_const = None
        if just_dropped is not None:
            zero_const = idx == just_dropped
        g_in = _entry_roots(c[idx], b[idx], lam, zero_const)

        best_entry = np.inf
        j_entry = None
        if idx.size:
            m = int(np.argmin(g_in))
            if np.isfinite(g_in[m]):
                best_entry, j_entry = float(g_in[m]), int(idx[m])

        # drop candidates: active coefficient whose trajectory passes through 0
        bA = beta[active]
        dd = np.abs(delta) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            g_drop = np.where(dd > 0, -np.real(np.conj(bA) * delta) / dd, np.inf)
        closest = np.abs(bA + g_drop * delta)
        ok = (g_drop > 0) & (g_drop <= lam) & (closest <= DROP_TOL * (1.0 + np.abs(bA)))
        g_drop = np.where(ok, g_drop, np.inf)
        best_drop = np.inf
        j_drop = None
        if g_drop.size:
            m = int(np.argmin(g_drop))
            if np.isfinite(g_drop[m]):
                best_drop, j_drop = float(g_drop[m]), int(active[m])

        if best_drop < best_entry:
            gamma, event, j = best_drop, "drop", j_drop
        elif np.isfinite(best_entry):
            gamma, event, j = best_entry, "enter", j_entry
        elif idx.size == 0:
            # every column active: the last segment runs down to the LS fit at lambda = 0
            beta[active] = beta[active] + lam * delta
            path.knots.append(Knot(k, 0.0, tuple(active), beta.copy(), "end", None, lam))
            path.termination = "complete"
            break
        else:
            path.termination = "stalled"
            break

        beta[active] = beta[active] + gamma * delta
        seg_active = tuple(active)
        new_lam = lam - gamma
        if event == "enter":
            path.entry_log.append((k, j, c[j], b[j], lam, gamma))
            active.append(j)
            just_dropped = None
        else:
            beta[j] = 0.0
            active.remove(j)
            just_dropped = j

        if new_lam < UNDERFLOW_RTOL * lam0:
            path.termination = "underflow"
            break
        path.knots.append(Knot(k, new_lam, seg_active, beta.copy(), event, j, gamma))
        lam = new_lam

    return path
