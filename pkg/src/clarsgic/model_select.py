"""GIC scoring of nested Lasso models and the least-squares refit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clars_path import LassoPath, compute_path
from .exceptions import DegreesExhausted, InvalidDimension, PerfectFit
from .numerics import as_cmatrix, as_cvector, ls_fit

GAMMAS = (0, 1, 2)


def penalty_sequence(n: int, p: int, gamma: int) -> float:
    """Per-parameter penalty ``c_{n,gamma}``.

    ``gamma=0`` is BIC (``ln n``), ``gamma=1`` is ``ln n * ln ln p`` and
    ``gamma=2`` is ``ln p * ln ln n``.
    """
    if gamma not in GAMMAS:
        raise ValueError(f"gamma must be one of {GAMMAS}, got {gamma!r}")
    if n < 3 or p < 3:
        raise InvalidDimension(f"need n >= 3 and p >= 3, got n={n}, p={p}")
    if gamma == 0:
        return math.log(n)
    if gamma == 1:
        return math.log(n) * math.log(math.log(p))
    return math.log(p) * math.log(math.log(n))


def unbiased_noise_variance(y, X_A) -> float:
    """Residual sum of squares of the LS fit divided by ``n - k``."""
    y = as_cvector(y)
    n = y.size
    X_A = np.asarray(X_A, dtype=np.complex128).reshape(n, -1)
    k = X_A.shape[1]
    if k >= n:
        raise DegreesExhausted(f"model order {k} >= n={n}")
    _, resid = ls_fit(X_A, y)
    return float(np.vdot(resid, resid).real) / (n - k)


def gic_score(n: int, sigma2_u: float, k: int, c: float) -> float:
    if sigma2_u < 0:
        raise ValueError("variance must be nonnegative")
    if sigma2_u == 0:
        raise PerfectFit("zero residual variance")
    return n * math.log(sigma2_u) + k * c


def score_active_set(X, y, active, c) -> float:
    """GIC of the LS model on ``active``; ``-inf`` for a perfect fit, ``+inf`` if ``|active| >= n``."""
    n = y.size
    if len(active) >= n:
        return math.inf
    s2 = unbiased_noise_variance(y, X[:, list(active)])
    try:
        return gic_score(n, s2, len(active), c)
    except PerfectFit:
        return -math.inf


@dataclass
class Selection:
    """Result of model-order selection.

    ``scores[i]`` belongs to the candidate with cardinality ``orders[i]``;
    ``knot_index`` points at the winning candidate (a knot for c-LARS-GIC,
    a grid index for the grid baseline).
    """

    k_hat: int
    active_set_hat: tuple[int, ...]
    beta_hat: np.ndarray
    scores: np.ndarray
    orders: np.ndarray
    gamma: int
    knot_index: int

    @property
    def score_trace(self) -> list[tuple[int, float]]:
        return [(int(k), float(s)) for k, s in zip(self.orders, self.scores)]


def argmin_first(scores) -> int:
    """Index of the minimum score, lowest index on ties (``-inf`` wins)."""
    scores = np.asarray(scores, dtype=float)
    return int(np.argmin(scores))


def select_model(path: LassoPath, X, y, gamma: int, residual: str = "path") -> Selection:
    """Score every knot's active set and refit on the GIC minimizer.

    Parameters
    ----------
    path : LassoPath
        Path computed from the same ``(X, y)``.
    gamma : {0, 1, 2}
        Which penalty sequence to use.
    residual : {"path", "refit"}
        Residual entering the unbiased variance of knot ``k``. ``"path"``
        uses the Lasso fit at the knot, ``y - X beta(lambda_k)``; ``"refit"``
        uses the LS fit on the knot's active set. Both divide by
        ``n - |A_k|``. The returned coefficients are always the LS refit on
        the selected set.
    """
    X = as_cmatrix(X)
    y = as_cvector(y)
    n, p = X.shape
    c = penalty_sequence(n, p, gamma)
    sets = path.active_sets
    if residual == "refit":
        scores = np.array([score_active_set(X, y, A, c) for A in sets])
    elif residual == "path":
        scores = np.array([_score_residual(y - X @ kn.beta, len(kn.active_set), c) for kn in path.knots])
    else:
        raise ValueError(f"unknown residual mode {residual!r}")
    orders = np.array([len(A) for A in sets])
    i = argmin_first(scores)
    A_hat = tuple(sets[i])
    beta_hat = np.zeros(p, dtype=np.complex128)
    if A_hat:
        coeffs, _ = ls_fit(X[:, list(A_hat)], y)
        beta_hat[list(A_hat)] = coeffs
    return Selection(
        k_hat=len(A_hat),
        active_set_hat=A_hat,
        beta_hat=beta_hat,
        scores=scores,
        orders=orders,
        gamma=gamma,
        knot_index=i,
    )


def _score_residual(resid, k, c) -> float:
    n = resid.size
    if k >= n:
        return math.inf
    s2 = float(np.vdot(resid, resid).real) / (n - k)
    try:
        return gic_score(n, s2, k, c)
    except PerfectFit:
        return -math.inf


def clars_gic(X, y, gamma: int, K: int | None = None, residual: str = "path") -> Selection:
    """Full c-LARS-GIC pipeline: path, GIC selection, LS refit."""
    return select_model(compute_path(X, y, K), X, y, gamma, residual)
