"""Monte Carlo harness: PD, PER and MSE of c-LARS-GIC and the grid baseline."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cbf_model import AngularGrid, Scenario, build_dictionary, generate_snapshot, trial_rng
from .cd_lasso import DEFAULT_EPSILON, DEFAULT_L, grid_path, select_from_grid
from .clars_path import compute_path
from .exceptions import ClarsGicError
from .model_select import GAMMAS, select_model

log = logging.getLogger(__name__)

METHODS = ("clars", "grid")
AXES = ("n_sensors", "k_sources", "snr_db")

# source order used when sweeping the number of sources
SWEEP_DOAS_DEG = (30, -14, -22, -32, 16, -2, 56, -30, -8, 58)
SWEEP_POWERS = (0.8, 0.6, 0.4, 0.6, 0.3, 0.2, 0.9, 0.8, 0.4, 0.9)

THREE_SOURCES = Scenario(n_sensors=40, doas_deg=(-8, 6, 24), powers=(0.7, 0.9, 1.0), snr_db=15.0)
SIX_SOURCES = Scenario(n_sensors=30, doas_deg=(-8, -2, 10, 32, 40, 62),
                      powers=(0.6, 1.0, 0.9, 1.0, 0.6, 0.3), snr_db=15.0)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    method: str
    gamma: int
    k_hat: int | None
    active_set_hat: tuple[int, ...]
    beta_hat_values: tuple[complex, ...]
    sq_error: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class MethodSummary:
    method: str
    gamma: int
    pd: float
    per: float
    mse: float
    trials: int
    failures: int


@dataclass
class McReport:
    scenario: Scenario
    M: int
    master_seed: int
    methods: tuple[str, ...]
    gammas: tuple[int, ...]
    summaries: list[MethodSummary]
    records: list[TrialRecord] = field(default_factory=list)
    options: dict = field(default_factory=dict)
    axis: str | None = None
    axis_value: float | None = None

    @property
    def failures(self) -> int:
        return sum(s.failures for s in self.summaries)

    def summary(self, method: str, gamma: int) -> MethodSummary:
        for s in self.summaries:
            if s.method == method and s.gamma == gamma:
                return s
        raise KeyError((method, gamma))

    def to_dict(self, include_records: bool = True) -> dict:
        out = {
            "scenario": self.scenario.to_dict(),
            "M": self.M,
            "master_seed": self.master_seed,
            "methods": list(self.methods),
            "gammas": list(self.gammas),
            "options": dict(self.options),
            "axis": self.axis,
            "axis_value": self.axis_value,
            "failures": self.failures,
            "summaries": [dataclasses.asdict(s) for s in self.summaries],
        }
        if include_records:
            out["records"] = [
                {
                    "trial_id": r.trial_id,
                    "method": r.method,
                    "gamma": r.gamma,
                    "k_hat": r.k_hat,
                    "active_set_hat": list(r.active_set_hat),
                    "beta_hat_values": [[v.real, v.imag] for v in r.beta_hat_values],
                    "sq_error": r.sq_error,
                    "error": r.error,
                }
                for r in self.records
            ]
        return out


def metric_pd(records: Iterable[TrialRecord], k_true: int) -> float:
    """Fraction of trials whose selected order equals ``k_true``."""
    hits = [r.k_hat == k_true for r in records]
    if not hits:
        raise ValueError("no records")
    return float(np.mean(hits))


def metric_per(records: Iterable[TrialRecord], support_true: Sequence[int]) -> float:
    """Fraction of trials whose selected support equals the true support exactly."""
    truth = set(support_true)
    hits = [set(r.active_set_hat) == truth for r in records]
    if not hits:
        raise ValueError("no records")
    return float(np.mean(hits))


def metric_mse(records: Iterable[TrialRecord]) -> float:
    """Average of ``||beta_true - beta_hat||^2`` over full-length coefficient vectors."""
    errs = [r.sq_error for r in records]
    if not errs:
        raise ValueError("no records")
    return float(np.mean(errs))


def _record(trial_id, method, gamma, sel, beta_true) -> TrialRecord:
    diff = beta_true - sel.beta_hat
    A = tuple(int(j) for j in sel.active_set_hat)
    return TrialRecord(
        trial_id=trial_id,
        method=method,
        gamma=gamma,
        k_hat=sel.k_hat,
        active_set_hat=A,
        beta_hat_values=tuple(complex(v) for v in sel.beta_hat[list(A)]),
        sq_error=float(np.vdot(diff, diff).real),
    )


def _failed(trial_id, method, gamma, exc) -> TrialRecord:
    return TrialRecord(trial_id, method, gamma, None, (), (), float("nan"), f"{type(exc).__name__}: {exc}")


def run_trial(scenario: Scenario, trial_id: int, master_seed: int,
              methods: Sequence[str] = METHODS, gammas: Sequence[int] = GAMMAS,
              L: int = DEFAULT_L, epsilon: float = DEFAULT_EPSILON,
              residual: str = "path", X: np.ndarray | None = None) -> list[TrialRecord]:
    """Generate the snapshot of one trial and run every requested method on it."""
    if X is None:
        X = build_dictionary(scenario.grid, scenario.n_sensors)
    snap = generate_snapshot(scenario, trial_rng(master_seed, trial_id), X)
    out = []
    if "clars" in methods:
        try:
            path = compute_path(X, snap.y)
            for g in gammas:
                out.append(_record(trial_id, "clars", g, select_model(path, X, snap.y, g, residual), snap.beta_true))
        except ClarsGicError as exc:
            out.extend(_failed(trial_id, "clars", g, exc) for g in gammas)
    if "grid" in methods:
        try:
            sol = grid_path(X, snap.y, L, epsilon)
            for g in gammas:
                out.append(_record(trial_id, "grid", g, select_from_grid(sol, X.shape[0], g), snap.beta_true))
        except ClarsGicError as exc:
            out.extend(_failed(trial_id, "grid", g, exc) for g in gammas)
    return out


def _trial_batch(args):
    scenario, ids, master_seed, methods, gammas, L, epsilon, residual = args
    X = build_dictionary(scenario.grid, scenario.n_sensors)
    out = []
    for t in ids:
        out.extend(run_trial(scenario, t, master_seed, methods, gammas, L, epsilon, residual, X))
    return out


def run_monte_carlo(scenario: Scenario, M: int = 1000, methods: Sequence[str] = METHODS,
                    master_seed: int = 0, gammas: Sequence[int] = GAMMAS, *,
                    workers: int = 1, L: int = DEFAULT_L, epsilon: float = DEFAULT_EPSILON,
                    residual: str = "path", keep_records: bool = True) -> McReport:
    """Run ``M`` independent trials of every requested method.

    Trial ``t`` draws from its own generator derived from ``(master_seed, t)``,
    so the report does not depend on ``workers``. Failed trials are kept as
    records with ``error`` set, excluded from the metric averages and counted
    in ``failures``.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    methods = tuple(m for m in METHODS if m in methods)
    if not methods:
        raise ValueError(f"methods must be a subset of {METHODS}")
    gammas = tuple(sorted(set(int(g) for g in gammas)))
    common = (master_seed, methods, gammas, L, epsilon, residual)
    if workers <= 1:
        records = _trial_batch((scenario, range(M), *common))
    else:
        step = -(-M // (4 * workers))
        chunks = [range(i, min(i + step, M)) for i in range(0, M, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for batch in pool.map(_trial_batch, [(scenario, ch, *common) for ch in chunks]) for r in batch]
    records.sort(key=lambda r: (r.trial_id, METHODS.index(r.method), r.gamma))

    summaries = []
    for m in methods:
        for g in gammas:
            recs = [r for r in records if r.method == m and r.gamma == g]
            ok = [r for r in recs if not r.failed]
            nan = float("nan")
            summaries.append(MethodSummary(
                method=m,
                gamma=g,
                pd=metric_pd(ok, scenario.k_true) if ok else nan,
                per=metric_per(ok, scenario.support) if ok else nan,
                mse=metric_mse(ok) if ok else nan,
                trials=len(recs),
                failures=len(recs) - len(ok),
            ))
            if len(ok) < len(recs):
                log.warning("%s gamma=%d: %d failed trials", m, g, len(recs) - len(ok))
    return McReport(
        scenario=scenario,
        M=M,
        master_seed=master_seed,
        methods=methods,
        gammas=gammas,
        summaries=summaries,
        records=records if keep_records else [],
        options={"L": L, "epsilon": epsilon, "residual": residual},
    )


def scenario_for(base: Scenario, axis: str, value) -> Scenario:
    """Copy of ``base`` with one experiment axis set to ``value``."""
    if axis == "n_sensors":
        return dataclasses.replace(base, n_sensors=int(value))
    if axis == "snr_db":
        return dataclasses.replace(base, snr_db=float(value))
    if axis == "k_sources":
        k = int(value)
        if not 1 <= k <= len(SWEEP_DOAS_DEG):
            raise ValueError(f"k_sources must lie in 1..{len(SWEEP_DOAS_DEG)}")
        return dataclasses.replace(base, doas_deg=SWEEP_DOAS_DEG[:k], powers=SWEEP_POWERS[:k])
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def sweep(base: Scenario, axis: str, values: Sequence, M: int = 1000, master_seed: int = 0,
          methods: Sequence[str] = ("clars",), gammas: Sequence[int] = GAMMAS, **kwargs) -> list[McReport]:
    """One Monte Carlo report per axis value, all sharing ``master_seed``."""
    reports = []
    for v in values:
        rep = run_monte_carlo(scenario_for(base, axis, v), M, methods, master_seed, gammas, **kwargs)
        rep.axis = axis
        rep.axis_value = v
        reports.append(rep)
        log.info("%s=%s done", axis, v)
    return reports


__all__ = [
    "AngularGrid", "McReport", "MethodSummary", "TrialRecord", "SIX_SOURCES", "THREE_SOURCES",
    "metric_mse", "metric_pd", "metric_per", "run_monte_carlo", "run_trial",
    "scenario_for", "sweep",
]
