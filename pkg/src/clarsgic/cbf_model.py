"""Single-snapshot compressed beamforming model for a half-wavelength ULA."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import OffGridDoA


@dataclass(frozen=True)
class AngularGrid:
    """Look directions ``-90, -90 + spacing, ...`` strictly below 90 degrees."""

    spacing_deg: float = 2.0

    def __post_init__(self):
        if not self.spacing_deg > 0:
            raise ValueError("grid spacing must be positive")

    @property
    def angles_deg(self) -> np.ndarray:
        p = int(math.ceil(180.0 / self.spacing_deg - 1e-9))
        return -90.0 + self.spacing_deg * np.arange(p)

    @property
    def p(self) -> int:
        return self.angles_deg.size

    def index_of(self, theta_deg: float) -> int:
        angles = self.angles_deg
        j = int(np.argmin(np.abs(angles - theta_deg)))
        if abs(angles[j] - theta_deg) > 1e-9:
            raise OffGridDoA(f"DoA {theta_deg} deg is not on the {self.spacing_deg} deg grid")
        return j


@dataclass(frozen=True)
class Scenario:
    n_sensors: int
    doas_deg: tuple[float, ...]
    powers: tuple[float, ...]
    snr_db: float
    grid: AngularGrid = field(default_factory=AngularGrid)

    def __post_init__(self):
        object.__setattr__(self, "doas_deg", tuple(float(d) for d in self.doas_deg))
        object.__setattr__(self, "powers", tuple(float(s) for s in self.powers))
        if len(self.doas_deg) != len(self.powers):
            raise ValueError("doas_deg and powers must have equal length")
        if not self.doas_deg:
            raise ValueError("at least one source is required")
        if len(self.doas_deg) >= self.n_sensors:
            raise ValueError("number of sources must be below the number of sensors")
        if len(set(self.doas_deg)) != len(self.doas_deg):
            raise ValueError("source DoAs must be distinct")
        if any(not 0 < s <= 1 for s in self.powers):
            raise ValueError("source powers must lie in (0, 1]")
        for d in self.doas_deg:
            self.grid.index_of(d)

    @property
    def k_true(self) -> int:
        return len(self.doas_deg)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.grid.index_of(d) for d in self.doas_deg))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid_spacing_deg"] = d.pop("grid")["spacing_deg"]
        d["doas_deg"] = list(self.doas_deg)
        d["powers"] = list(self.powers)
        return d


@dataclass(frozen=True)
class Snapshot:
    y: np.ndarray
    beta_true: np.ndarray
    support_true: tuple[int, ...]
    sigma2: float


def steering_vector(theta_rad: float, n: int) -> np.ndarray:
    """ULA response ``exp(i pi m sin(theta)) / sqrt(n)`` for ``m = 0..n-1``."""
    m = np.arange(n)
    return np.exp(1j * np.pi * m * np.sin(theta_rad)) / np.sqrt(n)


def build_dictionary(grid: AngularGrid | np.ndarray, n: int) -> np.ndarray:
    """``n x p`` matrix of steering vectors, one column per grid angle."""
    angles = grid.angles_deg if isinstance(grid, AngularGrid) else np.asarray(grid, dtype=float)
    theta = np.deg2rad(angles)
    m = np.arange(n)[:, None]
    return np.exp(1j * np.pi * m * np.sin(theta)[None, :]) / np.sqrt(n)


def noise_variance_for_snr(powers, snr_db: float) -> float:
    powers = np.asarray(powers, dtype=float)
    if powers.size == 0:
        raise ValueError("powers must be nonempty")
    sigma_s2 = float(np.mean(powers**2))
    return sigma_s2 / 10.0 ** (snr_db / 10.0)


def trial_rng(master_seed: int, trial_id: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo trial."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_id),))
    return np.random.Generator(np.random.PCG64(ss))


def generate_snapshot(scenario: Scenario, rng: np.random.Generator, X: np.ndarray | None = None) -> Snapshot:
    """Draw one snapshot with random source phases and circular Gaussian noise.

    ``snr_db = inf`` yields a noiseless snapshot.
    """
    n = scenario.n_sensors
    if X is None:
        X = build_dictionary(scenario.grid, n)
    idx = [scenario.grid.index_of(d) for d in scenario.doas_deg]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=scenario.k_true)
    s = np.asarray(scenario.powers) * np.exp(1j * phases)
    sigma2 = noise_variance_for_snr(scenario.powers, scenario.snr_db)
    noise = rng.normal(scale=math.sqrt(sigma2 / 2.0), size=(2, n))
    eps = noise[0] + 1j * noise[1]
    y = X[:, idx] @ s + eps
    beta = np.zeros(X.shape[1], dtype=np.complex128)
    beta[idx] = s
    return Snapshot(y=y, beta_true=beta, support_true=tuple(sorted(idx)), sigma2=sigma2)
