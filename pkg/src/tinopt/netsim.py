"""Monte-Carlo cellular layouts: how often is TIN provably optimal?

Base stations drop uniformly over a circular cell, each serving one
mobile placed uniformly inside its coverage disk.  Link gains follow the
Erceg suburban path-loss model (terrain-dependent log-distance slope
above a reference distance, free space below it), transmit powers are
calibrated so the median SNR at the coverage boundary hits a target, and
each realization is reduced to a strength-exponent matrix on which the
per-user optimality condition is evaluated.

Every trial derives its own RNG stream from (master_seed, trial_index),
so estimates are bit-reproducible regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .channel_model import ChannelMatrix, check_tin_condition, from_link_budget

SPEED_OF_LIGHT = 299792458.0

#: Erceg terrain categories: (a, b [1/m], c [m]) in the slope
#: gamma = a - b*h_b + c/h_b.  Category B covers hilly terrain with light
#: tree density (equivalently flat with moderate-to-heavy density).
ERCEG_TERRAIN = {
    "A": (4.6, 0.0075, 12.6),
    "B": (4.0, 0.0065, 17.1),
    "C": (3.6, 0.0050, 20.0),
}


@dataclass(frozen=True)
class SimConfig:
    K: int
    coverage_radius: float
    cell_radius: float = 1000.0
    carrier_freq_mhz: float = 2000.0
    noise_floor_dbm: float = -110.0
    boundary_snr_target_db: float = 0.0
    trials: int = 1000
    master_seed: int = 0
    #: Lognormal shadowing spread.  8 dB sits inside the published
    #: per-category range of the propagation model; None disables fading
    #: entirely (median-only links).  With fading off, the boundary-SNR
    #: calibration makes the condition verdict scale-free below the
    #: reference distance and the pass probability at (K=10, r=100m)
    #: lands near 0.62 instead of the expected ~0.5.
    shadowing_sigma_db: float | None = 8.0
    terrain: str = "B"
    bs_height_m: float = 30.0
    rx_height_m: float = 2.0
    ref_distance_m: float = 100.0
    antenna_gain_db: float = 0.0
    min_distance_m: float = 1.0

    def __post_init__(self):
        if not (0 < self.coverage_radius <= self.cell_radius):
            raise ValueError("need 0 < coverage_radius <= cell_radius")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.terrain not in ERCEG_TERRAIN:
            raise ValueError(f"unknown terrain {self.terrain!r}")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / (self.carrier_freq_mhz * 1e6)

    @property
    def pathloss_slope(self) -> float:
        a, b, c = ERCEG_TERRAIN[self.terrain]
        return a - b * self.bs_height_m + c / self.bs_height_m


def _free_space_db(distance_m, wavelength_m: float):
    return 20.0 * np.log10(4.0 * math.pi * np.asarray(distance_m) / wavelength_m)


def erceg_pathloss(distance_m, cfg: SimConfig):
    """Median path loss in dB at the given distance(s).

    Above the reference distance: free-space loss at the reference point
    plus the terrain slope times the log-distance; below it: plain free
    space (the log-slope is only specified from the reference distance
    out).  Shadowing, when enabled, is drawn during network sampling, not
    here.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    d0 = cfg.ref_distance_m
    A = 20.0 * math.log10(4.0 * math.pi * d0 / cfg.wavelength_m)
    above = A + 10.0 * cfg.pathloss_slope * np.log10(np.maximum(d, d0) / d0)
    below = _free_space_db(np.minimum(d, d0), cfg.wavelength_m)
    out = np.where(d >= d0, above, below)
    return float(out) if np.isscalar(distance_m) else out


def transmit_power_dbm(cfg: SimConfig) -> float:
    """Power making the median boundary SNR equal the configured target."""
    return (
        cfg.noise_floor_dbm
        + cfg.boundary_snr_target_db
        + erceg_pathloss(cfg.coverage_radius, cfg)
        - cfg.antenna_gain_db
    )


@dataclass(frozen=True)
class NetworkInstance:
    tx_positions: np.ndarray  # (K, 2) meters
    rx_positions: np.ndarray  # (K, 2) meters
    pathloss_db: np.ndarray  # (K, K), receiver-major
    snr_inr_linear: np.ndarray  # (K, K), clipped at 1
    nominal_P: float
    alpha: ChannelMatrix

    def to_dict(self) -> dict:
        return {
            "K": self.alpha.K,
            "tx": [[float(x), float(y)] for x, y in self.tx_positions],
            "rx": [[float(x), float(y)] for x, y in self.rx_positions],
            "pathloss_db": [[float(v) for v in row] for row in self.pathloss_db],
            "nominal_P": float(self.nominal_P),
            "alpha": [[float(v) for v in row] for row in self.alpha.alpha],
        }


def _uniform_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def sample_network(cfg: SimConfig, trial_index: int) -> NetworkInstance:
    """One random layout, deterministic in (master_seed, trial_index)."""
    rng = np.random.default_rng(
        [cfg.master_seed & 0xFFFFFFFFFFFFFFFF, int(trial_index)]
    )
    K = cfg.K
    tx = _uniform_disk(rng, K, cfg.cell_radius)
    rx = tx + _uniform_disk(rng, K, cfg.coverage_radius)
    dist = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=2)
    dist = np.maximum(dist, cfg.min_distance_m)
    pl = erceg_pathloss(dist, cfg)
    if cfg.shadowing_sigma_db:
        pl = pl + rng.normal(0.0, cfg.shadowing_sigma_db, size=pl.shape)
    ptx = transmit_power_dbm(cfg)
    gain_db = ptx + cfg.antenna_gain_db - pl - cfg.noise_floor_dbm
    linear = np.power(10.0, gain_db / 10.0)
    clipped = np.maximum(1.0, linear)
    nominal_P = max(2.0, float(clipped.max()))
    alpha = from_link_budget(np.diag(linear), linear, nominal_P)
    return NetworkInstance(
        tx_positions=tx,
        rx_positions=rx,
        pathloss_db=pl,
        snr_inr_linear=clipped,
        nominal_P=nominal_P,
        alpha=alpha,
    )


def _wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple:
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class ConditionEstimate:
    K: int
    coverage_radius: float
    trials: int
    passes: int
    prob: float
    ci_low: float
    ci_high: float


def condition_probability(cfg: SimConfig, workers: int = 1) -> ConditionEstimate:
    """Fraction of random layouts where the optimality condition holds.

    The verdict per layout does not depend on the nominal-power policy
    (the condition is homogeneous in the exponents), so the estimate is a
    pure function of (config, master_seed).
    """
    if cfg.trials < 100:
        raise ValueError("need at least 100 trials for the interval to be meaningful")

    def one(t: int) -> bool:
        inst = sample_network(cfg, t)
        return check_tin_condition(inst.alpha).overall

    if workers <= 1:
        results = [one(t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(cfg.trials)))
    passes = int(sum(results))
    lo, hi = _wilson_interval(passes, cfg.trials)
    return ConditionEstimate(
        K=cfg.K,
        coverage_radius=cfg.coverage_radius,
        trials=cfg.trials,
        passes=passes,
        prob=passes / cfg.trials,
        ci_low=lo,
        ci_high=hi,
    )


def sweep(
    base: SimConfig,
    K_values: Sequence[int],
    radius_values: Sequence[float],
    workers: int = 1,
) -> list:
    """Condition-probability grid over user counts and coverage radii."""
    rows = []
    for K in K_values:
        for radius in radius_values:
            cfg = replace(base, K=int(K), coverage_radius=float(radius))
            rows.append(condition_probability(cfg, workers=workers))
    return rows


SWEEP_CSV_HEADER = "K,coverage_radius_m,trials,prob,ci_low,ci_high"


def sweep_to_csv(rows: Sequence[ConditionEstimate]) -> str:
    """Fixed-format CSV (12 significant digits) for byte-stable outputs."""
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.K},{format(r.coverage_radius, '.12g')},{r.trials},"
            f"{format(r.prob, '.12g')},{format(r.ci_low, '.12g')},"
            f"{format(r.ci_high, '.12g')}"
        )
    return "\n".join(lines) + "\n"
