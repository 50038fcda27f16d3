"""Power/noise bookkeeping and per-pair achievable rates.

The SINR expressions follow the printed capacity lower bound verbatim:
optical power and the O/E efficiency enter squared in numerator and
denominator, and the noise floor is iota^2 * sigma_k^2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

# SINR prefactor of the capacity lower bound.
E_OVER_2PI = math.e / (2.0 * math.pi)


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class PowerConfig:
    electrical_power_dbm: float = 35.0
    electrical_to_optical_ratio: float = 3.2   # iota
    oe_efficiency: float = 0.53                # kappa, A/W

    def __post_init__(self):
        if self.electrical_to_optical_ratio <= 0 or self.oe_efficiency <= 0:
            raise ValueError("conversion ratios must be positive")

    @property
    def electrical_power_watts(self) -> float:
        return dbm_to_watts(self.electrical_power_dbm)

    @property
    def optical_power_watts(self) -> float:
        # P_o = iota * sqrt(P_e)
        return self.electrical_to_optical_ratio * math.sqrt(self.electrical_power_watts)


@dataclass(frozen=True)
class NoiseConfig:
    psd: float = 1e-19          # A^2/Hz
    bandwidth: float = 20e6     # Hz
    subcarrier_count: int = 16

    def __post_init__(self):
        if self.subcarrier_count < 4 or self.subcarrier_count % 2:
            raise ValueError("subcarrier count must be even and >= 4")
        if self.psd <= 0 or self.bandwidth <= 0:
            raise ValueError("noise PSD and bandwidth must be positive")


def noise_variance(cfg: NoiseConfig) -> float:
    """Per-subcarrier AWGN power Z_o * B_L / K."""
    return cfg.psd * cfg.bandwidth / cfg.subcarrier_count


@dataclass(frozen=True)
class SubcarrierPlan:
    total_subcarriers: int
    per_subcarrier_optical_power: float

    @property
    def data_subcarriers(self) -> int:
        # DCO-OFDM: Hermitian symmetry plus the DC tone leave K/2 - 1 data slots.
        return self.total_subcarriers // 2 - 1


@dataclass(frozen=True)
class PhyContext:
    """Bundle of power/noise configs plus the scalars the rate formulas need."""

    power: PowerConfig
    noise: NoiseConfig

    @property
    def plan(self) -> SubcarrierPlan:
        k = self.noise.subcarrier_count
        return SubcarrierPlan(k, self.power.optical_power_watts / (k - 2))

    @property
    def subcarrier_power(self) -> float:
        return self.plan.per_subcarrier_optical_power

    @property
    def noise_term(self) -> float:
        # iota^2 * sigma_k^2, the denominator floor of the printed SINRs
        return self.power.electrical_to_optical_ratio ** 2 * noise_variance(self.noise)

    @property
    def rate_scale(self) -> float:
        return self.noise.bandwidth / self.noise.subcarrier_count


def _grid(X) -> np.ndarray:
    return getattr(X, "grid", X)


def squared_gain_matrix(H: np.ndarray, ctx: PhyContext) -> np.ndarray:
    """Per-link received signal power h^2 * kappa^2 * P_ok^2 (N x L)."""
    return (np.asarray(H) * ctx.power.oe_efficiency) ** 2 * ctx.subcarrier_power ** 2


def _interference(grid: np.ndarray, G: np.ndarray, user: int, home: int, k: int) -> float:
    """Inter-LED interference seen by `user` on data subcarrier k."""
    total = 0.0
    for i in range(grid.shape[0]):
        if i != home and grid[i, k] >= 0:
            total += G[user, i]
    return total


def pair_rates(pair, split, X, H: np.ndarray, ctx: PhyContext) -> tuple[float, float]:
    """Achievable rates (R_s, R_w) of a two-user pair under allocation X.

    The strong user sees inter-LED interference only; the weak user
    additionally sees the strong user's share of the pair power.
    """
    if pair.weak is None:
        raise ValueError("pair_rates requires a true two-user pair; use singleton_rate")
    grid = _grid(X)
    ks = np.flatnonzero(grid[pair.led] == pair.index)
    if ks.size == 0:
        return 0.0, 0.0
    if split.a_strong + split.a_weak > 1.0 + 1e-12:
        raise ValueError("power split exceeds the unit budget")
    G = squared_gain_matrix(H, ctx)
    cs = G[pair.strong, pair.led]
    cw = G[pair.weak, pair.led]
    noise = ctx.noise_term
    r_s = 0.0
    r_w = 0.0
    for k in ks:
        i_s = _interference(grid, G, pair.strong, pair.led, k)
        i_w = _interference(grid, G, pair.weak, pair.led, k)
        r_s += math.log2(1.0 + E_OVER_2PI * split.a_strong * cs / (i_s + noise))
        r_w += math.log2(1.0 + E_OVER_2PI * split.a_weak * cw / (i_w + split.a_strong * cs + noise))
    return ctx.rate_scale * r_s, ctx.rate_scale * r_w


def singleton_rate(pair, X, H: np.ndarray, ctx: PhyContext) -> float:
    """Rate of a lone served user: strong-user formula with the full pair power."""
    if pair.weak is not None:
        raise ValueError("singleton_rate requires a null-weak pair; use pair_rates")
    grid = _grid(X)
    ks = np.flatnonzero(grid[pair.led] == pair.index)
    if ks.size == 0:
        return 0.0
    G = squared_gain_matrix(H, ctx)
    c = G[pair.strong, pair.led]
    noise = ctx.noise_term
    total = 0.0
    for k in ks:
        i = _interference(grid, G, pair.strong, pair.led, k)
        total += math.log2(1.0 + E_OVER_2PI * c / (i + noise))
    return ctx.rate_scale * total


def write_sinr_csv(pairs, splits, X, H: np.ndarray, ctx: PhyContext, path) -> None:
    """Diagnostic per-subcarrier SINR dump for every pair member."""
    grid = _grid(X)
    G = squared_gain_matrix(H, ctx)
    noise = ctx.noise_term
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["led", "pair", "subcarrier", "user", "role", "sinr"])
        for pair, split in zip(pairs, splits):
            cs = G[pair.strong, pair.led]
            for k in np.flatnonzero(grid[pair.led] == pair.index):
                i_s = _interference(grid, G, pair.strong, pair.led, k)
                a_s = split.a_strong
                sinr_s = E_OVER_2PI * a_s * cs / (i_s + noise)
                writer.writerow([pair.led, pair.index, int(k), pair.strong, "strong", repr(sinr_s)])
                if pair.weak is not None:
                    cw = G[pair.weak, pair.led]
                    i_w = _interference(grid, G, pair.weak, pair.led, k)
                    sinr_w = E_OVER_2PI * split.a_weak * cw / (i_w + a_s * cs + noise)
                    writer.writerow([pair.led, pair.index, int(k), pair.weak, "weak", repr(sinr_w)])
