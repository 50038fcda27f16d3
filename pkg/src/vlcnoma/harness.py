"""Monte-Carlo experiment driver: realization pipeline, parameter sweeps,
seed fan-out, and CSV result tables."""

from __future__ import annotations

import csv
import dataclasses
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .allocation import (PenaltyParams, SaParams, TsParams, simulated_annealing,
                         tabu_search)
from .association import bind_max_gain, repair_parity
from .geometry import (Led, Room, Scenario, UserTerminal, channel_matrix,
                       distance_matrix, place_leds_lattice, sample_users)
from .pairing import SCHEME_IMPOSED, SCHEME_NOT_IMPOSED, d_nlupa
from .phy import NoiseConfig, PhyContext, PowerConfig

SWEEP_FIELDS = {
    "users": "n_users",
    "leds": "n_leds",
    "subcarriers": None,     # sweeps the K axis itself
    "power": "electrical_power_dbm",
    "led-angle": "led_semi_angle",
    "fov": "fov_semi_angle",
    "height": "room_height",
}

DEFAULT_SWEEP_VALUES = {
    "users": (10, 20, 30, 40),
    "leds": (4, 9),
    "subcarriers": (16, 32),
    "power": (30.0, 35.0, 40.0, 45.0, 50.0, 55.0),
    "led-angle": (60.0,),
    "fov": (85.0,),
    "height": (3.0, 5.0, 7.0, 9.0),
}

_INT_SWEEPS = {"users", "leds", "subcarriers"}

CSV_HEADER = ["sweep_var", "sweep_value", "scheme", "K", "optimizer",
              "mean_minrate_bps", "std_bps", "realizations"]


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "both"              # imposed | not-imposed | both
    sweep: str = "users"
    values: tuple = ()                # empty tuple -> Table defaults for the sweep
    realizations: int = 100
    master_seed: int = 1
    optimizer: str = "sa"             # sa | ts
    workers: int = 1
    # network defaults
    n_users: int = 20
    n_leds: int = 4
    subcarriers: tuple = (16, 32)
    electrical_power_dbm: float = 35.0
    led_semi_angle: float = 60.0
    fov_semi_angle: float = 85.0
    room_width: float = 5.0
    room_depth: float = 5.0
    room_height: float = 3.0
    receiver_plane_height: float = 0.85
    noise_psd: float = 1e-19
    bandwidth: float = 20e6
    electrical_to_optical_ratio: float = 3.2
    oe_efficiency: float = 0.53
    pd_area: float = 1e-4
    optical_filter_gain: float = 1.0
    refractive_index: float = 1.5
    # optimizer knobs
    spread_limit: float = 0.2
    penalty_p1: float = 1e5
    penalty_p2: float = 10.0
    sa_t0: float = 1.0
    sa_alpha: float = 0.995
    sa_m0: int = 50
    sa_beta: float = 1.0005
    sa_outer_iters: int = 600
    ts_tabu_list_len: int = 10
    ts_candidate_list_len: int = 4
    ts_max_evaluations: int = 30000
    repair_max_iters: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "subcarriers", tuple(self.subcarriers))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class SweepPoint(NamedTuple):
    sweep_value: float
    scheme: str
    k_total: int


@dataclass(frozen=True)
class RealizationResult:
    min_rate: float            # bit/s, max-min rate of the best allocation
    objective: float           # Mbit/s
    penalized_objective: float
    evaluations: int
    repair_iterations: int


@dataclass(frozen=True)
class ResultRow:
    sweep_var: str
    sweep_value: float
    scheme: str
    k_total: int
    optimizer: str
    mean_minrate_bps: float
    std_bps: float
    realizations: int
    min_minrate_bps: float
    max_minrate_bps: float
    mean_evaluations: float
    mean_repair_iterations: float


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.scheme not in ("imposed", "not-imposed", "both"):
        raise ValueError(f"unknown scheme {cfg.scheme!r}")
    if cfg.sweep not in SWEEP_FIELDS:
        raise ValueError(f"unknown sweep {cfg.sweep!r}; options: {sorted(SWEEP_FIELDS)}")
    if cfg.optimizer not in ("sa", "ts"):
        raise ValueError(f"unknown optimizer {cfg.optimizer!r}")
    if cfg.realizations < 1:
        raise ValueError("need at least one realization")
    if cfg.scheme in ("imposed", "both"):
        for value in sweep_values(cfg):
            n = int(value) if cfg.sweep == "users" else cfg.n_users
            if n % 2:
                raise ValueError(
                    f"odd user count {n} cannot satisfy the imposed scheme's parity")


def sweep_values(cfg: ExperimentConfig) -> tuple:
    values = cfg.values or DEFAULT_SWEEP_VALUES[cfg.sweep]
    if cfg.sweep in _INT_SWEEPS:
        return tuple(int(v) for v in values)
    return tuple(float(v) for v in values)


def sweep_points(cfg: ExperimentConfig) -> list[SweepPoint]:
    schemes = [SCHEME_IMPOSED, SCHEME_NOT_IMPOSED] if cfg.scheme == "both" else [cfg.scheme]
    points = []
    for value in sweep_values(cfg):
        for scheme in schemes:
            ks = (int(value),) if cfg.sweep == "subcarriers" else cfg.subcarriers
            for k in ks:
                points.append(SweepPoint(value, scheme, int(k)))
    return points


def realization_rng(master_seed: int, sweep: str, value, r: int) -> np.random.Generator:
    """Seed fan-out keyed on the sweep value itself, so reordering values or
    changing the scheme/K/optimizer axes never changes a realization's draw."""
    tag = zlib.crc32(f"{sweep}={value!r}".encode())
    return np.random.default_rng(np.random.SeedSequence([master_seed, tag, r]))


def _point_config(cfg: ExperimentConfig, point: SweepPoint) -> ExperimentConfig:
    field = SWEEP_FIELDS[cfg.sweep]
    if field is None:
        return cfg
    value = point.sweep_value
    if cfg.sweep in _INT_SWEEPS:
        value = int(value)
    return dataclasses.replace(cfg, **{field: value})


def build_scenario(cfg: ExperimentConfig, rng: np.random.Generator) -> Scenario:
    room = Room(cfg.room_width, cfg.room_depth, cfg.room_height, cfg.receiver_plane_height)
    leds = tuple(Led(p, cfg.led_semi_angle) for p in place_leds_lattice(room, cfg.n_leds))
    users = tuple(
        UserTerminal(p, cfg.fov_semi_angle, cfg.pd_area, cfg.optical_filter_gain,
                     cfg.refractive_index)
        for p in sample_users(room, cfg.n_users, rng))
    return Scenario(room, leds, users)


def run_realization(cfg: ExperimentConfig, scheme: str, k_total: int,
                    rng: np.random.Generator) -> RealizationResult:
    """Full pipeline for one user drop: bind, pair, optimize, report."""
    if scheme == SCHEME_IMPOSED and cfg.n_users % 2:
        raise ValueError("imposed scheme with an odd user count is infeasible")
    scenario = build_scenario(cfg, rng)
    H = channel_matrix(scenario)
    binding = bind_max_gain(H)
    repair_iters = 0
    if scheme == SCHEME_IMPOSED:
        binding, repair_iters = repair_parity(
            binding, distance_matrix(scenario), rng, cfg.repair_max_iters)
    pairs = d_nlupa(binding, H, scheme)
    ctx = PhyContext(
        PowerConfig(cfg.electrical_power_dbm, cfg.electrical_to_optical_ratio,
                    cfg.oe_efficiency),
        NoiseConfig(cfg.noise_psd, cfg.bandwidth, k_total))
    penalty = PenaltyParams(cfg.spread_limit, cfg.penalty_p1, cfg.penalty_p2)
    if cfg.optimizer == "sa":
        sa = SaParams(cfg.sa_t0, cfg.sa_alpha, cfg.sa_m0, cfg.sa_beta, cfg.sa_outer_iters)
        _, report, trace = simulated_annealing(pairs, H, ctx, sa, penalty, rng)
        evals = len(trace)
    else:
        ts = TsParams(cfg.ts_tabu_list_len, cfg.ts_candidate_list_len, cfg.ts_max_evaluations)
        _, report = tabu_search(pairs, H, ctx, ts, penalty, rng)
        evals = cfg.ts_max_evaluations
    return RealizationResult(report.min_rate, report.objective,
                             report.penalized_objective, evals, repair_iters)


def _run_task(args):
    cfg, point, point_idx, r = args
    pcfg = _point_config(cfg, point)
    rng = realization_rng(cfg.master_seed, cfg.sweep, point.sweep_value, r)
    result = run_realization(pcfg, point.scheme, point.k_total, rng)
    return point_idx, r, result


def run_sweep(cfg: ExperimentConfig, out_path=None) -> list[ResultRow]:
    """Run every (sweep value, scheme, K) cell over the configured realizations."""
    validate_config(cfg)
    points = sweep_points(cfg)
    tasks = [(cfg, point, i, r)
             for i, point in enumerate(points)
             for r in range(cfg.realizations)]
    results: dict[tuple[int, int], RealizationResult] = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for point_idx, r, result in pool.map(_run_task, tasks, chunksize=1):
                results[(point_idx, r)] = result
    else:
        for task in tasks:
            point_idx, r, result = _run_task(task)
            results[(point_idx, r)] = result
    rows = []
    for i, point in enumerate(points):
        per = [results[(i, r)] for r in range(cfg.realizations)]
        rates = np.array([p.min_rate for p in per])
        rows.append(ResultRow(
            cfg.sweep, point.sweep_value, point.scheme, point.k_total, cfg.optimizer,
            float(rates.mean()), float(rates.std()), cfg.realizations,
            float(rates.min()), float(rates.max()),
            float(np.mean([p.evaluations for p in per])),
            float(np.mean([p.repair_iterations for p in per]))))
    if out_path is not None:
        write_results_csv(rows, out_path)
    return rows


def write_results_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([row.sweep_var, row.sweep_value, row.scheme, row.k_total,
                             row.optimizer, repr(row.mean_minrate_bps),
                             repr(row.std_bps), row.realizations])


def format_summary(rows: list[ResultRow]) -> str:
    lines = [f"{'sweep':>12} {'value':>8} {'scheme':>12} {'K':>4} "
             f"{'mean Mbit/s':>12} {'std':>10} {'runs':>5}"]
    for row in rows:
        lines.append(
            f"{row.sweep_var:>12} {row.sweep_value:>8} {row.scheme:>12} {row.k_total:>4} "
            f"{row.mean_minrate_bps / 1e6:>12.4f} {row.std_bps / 1e6:>10.4f} "
            f"{row.realizations:>5}")
    return "\n".join(lines)
