"""End-to-end acceptance gate.

Each test prints one `[ACCEPTANCE n] PASS/FAIL` line.  The Monte-Carlo
criteria run with a reduced (but still converged) annealing budget so the
whole gate stays well inside its wall-clock limits on one CPU; every budget
is an ordinary config knob, not a code change.
"""

import math
import time

import numpy as np
import pytest

from vlcnoma import (AllocationMatrix, Binding, ExperimentConfig, Led,
                     NoiseConfig, PenaltyParams, PhyContext, PowerConfig,
                     PowerSplit, Room, SaParams, Scenario, UserTerminal,
                     SCHEME_IMPOSED, SCHEME_NOT_IMPOSED, bind_max_gain,
                     bisect_split, channel_gain, channel_matrix, d_nlupa,
                     distance_matrix, evaluate, noise_variance, pair_rates,
                     place_leds_lattice, repair_parity, run_sweep,
                     sample_users, simulated_annealing)
from vlcnoma.pairing import Pair
from vlcnoma.power_split import BRACKET_EPS

from oracles import all_allocations

# Annealing budget shared by the Monte-Carlo criteria: 100 x 20 = 2000
# evaluations per realization (~1 s at N = 40), enough for the trends and
# agreement margins checked below.
MC_BUDGET = dict(sa_outer_iters=100, sa_m0=20, sa_beta=1.0)


def verdict(num: int, ok: bool, msg: str) -> None:
    line = f"[ACCEPTANCE {num}] {'PASS' if ok else 'FAIL'}: {msg}"
    print(line)
    assert ok, line


def tiny_instance(gains):
    H = np.asarray(gains, dtype=float).reshape(-1, 1)
    return d_nlupa(Binding([0] * len(gains), 1), H, SCHEME_NOT_IMPOSED), H


def exhaustive_best(pairs, H, ctx, penalty):
    per_led = [len(pairs.pairs_of(i)) for i in range(pairs.n_leds)]
    best = -np.inf
    for grid in all_allocations(pairs.n_leds, ctx.plan.data_subcarriers, per_led):
        best = max(best, evaluate(AllocationMatrix(grid), pairs, H, ctx,
                                  penalty).penalized_objective)
    return best


def test_01_sa_matches_exhaustive_optimum_on_small_instance():
    started = time.monotonic()
    ctx = PhyContext(PowerConfig(35.0), NoiseConfig(1e-19, 20e6, 8))
    penalty = PenaltyParams()
    sa = SaParams(outer_iters=60, m0=10, beta=1.0, alpha=0.95)
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pairs, H = tiny_instance(np.sort(rng.uniform(1e-6, 2e-5, size=4))[::-1])
        target = exhaustive_best(pairs, H, ctx, penalty)
        _, report, _ = simulated_annealing(pairs, H, ctx, sa, penalty, rng)
        hits += report.penalized_objective >= target - 1e-9 * abs(target)
    elapsed = time.monotonic() - started
    verdict(1, hits >= 95 and elapsed < 120,
            f"SA reached the exhaustive optimum in {hits}/100 seeds "
            f"(need >= 95) in {elapsed:.1f} s (limit 120 s)")


def scanned_best_min_rate(grid, H, ctx):
    """Independent 1e-6-step scan of the min rate over the strong share."""
    kappa = ctx.power.oe_efficiency
    p_ok = ctx.subcarrier_power
    noise = ctx.power.electrical_to_optical_ratio ** 2 * noise_variance(ctx.noise)
    scale = ctx.noise.bandwidth / ctx.noise.subcarrier_count
    q = math.e / (2.0 * math.pi)
    a = np.arange(1, 1_000_000) / 1e6
    r_s = np.zeros_like(a)
    r_w = np.zeros_like(a)
    for k in range(grid.shape[1]):
        if grid[0, k] != 0:
            continue
        others = [i for i in range(1, grid.shape[0]) if grid[i, k] >= 0]
        inter_s = sum((H[0, i] * kappa * p_ok) ** 2 for i in others)
        inter_w = sum((H[1, i] * kappa * p_ok) ** 2 for i in others)
        c_s = (H[0, 0] * kappa * p_ok) ** 2
        c_w = (H[1, 0] * kappa * p_ok) ** 2
        r_s += scale * np.log2(1.0 + q * a * c_s / (inter_s + noise))
        r_w += scale * np.log2(1.0 + q * (1.0 - a) * c_w / (inter_w + a * c_s + noise))
    return float(np.minimum(r_s, r_w).max())


def test_02_bisection_equalizes_and_maxmin_beats_grid_oracle(ctx16):
    started = time.monotonic()
    rng = np.random.default_rng(42)
    worst_gap, worst_slack = 0.0, np.inf
    for _ in range(50):
        n_leds = 1 + int(rng.integers(0, 3))
        n_sc = int(rng.integers(1, 4))
        grid = np.full((n_leds, 7), -1, dtype=np.int64)
        grid[:, :n_sc] = 0
        H = rng.uniform(5e-7, 2e-5, size=(2, n_leds))
        H[0, 0], H[1, 0] = max(H[0, 0], H[1, 0]), min(H[0, 0], H[1, 0])
        pair = Pair(0, 0, 0, 1)
        split = bisect_split(pair, grid, H, ctx16)
        r_s, r_w = pair_rates(pair, split, grid, H, ctx16)
        worst_gap = max(worst_gap, abs(r_s - r_w) / max(r_s, r_w))
        oracle = scanned_best_min_rate(grid, H, ctx16)
        worst_slack = min(worst_slack, min(r_s, r_w) - oracle)
    elapsed = time.monotonic() - started
    verdict(2, worst_gap <= 1e-6 and worst_slack >= -1e-9 and elapsed < 30,
            f"50 instances: worst relative rate gap {worst_gap:.2e} (<= 1e-6), "
            f"worst slack vs 1e-6-step scan {worst_slack:.2e} bit/s (>= -1e-9), "
            f"{elapsed:.1f} s (limit 30 s)")


def test_03_parity_repair_always_even_and_often_free():
    started = time.monotonic()
    room = Room(5.0, 5.0, 3.0)
    leds = tuple(Led(p) for p in place_leds_lattice(room, 4))
    all_even = True
    zero_iteration_runs = {n: 0 for n in (10, 20, 30, 40)}
    for n in (10, 20, 30, 40):
        for seed in range(100):
            rng = np.random.default_rng([6, n, seed])
            users = tuple(UserTerminal(p) for p in sample_users(room, n, rng))
            scenario = Scenario(room, leds, users)
            binding = bind_max_gain(channel_matrix(scenario))
            repaired, iters = repair_parity(binding, distance_matrix(scenario), rng)
            all_even &= not np.any(repaired.counts % 2)
            zero_iteration_runs[n] += iters == 0
    elapsed = time.monotonic() - started
    verdict(3, all_even and zero_iteration_runs[10] >= 10 and elapsed < 60,
            f"400/400 runs even after repair: {all_even}; N=10 zero-iteration "
            f"share {zero_iteration_runs[10]}/100 (need >= 10); "
            f"{elapsed:.1f} s (limit 60 s)")


@pytest.fixture(scope="module")
def optimizer_comparison_rows():
    # Both optimizers get 8000 evaluations; TS additionally needs a candidate
    # list of 16 to climb the large N = 40 neighborhood at the same pace as SA.
    rows = {}
    for optimizer in ("sa", "ts"):
        cfg = ExperimentConfig(scheme=SCHEME_NOT_IMPOSED, sweep="users",
                               values=(10, 20, 30, 40), realizations=25,
                               master_seed=11, optimizer=optimizer,
                               subcarriers=(16,), sa_outer_iters=400,
                               sa_m0=20, sa_beta=1.0,
                               ts_max_evaluations=8000,
                               ts_candidate_list_len=16)
        rows[optimizer] = run_sweep(cfg)
    return rows


def test_04_sa_and_ts_agree_within_5_percent(optimizer_comparison_rows):
    started = time.monotonic()
    worst = 0.0
    for sa_row, ts_row in zip(optimizer_comparison_rows["sa"],
                              optimizer_comparison_rows["ts"]):
        diff = abs(sa_row.mean_minrate_bps - ts_row.mean_minrate_bps)
        worst = max(worst, diff / max(sa_row.mean_minrate_bps,
                                      ts_row.mean_minrate_bps))
    elapsed = time.monotonic() - started
    verdict(4, worst <= 0.05,
            f"SA vs TS mean max-min rates differ by at most {100 * worst:.2f}% "
            f"over N in {{10,20,30,40}} (limit 5%); check took {elapsed:.1f} s")


@pytest.fixture(scope="module")
def users_sweep_rows():
    cfg = ExperimentConfig(scheme="both", sweep="users",
                           values=(10, 20, 30, 40), realizations=50,
                           master_seed=11, subcarriers=(16,), **MC_BUDGET)
    return run_sweep(cfg)


def by_scheme(rows, scheme):
    picked = [r for r in rows if r.scheme == scheme]
    return sorted(picked, key=lambda r: r.sweep_value)


def test_05_maxmin_rate_strictly_decreasing_in_user_count(users_sweep_rows):
    ok = True
    detail = []
    for scheme in (SCHEME_IMPOSED, SCHEME_NOT_IMPOSED):
        means = [r.mean_minrate_bps for r in by_scheme(users_sweep_rows, scheme)]
        ok &= all(b < a for a, b in zip(means, means[1:]))
        detail.append(f"{scheme}: " + " > ".join(f"{m / 1e6:.3f}" for m in means))
    verdict(5, ok, "mean max-min rate (Mbit/s) strictly decreasing over "
            "N = 10..40 for both schemes; " + "; ".join(detail))


def test_06_not_imposed_scheme_never_meaningfully_worse(users_sweep_rows):
    imposed = by_scheme(users_sweep_rows, SCHEME_IMPOSED)
    free = by_scheme(users_sweep_rows, SCHEME_NOT_IMPOSED)
    inversions = []
    for imp, ni in zip(imposed, free):
        if ni.mean_minrate_bps < imp.mean_minrate_bps:
            inversions.append(imp.mean_minrate_bps - ni.mean_minrate_bps
                              <= max(imp.std_bps, ni.std_bps))
    ok = len(inversions) <= 1 and all(inversions)
    verdict(6, ok,
            f"not-imposed >= imposed mean at {4 - len(inversions)}/4 points; "
            f"{len(inversions)} inversion(s), all within one std: {all(inversions)}")


def test_07_subcarrier_count_ordering_flips_with_power():
    started = time.monotonic()
    cfg = ExperimentConfig(scheme=SCHEME_NOT_IMPOSED, sweep="power",
                           values=(35.0, 55.0), realizations=50,
                           master_seed=11, n_users=20, subcarriers=(16, 32),
                           **MC_BUDGET)
    rows = run_sweep(cfg)
    means = {(r.sweep_value, r.k_total): r.mean_minrate_bps for r in rows}
    low_power_ok = means[(35.0, 16)] > means[(35.0, 32)]
    high_power_ok = means[(55.0, 32)] > means[(55.0, 16)]
    elapsed = time.monotonic() - started
    verdict(7, low_power_ok and high_power_ok,
            f"at 35 dBm K=16 beats K=32 ({means[(35.0, 16)] / 1e6:.3f} vs "
            f"{means[(35.0, 32)] / 1e6:.3f} Mbit/s): {low_power_ok}; at 55 dBm "
            f"the ordering reverses ({means[(55.0, 32)] / 1e6:.3f} vs "
            f"{means[(55.0, 16)] / 1e6:.3f}): {high_power_ok}; {elapsed:.1f} s")


def test_08_channel_and_rate_invariants(ctx16):
    started = time.monotonic()
    led = Led((2.5, 2.5, 3.0))
    inside = UserTerminal((2.5, 2.5, 0.85), fov_semi_angle=85.0)
    outside = UserTerminal((2.5 + 40.0, 2.5, 0.85), fov_semi_angle=20.0)
    fov_ok = channel_gain(led, outside) == 0.0 and channel_gain(led, inside) > 0.0

    rng = np.random.default_rng(8)
    mono_ok = True
    interference_ok = True
    penalty_ok = True
    penalty = PenaltyParams()
    for _ in range(30):
        n_leds = 1 + int(rng.integers(0, 3))
        grid = np.full((n_leds, 7), -1, dtype=np.int64)
        n_sc = int(rng.integers(1, 4))
        grid[0, :n_sc] = 0
        H = rng.uniform(5e-7, 2e-5, size=(2, n_leds))
        H[0, 0], H[1, 0] = max(H[0, 0], H[1, 0]), min(H[0, 0], H[1, 0])
        pair = Pair(0, 0, 0, 1)
        shares = np.sort(rng.uniform(BRACKET_EPS, 1 - BRACKET_EPS, size=2))
        r_lo = pair_rates(pair, PowerSplit(shares[0], 1 - shares[0]), grid, H, ctx16)
        r_hi = pair_rates(pair, PowerSplit(shares[1], 1 - shares[1]), grid, H, ctx16)
        mono_ok &= r_hi[0] >= r_lo[0] and r_hi[1] <= r_lo[1]
        if n_leds > 1:
            quiet = grid.copy()
            quiet[1:, :] = -1
            r_quiet = pair_rates(pair, PowerSplit(0.3, 0.7), quiet, H, ctx16)
            r_noisy = pair_rates(pair, PowerSplit(0.3, 0.7), grid, H, ctx16)
            interference_ok &= r_noisy[0] <= r_quiet[0] and r_noisy[1] <= r_quiet[1]

        n_users = 2 * int(rng.integers(1, 4))
        H_full = rng.uniform(0.0, 2e-5, size=(n_users, 2))
        pairs = d_nlupa(Binding(rng.integers(0, 2, size=n_users), 2), H_full,
                        SCHEME_NOT_IMPOSED)
        X = AllocationMatrix(np.stack([
            rng.integers(-1, max(len(pairs.pairs_of(i)), 1), size=7)
            for i in range(2)]))
        report = evaluate(X, pairs, H_full, ctx16, penalty)
        penalty_ok &= report.penalized_objective <= report.objective + 1e-12
        inactive = (report.coverage_violation == 0.0
                    and report.spread_violation <= 0.0)
        penalty_ok &= (report.penalized_objective == report.objective) == inactive
    elapsed = time.monotonic() - started
    verdict(8, fov_ok and mono_ok and interference_ok and penalty_ok
            and elapsed < 60,
            f"FoV hard cutoff: {fov_ok}; split monotonicity: {mono_ok}; "
            f"interference monotonicity: {interference_ok}; penalty shaping "
            f"O' <= O with equality iff inactive: {penalty_ok}; {elapsed:.1f} s")


def test_09_reruns_and_worker_counts_are_byte_identical(tmp_path):
    import dataclasses
    cfg = ExperimentConfig(scheme="both", sweep="users", values=(10,),
                           realizations=3, master_seed=11, subcarriers=(16,),
                           sa_outer_iters=20, sa_m0=10, sa_beta=1.0)
    paths = [tmp_path / name for name in ("a.csv", "b.csv", "c.csv")]
    run_sweep(cfg, out_path=paths[0])
    run_sweep(cfg, out_path=paths[1])
    run_sweep(dataclasses.replace(cfg, workers=2), out_path=paths[2])
    blobs = [p.read_bytes() for p in paths]
    verdict(9, blobs[0] == blobs[1] == blobs[2],
            "rerun with the same master seed and with 1 vs 2 workers produced "
            "byte-identical result CSVs")
