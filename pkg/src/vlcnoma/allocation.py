"""Subcarrier allocation: decision matrix, penalty-shaped max-min objective,
and the Simulated Annealing / Tabu Search optimizers.

Objective values are expressed in Mbit/s so that the default penalty weights
(1e5 and 10) and the default SA temperature (1.0) are commensurate with the
rate scale; per-user rates stay in bit/s.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .phy import E_OVER_2PI, PhyContext, squared_gain_matrix
from .pairing import PairSet
from .power_split import BRACKET_EPS, PowerSplit

UNASSIGNED = -1
LN2 = math.log(2.0)
RATE_UNIT = 1e6  # objective rate unit, bit/s per unit

_BISECT_STEPS = 32  # bracket width 2^-32 ~ 2e-10, inside the 1e-9 tolerance


@dataclass(frozen=True)
class AllocationMatrix:
    """L x K_d grid; entry (i, k) is a pair index local to LED i or UNASSIGNED."""

    grid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=np.int64))

    @classmethod
    def empty(cls, n_leds: int, data_subcarriers: int) -> "AllocationMatrix":
        return cls(np.full((n_leds, data_subcarriers), UNASSIGNED))

    def copy(self) -> "AllocationMatrix":
        return AllocationMatrix(self.grid.copy())

    def fingerprint(self) -> bytes:
        return self.grid.tobytes()


@dataclass(frozen=True)
class PenaltyParams:
    spread_limit: float = 0.2   # allowed (max-min)/max rate spread
    p1: float = 1e5             # zero-rate coverage penalty
    p2: float = 10.0            # spread penalty

    def __post_init__(self):
        if not 0.0 <= self.spread_limit <= 1.0:
            raise ValueError("spread_limit must lie in [0, 1]")
        if self.p1 <= self.p2:
            raise ValueError("coverage penalty must dominate the spread penalty")


@dataclass(frozen=True)
class SaParams:
    t0: float = 1.0
    alpha: float = 0.995
    m0: int = 50
    beta: float = 1.0005
    outer_iters: int = 600
    max_seconds: float | None = None


@dataclass(frozen=True)
class TsParams:
    tabu_list_len: int = 10
    candidate_list_len: int = 4
    max_evaluations: int = 30000


@dataclass(frozen=True)
class RateReport:
    rates: np.ndarray                # bit/s per user
    min_rate: float                  # bit/s
    max_rate: float                  # bit/s
    objective: float                 # min rate in Mbit/s
    coverage_violation: float        # fraction of zero-rate users
    spread_violation: float          # (max-min)/max - spread_limit (0 if max = 0)
    penalized_objective: float       # objective minus active penalties, Mbit/s
    splits: tuple[PowerSplit, ...]   # one per pair, flat order

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "rates", r)


class _RateModel:
    """Vectorized rate evaluation for all pairs of one allocation."""

    def __init__(self, X: AllocationMatrix, pairs: PairSet, H: np.ndarray, ctx: PhyContext):
        flat = pairs.flat()
        self.flat = flat
        self.n_users = H.shape[0]
        grid = X.grid
        G = squared_gain_matrix(H, ctx)
        occupied = grid >= 0
        # inter-LED interference: total occupied-LED power minus the home LED term
        itot = G @ occupied.astype(float)
        noise = ctx.noise_term
        P = len(flat)
        home = np.array([p.led for p in flat], dtype=int)
        strong = np.array([p.strong for p in flat], dtype=int)
        weak = np.array([-1 if p.weak is None else p.weak for p in flat], dtype=int)
        local = np.array([p.index for p in flat], dtype=int)
        if P:
            mask = grid[home, :] == local[:, None]
        else:
            mask = np.zeros((0, grid.shape[1]), dtype=bool)
        cs = G[strong, home]
        w_idx = np.maximum(weak, 0)
        cw = np.where(weak >= 0, G[w_idx, home], 0.0)
        ds = itot[strong] - cs[:, None] + noise
        dw = itot[w_idx] - G[w_idx, home][:, None] + noise
        self.home, self.strong, self.weak = home, strong, weak
        self.mask = mask
        self.cs, self.cw = cs, cw
        self.ds, self.dw = ds, dw
        self.ratio_s = np.where(mask, E_OVER_2PI * cs[:, None] / ds, 0.0)
        self.cs_col = cs[:, None]
        self.cw_masked = E_OVER_2PI * cw[:, None] * mask  # zero off the pair's subcarriers
        self.rate_scale = ctx.rate_scale / LN2
        self.has_subcarriers = mask.any(axis=1)

    def strong_rates(self, a: np.ndarray) -> np.ndarray:
        return self.rate_scale * np.log1p(a[:, None] * self.ratio_s).sum(axis=1)

    def weak_rates(self, a: np.ndarray) -> np.ndarray:
        t = a[:, None]
        # denominator stays >= the noise floor, so off-mask cells divide safely
        ratio = self.cw_masked * (1.0 - t) / (self.dw + t * self.cs_col)
        return self.rate_scale * np.log1p(ratio).sum(axis=1)

    def solve_splits(self) -> np.ndarray:
        """Strong-user power fractions: vectorized equal-rate bisection."""
        P = len(self.flat)
        a = np.where(self.has_subcarriers, 1.0, 0.0)
        active = self.has_subcarriers & (self.weak >= 0) & (self.cw > 0) & (self.cs > 0)
        if np.any(active):
            lo = np.full(P, BRACKET_EPS)
            hi = np.full(P, 1.0 - BRACKET_EPS)
            for _ in range(_BISECT_STEPS):
                mid = 0.5 * (lo + hi)
                below = self.strong_rates(mid) < self.weak_rates(mid)
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            a[active] = (0.5 * (lo + hi))[active]
        return a

    def user_rates(self, a: np.ndarray) -> np.ndarray:
        rates = np.zeros(self.n_users)
        rates[self.strong] = self.strong_rates(a)
        paired = self.weak >= 0
        rates[self.weak[paired]] = self.weak_rates(a)[paired]
        return rates


def evaluate(X: AllocationMatrix, pairs: PairSet, H: np.ndarray, ctx: PhyContext,
             penalty: PenaltyParams) -> RateReport:
    """Rates, max-min objective, and penalty-shaped objective of an allocation."""
    model = _RateModel(X, pairs, H, ctx)
    a = model.solve_splits()
    rates = model.user_rates(a)
    n = rates.shape[0]
    min_rate = float(rates.min()) if n else 0.0
    max_rate = float(rates.max()) if n else 0.0
    objective = min_rate / RATE_UNIT
    f_cons = float(np.count_nonzero(rates == 0.0)) / n if n else 0.0
    f_diff = (max_rate - min_rate) / max_rate - penalty.spread_limit if max_rate > 0 else 0.0
    penalized = objective - penalty.p1 * f_cons - penalty.p2 * max(0.0, f_diff)
    splits = []
    for i, ai in enumerate(a):
        if not model.has_subcarriers[i]:
            splits.append(PowerSplit(0.0, 0.0, degenerate=True))
        elif model.weak[i] < 0:
            splits.append(PowerSplit(1.0, 0.0))
        elif model.cw[i] == 0.0 or model.cs[i] == 0.0:
            splits.append(PowerSplit(1.0, 0.0, degenerate=True))
        else:
            splits.append(PowerSplit(float(ai), float(1.0 - ai)))
    splits = tuple(splits)
    return RateReport(rates, min_rate, max_rate, objective,
                      f_cons, f_diff, penalized, splits)


def random_solution(pairs: PairSet, data_subcarriers: int, rng: np.random.Generator) -> AllocationMatrix:
    """Each cell uniform over {UNASSIGNED} plus the LED's local pair indices."""
    rows = []
    for led in range(pairs.n_leds):
        n = len(pairs.pairs_of(led))
        rows.append(rng.integers(UNASSIGNED, n, size=data_subcarriers))
    return AllocationMatrix(np.stack(rows))


def neighbor(X: AllocationMatrix, pairs: PairSet, rng: np.random.Generator) -> AllocationMatrix:
    """Copy of X with exactly one cell moved to a different legal value."""
    rows = [led for led in range(pairs.n_leds) if pairs.pairs_of(led)]
    if not rows:
        raise ValueError("no LED has any pair to allocate")
    led = rows[int(rng.integers(len(rows)))]
    k = int(rng.integers(X.grid.shape[1]))
    n = len(pairs.pairs_of(led))
    current = int(X.grid[led, k])
    options = [v for v in range(UNASSIGNED, n) if v != current]
    value = options[int(rng.integers(len(options)))]
    out = X.copy()
    out.grid[led, k] = value
    return out


def simulated_annealing(pairs: PairSet, H: np.ndarray, ctx: PhyContext,
                        sa: SaParams, penalty: PenaltyParams,
                        rng: np.random.Generator):
    """Classic SA over allocations; returns (best X, its report, objective trace).

    The trace rows are (evaluation index, candidate objective, best objective).
    """
    x_cur = random_solution(pairs, ctx.plan.data_subcarriers, rng)
    report = evaluate(x_cur, pairs, H, ctx, penalty)
    c_cur = report.penalized_objective
    x_best, report_best, c_best = x_cur, report, c_cur
    temperature = sa.t0
    m = float(sa.m0)
    trace = []
    started = time.monotonic()
    evals = 0
    for _ in range(sa.outer_iters):
        for _ in range(int(m)):
            x_new = neighbor(x_cur, pairs, rng)
            r_new = evaluate(x_new, pairs, H, ctx, penalty)
            c_new = r_new.penalized_objective
            evals += 1
            if c_new > c_best:
                x_best, report_best, c_best = x_new, r_new, c_new
            if c_new >= c_cur or rng.random() < math.exp(min((c_new - c_cur) / temperature, 0.0)):
                x_cur, c_cur = x_new, c_new
            trace.append((evals, c_new, c_best))
        temperature *= sa.alpha
        m *= sa.beta
        if sa.max_seconds is not None and time.monotonic() - started > sa.max_seconds:
            break
    return x_best, report_best, trace


def tabu_search(pairs: PairSet, H: np.ndarray, ctx: PhyContext,
                ts: TsParams, penalty: PenaltyParams,
                rng: np.random.Generator, history: list | None = None):
    """Best-of-candidate-list search with a recency tabu on solution fingerprints.

    `history`, when given, collects (fingerprint, objective, aspirated) per step.
    """
    x_cur = random_solution(pairs, ctx.plan.data_subcarriers, rng)
    report = evaluate(x_cur, pairs, H, ctx, penalty)
    x_best, report_best, c_best = x_cur, report, report.penalized_objective
    tabu: list[bytes] = [x_cur.fingerprint()]
    evals = 1
    while evals < ts.max_evaluations:
        candidates = []
        for _ in range(ts.candidate_list_len):
            x_new = neighbor(x_cur, pairs, rng)
            r_new = evaluate(x_new, pairs, H, ctx, penalty)
            evals += 1
            candidates.append((r_new.penalized_objective, x_new, r_new))
        candidates.sort(key=lambda c: -c[0])
        chosen = None
        aspirated = False
        for c_new, x_new, r_new in candidates:
            if x_new.fingerprint() not in tabu or c_new > c_best:  # aspiration
                chosen = (c_new, x_new, r_new)
                aspirated = x_new.fingerprint() in tabu
                break
        if chosen is None:
            chosen = candidates[0]
            aspirated = True
        c_new, x_cur, r_new = chosen
        if c_new > c_best:
            x_best, report_best, c_best = x_cur, r_new, c_new
        if history is not None:
            history.append((x_cur.fingerprint(), c_new, aspirated))
        tabu.append(x_cur.fingerprint())
        if len(tabu) > ts.tabu_list_len:
            tabu.pop(0)
    return x_best, report_best


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective", "best_objective"])
        for it, obj, best in trace:
            writer.writerow([it, repr(obj), repr(best)])


def write_allocation_csv(X: AllocationMatrix, report: RateReport, pairs: PairSet, path) -> None:
    flat = pairs.flat()
    by_key = {(p.led, p.index): i for i, p in enumerate(flat)}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["led", "subcarrier", "pair", "a_strong", "a_weak"])
        for led in range(X.grid.shape[0]):
            for k in range(X.grid.shape[1]):
                v = int(X.grid[led, k])
                if v == UNASSIGNED:
                    writer.writerow([led, k, UNASSIGNED, "", ""])
                else:
                    split = report.splits[by_key[(led, v)]]
                    writer.writerow([led, k, v, repr(split.a_strong), repr(split.a_weak)])
