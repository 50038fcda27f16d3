"""Intra-pair power allocation: bisection on the rate gap R_s(a) - R_w(1-a).

The gap is strictly increasing in a with a sign change inside (0, 1) whenever
both users have nonzero gain, so the equal-rate root is unique and it is the
max-min optimal split.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .phy import PhyContext, pair_rates

log = logging.getLogger(__name__)

BRACKET_EPS = 1e-9
CONVERGENCE_EPS = 1e-15  # final bracket width; near machine precision


class BisectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class PowerSplit:
    a_strong: float
    a_weak: float
    degenerate: bool = False


def bisect_split(pair, X, H: np.ndarray, ctx: PhyContext,
                 tol: float = 1e-6, max_iters: int = 200) -> PowerSplit:
    """Equal-rate power split for one pair under a fixed allocation.

    Guarantees |R_s - R_w| <= tol * max(R_s, R_w) at the returned point.
    Degenerate cases (no subcarriers, zero-gain weak user, singleton pair)
    fall back to trivial splits.
    """
    grid = getattr(X, "grid", X)
    if not np.any(grid[pair.led] == pair.index):
        return PowerSplit(0.0, 0.0, degenerate=True)
    if pair.weak is None:
        return PowerSplit(1.0, 0.0)
    if H[pair.weak, pair.led] == 0.0 or H[pair.strong, pair.led] == 0.0:
        log.warning("pair (%d,%d) on LED %d has a zero-gain member; degenerating to a_s=1",
                    pair.strong, pair.weak, pair.led)
        return PowerSplit(1.0, 0.0, degenerate=True)

    def gap(a: float) -> float:
        r_s, r_w = pair_rates(pair, PowerSplit(a, 1.0 - a), grid, H, ctx)
        return r_s - r_w

    lo, hi = BRACKET_EPS, 1.0 - BRACKET_EPS
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < CONVERGENCE_EPS:
            break
    a = 0.5 * (lo + hi)
    r_s, r_w = pair_rates(pair, PowerSplit(a, 1.0 - a), grid, H, ctx)
    if abs(r_s - r_w) > tol * max(r_s, r_w):
        raise BisectionError(
            f"no convergence within {max_iters} iterations; bracket [{lo}, {hi}], "
            f"rates ({r_s}, {r_w})")
    return PowerSplit(a, 1.0 - a)
