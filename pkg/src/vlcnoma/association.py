"""User-to-LED binding by channel strength, plus the parity repair used by
the NOMA-imposed scheme (every LED must end up with an even user count)."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Binding:
    assignment: np.ndarray        # LED index per user, length N
    n_leds: int
    zero_gain_users: tuple[int, ...] = ()

    def __post_init__(self):
        a = np.array(self.assignment, dtype=int)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_leds)

    def users_of(self, led: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == led)


def bind_max_gain(H: np.ndarray) -> Binding:
    """Bind each user to its strongest LED; ties go to the lowest LED index.

    Users with an all-zero row (no LED can serve them) are flagged but still
    assigned, so downstream stages see a total assignment.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[1] < 1:
        raise ValueError("channel matrix must have at least one LED column")
    assignment = np.argmax(np.abs(H), axis=1)
    dead = tuple(int(j) for j in np.flatnonzero(~np.any(H != 0.0, axis=1)))
    if dead:
        log.warning("users %s have zero gain to every LED", dead)
    return Binding(assignment, H.shape[1], dead)


def parity_cost(binding: Binding, distances: np.ndarray) -> tuple[int, float]:
    """(odd-LED count, normalized distance cost) of a binding.

    The distance cost sums, over users, distance-to-current-LED divided by the
    maximum distance to any LED.
    """
    violations = int(np.sum(binding.counts % 2))
    n = binding.assignment.shape[0]
    f2 = distances[np.arange(n), binding.assignment]
    f3 = distances.max(axis=1)
    return violations, float(np.sum(f2 / f3))


def repair_parity(binding: Binding, distances: np.ndarray, rng: np.random.Generator,
                  max_iters: int = 1000) -> tuple[Binding, int]:
    """Greedy rebinding until every LED holds an even number of users.

    Each iteration moves one random user to another random LED and keeps the
    move iff (violations, distance_cost) does not worsen lexicographically.
    Returns the repaired binding and the number of iterations used.
    """
    n_leds = binding.n_leds
    if n_leds < 2:
        raise ValueError("parity repair needs at least two LEDs")
    if binding.assignment.shape[0] % 2:
        raise ValueError("odd total user count: parity is globally impossible")
    cur = np.array(binding.assignment)
    counts = np.bincount(cur, minlength=n_leds)
    violations, dist_cost = parity_cost(Binding(cur, n_leds), distances)
    n = cur.shape[0]
    f3 = distances.max(axis=1)
    iters = 0
    while violations > 0 and iters < max_iters:
        iters += 1
        src = int(rng.integers(n_leds))
        if counts[src] == 0:
            continue
        members = np.flatnonzero(cur == src)
        user = int(members[rng.integers(members.size)])
        dst = int(rng.integers(n_leds - 1))
        if dst >= src:
            dst += 1
        # the move flips the parity of both endpoint LEDs
        new_violations = violations
        new_violations += -1 if counts[src] % 2 else 1
        new_violations += -1 if counts[dst] % 2 else 1
        delta_dist = (distances[user, dst] - distances[user, src]) / f3[user]
        new_dist = dist_cost + delta_dist
        if (new_violations, new_dist) <= (violations, dist_cost):
            cur[user] = dst
            counts[src] -= 1
            counts[dst] += 1
            violations, dist_cost = new_violations, new_dist
    if violations > 0:
        log.warning("parity repair hit max_iters=%d with %d odd LEDs left", max_iters, violations)
    return Binding(cur, n_leds, binding.zero_gain_users), iters


def write_binding_csv(binding: Binding, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "led_id"])
        for j, led in enumerate(binding.assignment):
            writer.writerow([j, int(led)])
