"""Strong/weak user pairing per LED: sorted halves, j-th strongest with the
j-th user of the weak half; odd leftovers become lone served users."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .association import Binding

SCHEME_IMPOSED = "imposed"
SCHEME_NOT_IMPOSED = "not-imposed"


@dataclass(frozen=True)
class Pair:
    led: int
    index: int                 # local pair index within the LED
    strong: int
    weak: Optional[int]        # None marks a lone served user


@dataclass(frozen=True)
class PairSet:
    per_led: tuple[tuple[Pair, ...], ...]
    scheme: str

    def pairs_of(self, led: int) -> tuple[Pair, ...]:
        return self.per_led[led]

    def flat(self) -> list[Pair]:
        return [p for led_pairs in self.per_led for p in led_pairs]

    @property
    def n_leds(self) -> int:
        return len(self.per_led)


def d_nlupa(binding: Binding, H: np.ndarray, scheme: str = SCHEME_IMPOSED) -> PairSet:
    """Divide-and-next-largest-difference pairing of each LED's users.

    Users are sorted by home-LED gain (descending, ties by user index); the
    sorted list splits into halves and index j pairs with index j + n/2.
    Under the not-imposed scheme an odd leftover user is served alone.
    """
    if scheme not in (SCHEME_IMPOSED, SCHEME_NOT_IMPOSED):
        raise ValueError(f"unknown scheme {scheme!r}")
    per_led = []
    for led in range(binding.n_leds):
        users = binding.users_of(led)
        order = sorted(users, key=lambda u: (-abs(H[u, led]), u))
        half = len(order) // 2
        pairs = [Pair(led, j, int(order[j]), int(order[j + half])) for j in range(half)]
        if len(order) % 2:
            if scheme == SCHEME_IMPOSED:
                raise ValueError(f"LED {led} holds an odd user count under the imposed scheme")
            pairs.append(Pair(led, half, int(order[-1]), None))
        per_led.append(tuple(pairs))
    return PairSet(tuple(per_led), scheme)


def write_pairs_csv(pairs: PairSet, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["led_id", "pair_idx", "strong_user", "weak_user"])
        for p in pairs.flat():
            writer.writerow([p.led, p.index, p.strong, -1 if p.weak is None else p.weak])
