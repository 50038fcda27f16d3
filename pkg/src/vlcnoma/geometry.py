"""Room geometry, LED lattice placement, user drops, and the Lambertian LoS gain."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


def lambertian_order(semi_angle_half: float) -> float:
    """Lambertian emission order m = -1/log2(cos(phi_half)) for phi_half in degrees."""
    if not 0.0 < semi_angle_half < 90.0:
        raise ValueError(f"LED semi-angle must lie in (0, 90) degrees, got {semi_angle_half}")
    return -1.0 / math.log2(math.cos(math.radians(semi_angle_half)))


@dataclass(frozen=True)
class Room:
    width: float = 5.0
    depth: float = 5.0
    height: float = 3.0
    receiver_plane_height: float = 0.85

    def __post_init__(self):
        if min(self.width, self.depth, self.height) <= 0:
            raise ValueError("room dimensions must be positive")
        if not 0 <= self.receiver_plane_height < self.height:
            raise ValueError("receiver plane must sit below the ceiling")


@dataclass(frozen=True)
class Led:
    position: tuple[float, float, float]
    semi_angle_half: float = 60.0
    lambertian_order: float = field(default=None)  # derived if omitted

    def __post_init__(self):
        m = lambertian_order(self.semi_angle_half)
        if self.lambertian_order is None:
            object.__setattr__(self, "lambertian_order", m)
        elif abs(self.lambertian_order - m) > 1e-12 * max(1.0, abs(m)):
            raise ValueError("lambertian_order inconsistent with semi_angle_half")
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))


@dataclass(frozen=True)
class UserTerminal:
    position: tuple[float, float, float]
    fov_semi_angle: float = 85.0
    pd_area: float = 1e-4          # m^2
    optical_filter_gain: float = 1.0
    refractive_index: float = 1.5

    def __post_init__(self):
        if not 0.0 < self.fov_semi_angle <= 90.0:
            raise ValueError("FoV semi-angle must lie in (0, 90] degrees")
        if self.pd_area <= 0:
            raise ValueError("PD area must be positive")
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))


@dataclass(frozen=True)
class Scenario:
    room: Room
    leds: tuple[Led, ...]
    users: tuple[UserTerminal, ...]
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "leds", tuple(self.leds))
        object.__setattr__(self, "users", tuple(self.users))
        for u in self.users:
            x, y, _ = u.position
            if not (0 <= x <= self.room.width and 0 <= y <= self.room.depth):
                raise ValueError(f"user at {u.position} lies outside the room footprint")

    @property
    def n_leds(self) -> int:
        return len(self.leds)

    @property
    def n_users(self) -> int:
        return len(self.users)


def place_leds_lattice(room: Room, count: int) -> list[tuple[float, float, float]]:
    """Ceiling positions of a sqrt(count) x sqrt(count) lattice at cell centers.

    The footprint is split into equal strips per axis and each LED sits at a
    strip center, e.g. a 2x2 layout in a 5 m room uses x, y in {1.25, 3.75}.
    """
    side = math.isqrt(count)
    if side * side != count or count < 1:
        raise ValueError(f"LED count must be a perfect square, got {count}")
    xs = [(2 * i + 1) * room.width / (2 * side) for i in range(side)]
    ys = [(2 * j + 1) * room.depth / (2 * side) for j in range(side)]
    return [(x, y, room.height) for x in xs for y in ys]


def sample_users(room: Room, count: int, rng: np.random.Generator) -> list[tuple[float, float, float]]:
    """Draw `count` i.i.d. uniform positions on the receiver plane."""
    if count < 0:
        raise ValueError("user count must be non-negative")
    xs = rng.uniform(0.0, room.width, size=count)
    ys = rng.uniform(0.0, room.depth, size=count)
    z = room.receiver_plane_height
    return [(float(x), float(y), z) for x, y in zip(xs, ys)]


def channel_gain(led: Led, user: UserTerminal) -> float:
    """LoS Lambertian gain between a ceiling LED and an upward-facing PD.

    Both optical axes are vertical, so the irradiance and incidence angles
    coincide.  Returns exactly 0 past the FoV cutoff.
    """
    dx = led.position[0] - user.position[0]
    dy = led.position[1] - user.position[1]
    dz = led.position[2] - user.position[2]
    d2 = dx * dx + dy * dy + dz * dz
    if d2 == 0.0:
        raise ValueError("LED and user positions coincide")
    d = math.sqrt(d2)
    cos_psi = dz / d
    if cos_psi <= 0.0:
        return 0.0
    psi = math.degrees(math.acos(min(cos_psi, 1.0)))
    if psi > user.fov_semi_angle:
        return 0.0
    m = led.lambertian_order
    fov = math.radians(user.fov_semi_angle)
    front = (m + 1) * user.pd_area * user.refractive_index ** 2 * user.optical_filter_gain
    front /= 2.0 * math.pi * d2 * math.sin(fov) ** 2
    return front * cos_psi ** m * cos_psi


def channel_matrix(scenario: Scenario) -> np.ndarray:
    """N x L matrix of LoS gains; entry (j, i) couples user j with LED i."""
    H = np.empty((scenario.n_users, scenario.n_leds))
    for j, user in enumerate(scenario.users):
        for i, led in enumerate(scenario.leds):
            H[j, i] = channel_gain(led, user)
    H.setflags(write=False)
    return H


def distance_matrix(scenario: Scenario) -> np.ndarray:
    """N x L Euclidean distances between users and LEDs."""
    up = np.array([u.position for u in scenario.users])
    lp = np.array([l.position for l in scenario.leds])
    D = np.linalg.norm(up[:, None, :] - lp[None, :, :], axis=2)
    D.setflags(write=False)
    return D


def write_positions_csv(scenario: Scenario, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "x", "y", "z"])
        for j, user in enumerate(scenario.users):
            writer.writerow([j, repr(user.position[0]), repr(user.position[1]), repr(user.position[2])])
