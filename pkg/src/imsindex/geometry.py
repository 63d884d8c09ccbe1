"""Poisson point fields, rectangular obstacles and line-of-sight queries.

All point fields are stored in polar coordinates about the typical receiver,
which sits at the origin. A sector region is centred on azimuth 0 (the
receiver boresight), i.e. it spans ``[-theta/2, theta/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import special

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AnnulusSector:
    """Annulus sector of angle ``theta`` between radii ``r_in`` and ``r_out``."""

    theta: float
    r_in: float
    r_out: float

    def __post_init__(self):
        if not (0.0 < self.theta <= TWO_PI + 1e-12):
            raise ValueError(f"theta must lie in (0, 2pi], got {self.theta}")
        if not (0.0 <= self.r_in < self.r_out):
            raise ValueError(f"need 0 <= r_in < r_out, got {self.r_in}, {self.r_out}")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.r_out)

    @property
    def area(self) -> float:
        return 0.5 * self.theta * (self.r_out**2 - self.r_in**2)

    def contains(self, radius, azimuth) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        az = wrap_angle(np.asarray(azimuth, dtype=float))
        in_ring = (radius >= self.r_in) & (radius <= self.r_out)
        if self.theta >= TWO_PI:
            return in_ring
        return in_ring & (np.abs(az) <= 0.5 * self.theta)

    def sample_uniform(self, n: int, rng: np.random.Generator):
        """Draw ``n`` points uniformly over the region; returns (radius, azimuth)."""
        if not self.is_finite:
            raise ValueError("cannot sample an unbounded region; truncate r_out first")
        u = rng.random(n)
        radius = np.sqrt(self.r_in**2 + u * (self.r_out**2 - self.r_in**2))
        azimuth = (rng.random(n) - 0.5) * self.theta
        return radius, azimuth


def disk(radius: float) -> AnnulusSector:
    return AnnulusSector(TWO_PI, 0.0, radius)


@dataclass
class PointField:
    """One realisation of a point process, polar coordinates about the origin."""

    radius: np.ndarray
    azimuth: np.ndarray
    intensity: float
    region: AnnulusSector

    def __len__(self) -> int:
        return int(self.radius.size)

    @property
    def count(self) -> int:
        return len(self)

    def xy(self) -> np.ndarray:
        return polar_to_cartesian(self.radius, self.azimuth)

    def rotated(self, angle: float) -> "PointField":
        return PointField(self.radius.copy(), wrap_angle(self.azimuth + angle),
                          self.intensity, self.region)


def wrap_angle(angle):
    """Map angles to ``[-pi, pi)``."""
    return (np.asarray(angle) + math.pi) % TWO_PI - math.pi


def polar_to_cartesian(radius, azimuth) -> np.ndarray:
    radius = np.asarray(radius, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    return np.stack([radius * np.cos(azimuth), radius * np.sin(azimuth)], axis=-1)


def cartesian_to_polar(xy) -> tuple[np.ndarray, np.ndarray]:
    xy = np.asarray(xy, dtype=float)
    return np.hypot(xy[..., 0], xy[..., 1]), np.arctan2(xy[..., 1], xy[..., 0])


def sample_homogeneous_ppp(intensity: float, region: AnnulusSector,
                           rng: np.random.Generator) -> PointField:
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    if not region.is_finite:
        raise ValueError("region.r_out must be finite; truncate before sampling")
    n = rng.poisson(intensity * region.area) if intensity > 0 else 0
    radius, azimuth = region.sample_uniform(n, rng)
    return PointField(radius, azimuth, intensity, region)


def sample_thinned_ppp(base_intensity: float, keep_prob: Callable[[np.ndarray], np.ndarray],
                       region: AnnulusSector, rng: np.random.Generator) -> PointField:
    """Inhomogeneous PPP with intensity ``base_intensity * keep_prob(r)``.

    Realised by independent Bernoulli thinning of a homogeneous field.
    """
    field = sample_homogeneous_ppp(base_intensity, region, rng)
    p = np.broadcast_to(np.asarray(keep_prob(field.radius), dtype=float), field.radius.shape)
    if p.size and (np.any(p < 0.0) or np.any(p > 1.0) or not np.all(np.isfinite(p))):
        raise ValueError("keep_prob must return values in [0, 1]")
    keep = rng.random(field.radius.size) < p
    return PointField(field.radius[keep], field.azimuth[keep], base_intensity, region)


def exp_thinned_measure(intensity: float, theta: float, kappa: float, r_in: float, r_out: float) -> float:
    """Mean count of a PPP with intensity ``intensity*exp(-kappa r)`` over a sector."""
    if kappa == 0.0:
        return 0.5 * theta * intensity * (r_out**2 - r_in**2)
    return theta * intensity * (_tail_r_exp(kappa, r_in) - _tail_r_exp(kappa, r_out)) / kappa**2


def _tail_r_exp(kappa: float, r: float) -> float:
    # kappa^2 * int_r^inf t e^{-kappa t} dt
    if math.isinf(r):
        return 0.0
    x = kappa * r
    return (1.0 + x) * math.exp(-x)


def radial_inverse_cdf(u, r_in: float, r_out: float, kappa: float = 0.0) -> np.ndarray:
    """Radii with density proportional to ``r exp(-kappa r)`` on ``[r_in, r_out]``."""
    u = np.asarray(u, dtype=float)
    if kappa == 0.0:
        return np.sqrt(r_in**2 + u * (r_out**2 - r_in**2))
    lo = special.gammainc(2.0, kappa * r_in)
    hi = special.gammainc(2.0, kappa * r_out) if math.isfinite(r_out) else 1.0
    r = special.gammaincinv(2.0, lo + u * (hi - lo)) / kappa
    return np.clip(r, r_in, r_out)


def sample_ppp_batch(mean_count: float, n_trials: int, rng: np.random.Generator,
                     r_in: float, r_out: float, kappa: float = 0.0, theta: float = TWO_PI):
    """Sample ``n_trials`` independent radial PPP realisations at once.

    Each realisation holds Poisson(``mean_count``) points with radial density
    proportional to ``r exp(-kappa r)`` and uniform azimuth over the sector.
    Returns ``(counts, trial_index, radius, azimuth)`` with the points of
    trial ``i`` stored contiguously.
    """
    counts = rng.poisson(mean_count, size=n_trials) if mean_count > 0 else np.zeros(n_trials, dtype=np.int64)
    total = int(counts.sum())
    trial_index = np.repeat(np.arange(n_trials), counts)
    radius = radial_inverse_cdf(rng.random(total), r_in, r_out, kappa)
    azimuth = (rng.random(total) - 0.5) * theta
    return counts, trial_index, radius, azimuth


def bernoulli_los(distance: float, eps_lambda_o: float, rng: np.random.Generator) -> bool:
    """Line-of-sight draw with probability ``exp(-eps_lambda_o * distance)``."""
    if distance < 0 or eps_lambda_o < 0:
        raise ValueError("distance and eps_lambda_o must be non-negative")
    return bool(rng.random() < math.exp(-eps_lambda_o * distance))


def los_draws(distance, eps_lambda_o: float, rng: np.random.Generator) -> np.ndarray:
    distance = np.asarray(distance, dtype=float)
    return rng.random(distance.shape) < np.exp(-eps_lambda_o * distance)


# --------------------------------------------------------------------------- obstacles

OBSTACLE_WIDTH_MAX = 4.0
OBSTACLE_LENGTH_MAX = 3.0


@dataclass(frozen=True)
class Obstacle:
    center: tuple[float, float]
    width: float
    length: float
    orientation: float
    is_reflector: bool = False
    penetration_loss_db: float = math.inf
    reflection_coeff: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.width <= OBSTACLE_WIDTH_MAX and 0.0 <= self.length <= OBSTACLE_LENGTH_MAX):
            raise ValueError("obstacle width/length outside sampling ranges")
        if not (0.0 < self.reflection_coeff <= 1.0):
            raise ValueError("reflection_coeff must lie in (0, 1]")
        if self.penetration_loss_db < 0:
            raise ValueError("penetration loss must be >= 0 dB")

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.orientation), math.sin(self.orientation)
        hw, hl = 0.5 * self.width, 0.5 * self.length
        local = np.array([[hw, hl], [-hw, hl], [-hw, -hl], [hw, -hl]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.asarray(self.center)


@dataclass
class ObstacleArrays:
    """Struct-of-arrays form of an obstacle population (used by the kernels)."""

    cx: np.ndarray
    cy: np.ndarray
    half_w: np.ndarray
    half_l: np.ndarray
    orientation: np.ndarray
    is_reflector: np.ndarray

    def __len__(self) -> int:
        return int(self.cx.size)

    @classmethod
    def from_list(cls, obstacles: Sequence[Obstacle]) -> "ObstacleArrays":
        if not obstacles:
            z = np.zeros(0)
            return cls(z, z, z, z, z, np.zeros(0, dtype=bool))
        return cls(
            np.array([o.center[0] for o in obstacles], dtype=float),
            np.array([o.center[1] for o in obstacles], dtype=float),
            np.array([0.5 * o.width for o in obstacles], dtype=float),
            np.array([0.5 * o.length for o in obstacles], dtype=float),
            np.array([o.orientation for o in obstacles], dtype=float),
            np.array([o.is_reflector for o in obstacles], dtype=bool),
        )


def sample_obstacle_arrays(density: float, extent: AnnulusSector, reflector_prob: float,
                           rng: np.random.Generator) -> ObstacleArrays:
    if density < 0:
        raise ValueError("density must be non-negative")
    if not 0.0 <= reflector_prob <= 1.0:
        raise ValueError("reflector_prob must lie in [0, 1]")
    field = sample_homogeneous_ppp(density, extent, rng)
    xy = field.xy().reshape(-1, 2)
    n = len(field)
    return ObstacleArrays(
        cx=xy[:, 0].copy(),
        cy=xy[:, 1].copy(),
        half_w=0.5 * rng.uniform(0.0, OBSTACLE_WIDTH_MAX, n),
        half_l=0.5 * rng.uniform(0.0, OBSTACLE_LENGTH_MAX, n),
        orientation=rng.uniform(0.0, TWO_PI, n),
        is_reflector=rng.random(n) < reflector_prob,
    )


def sample_obstacles(density: float, extent: AnnulusSector, reflector_prob: float,
                     loss_db: float, refl_coeff: float, rng: np.random.Generator) -> list[Obstacle]:
    """Rectangles with PPP centres, U[0,4] m width, U[0,3] m length, uniform orientation."""
    arr = sample_obstacle_arrays(density, extent, reflector_prob, rng)
    return [
        Obstacle((float(arr.cx[i]), float(arr.cy[i])), float(2 * arr.half_w[i]), float(2 * arr.half_l[i]),
                 float(arr.orientation[i]), bool(arr.is_reflector[i]), loss_db, refl_coeff)
        for i in range(len(arr))
    ]


@numba.njit(cache=True)
def segment_hits_rect(x0, y0, x1, y1, cx, cy, half_w, half_l, orientation):
    """Closed segment vs oriented rectangle (slab test in the rectangle frame)."""
    c = math.cos(orientation)
    s = math.sin(orientation)
    ax = x0 - cx
    ay = y0 - cy
    bx = x1 - cx
    by = y1 - cy
    # rotate into the rectangle's local axes
    px = ax * c + ay * s
    py = -ax * s + ay * c
    qx = bx * c + by * s
    qy = -bx * s + by * c
    dx = qx - px
    dy = qy - py
    t0 = 0.0
    t1 = 1.0
    for k in range(2):
        if k == 0:
            p, d, h = px, dx, half_w
        else:
            p, d, h = py, dy, half_l
        if d == 0.0:
            if p < -h or p > h:
                return False
        else:
            ta = (-h - p) / d
            tb = (h - p) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                return False
    return True


@numba.njit(cache=True)
def _count_blockers_kernel(x0, y0, x1, y1, cx, cy, hw, hl, ori, skip):
    n = 0
    for j in range(cx.size):
        if j == skip:
            continue
        if segment_hits_rect(x0, y0, x1, y1, cx[j], cy[j], hw[j], hl[j], ori[j]):
            n += 1
    return n


def count_blockers(tx, rx, obstacles) -> int:
    """Number of obstacles whose rectangle intersects the segment ``tx``-``rx``."""
    tx = (float(tx[0]), float(tx[1]))
    rx = (float(rx[0]), float(rx[1]))
    if tx == rx:
        raise ValueError("tx and rx must differ")
    arr = obstacles if isinstance(obstacles, ObstacleArrays) else ObstacleArrays.from_list(list(obstacles))
    if len(arr) == 0:
        return 0
    return int(_count_blockers_kernel(tx[0], tx[1], rx[0], rx[1], arr.cx, arr.cy,
                                      arr.half_w, arr.half_l, arr.orientation, -1))
