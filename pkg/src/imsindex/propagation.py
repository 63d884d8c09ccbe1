"""Channel gains: modified power law, small-scale fading, the 28 GHz multipath
law and the ideal sector antenna.

Gains are linear everywhere except in :func:`mmwave_path_gain_db`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

TWO_PI = 2.0 * math.pi


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watts(dbm):
    return db_to_linear(dbm) * 1e-3


# ----------------------------------------------------------------------------- fading

@dataclass(frozen=True)
class Rayleigh:
    """Rayleigh amplitude fading; the power gain is Exp(1)."""

    def sample(self, rng: np.random.Generator, size=None):
        return rng.standard_exponential(size)

    @property
    def mean(self) -> float:
        return 1.0

    @property
    def second_moment(self) -> float:
        return 2.0

    def moment(self, q: float) -> float:
        return math.gamma(1.0 + q)


@dataclass(frozen=True)
class Nakagami:
    """Nakagami-m fading; the power gain is Gamma(m, 1/m) with unit mean."""

    m: float

    def __post_init__(self):
        if self.m < 0.5:
            raise ValueError("Nakagami shape m must be >= 0.5")

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.m, 1.0 / self.m, size)

    @property
    def mean(self) -> float:
        return 1.0

    @property
    def second_moment(self) -> float:
        return 1.0 + 1.0 / self.m

    def moment(self, q: float) -> float:
        return math.exp(math.lgamma(self.m + q) - math.lgamma(self.m) - q * math.log(self.m))


@dataclass(frozen=True)
class Deterministic:
    c0: float = 1.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.c0
        return np.full(size, self.c0, dtype=float)

    @property
    def mean(self) -> float:
        return self.c0

    @property
    def second_moment(self) -> float:
        return self.c0**2

    def moment(self, q: float) -> float:
        return self.c0**q


@dataclass(frozen=True)
class LogNormalShadow:
    """Log-normal power gain ``10^(-X/10)``, X ~ N(0, sigma_db^2)."""

    sigma_db: float

    def sample(self, rng: np.random.Generator, size=None):
        if self.sigma_db == 0:
            return 1.0 if size is None else np.ones(size)
        return 10.0 ** (-rng.normal(0.0, self.sigma_db, size) / 10.0)

    def moment(self, q: float) -> float:
        s = self.sigma_db * math.log(10.0) / 10.0
        return math.exp(0.5 * (q * s) ** 2)

    @property
    def mean(self) -> float:
        return self.moment(1.0)

    @property
    def second_moment(self) -> float:
        return self.moment(2.0)


FadingKind = Union[Rayleigh, Nakagami, Deterministic, LogNormalShadow]


def sample_fading(kind: FadingKind, rng: np.random.Generator, size=None):
    return kind.sample(rng, size)


def parse_fading(text: str) -> FadingKind:
    """``rayleigh``, ``nakagami:3``, ``deterministic:0.9``, ``lognormal:5.8``."""
    name, _, arg = text.strip().lower().partition(":")
    if name == "rayleigh":
        return Rayleigh()
    if name == "nakagami":
        return Nakagami(float(arg))
    if name in ("deterministic", "det"):
        return Deterministic(float(arg) if arg else 1.0)
    if name == "lognormal":
        return LogNormalShadow(float(arg))
    raise ValueError(f"unknown fading kind {text!r}")


def format_fading(kind: FadingKind) -> str:
    if isinstance(kind, Rayleigh):
        return "rayleigh"
    if isinstance(kind, Nakagami):
        return f"nakagami:{kind.m:g}"
    if isinstance(kind, Deterministic):
        return f"deterministic:{kind.c0:.17g}"
    return f"lognormal:{kind.sigma_db:g}"


# ---------------------------------------------------------------------- path loss

@dataclass(frozen=True)
class PathLossLaw:
    """``c`` inside the disk of radius ``a``, ``c * d^-alpha`` outside."""

    c: float
    alpha: float
    a: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.a <= 0 or self.c <= 0:
            raise ValueError("c, alpha and a must be positive")

    @classmethod
    def from_db(cls, c_db: float, alpha: float, a: float = 1.0) -> "PathLossLaw":
        return cls(float(db_to_linear(c_db)), alpha, a)


def path_gain(law: PathLossLaw, distance):
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    with np.errstate(divide="ignore"):
        g = np.where(d < law.a, law.c, law.c * np.maximum(d, law.a) ** (-law.alpha))
    return float(g) if g.ndim == 0 else g


def distance_attenuation(distance, alpha: float, a: float):
    """``d^-alpha`` with the singularity disk removed (no attenuation for d < a)."""
    d = np.asarray(distance, dtype=float)
    return np.where(d < a, 1.0, np.maximum(d, a) ** (-alpha))


# ------------------------------------------------------------------- 28 GHz paths

MMWAVE_CONST_DB = -61.4
MMWAVE_SHADOW_SIGMA_DB = 5.8


@dataclass(frozen=True)
class MmWavePath:
    length_m: float
    n_blockers: int = 0
    has_reflection: bool = False
    reflection_coeff: float = 1.0
    penetration_loss_db: float = 0.0
    shadow_sigma_db: float = 0.0

    def __post_init__(self):
        if not self.length_m > 0:
            raise ValueError("path length must be positive")
        if self.n_blockers < 0 or self.penetration_loss_db < 0 or self.shadow_sigma_db < 0:
            raise ValueError("losses must be non-negative")
        if not 0 < self.reflection_coeff <= 1:
            raise ValueError("reflection_coeff must lie in (0, 1]")


def mmwave_path_gain_db(path: MmWavePath, rng: np.random.Generator | None = None) -> float:
    gain = MMWAVE_CONST_DB - 20.0 * math.log10(path.length_m)
    if path.has_reflection:
        gain += 10.0 * math.log10(path.reflection_coeff)
    if path.n_blockers:
        gain -= path.n_blockers * path.penetration_loss_db
    if path.shadow_sigma_db > 0:
        if rng is None:
            raise ValueError("shadowing requires a generator")
        gain -= rng.normal(0.0, path.shadow_sigma_db)
    return gain


# ------------------------------------------------------------------------ antenna

@dataclass(frozen=True)
class SectorAntenna:
    theta: float
    z: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.theta <= TWO_PI + 1e-12:
            raise ValueError("beamwidth must lie in (0, 2pi]")
        if not 0.0 <= self.z < 1.0:
            raise ValueError("side-lobe gain must lie in [0, 1)")

    @property
    def main_gain(self) -> float:
        return (TWO_PI - (TWO_PI - self.theta) * self.z) / self.theta

    @property
    def side_gain(self) -> float:
        return self.z


def sector_gain(antenna: SectorAntenna, in_main_lobe):
    main = np.asarray(in_main_lobe, dtype=bool)
    g = np.where(main, antenna.main_gain, antenna.z)
    return float(g) if g.ndim == 0 else g


def alignment_draw(theta: float, rng: np.random.Generator, size=None):
    """True with probability ``theta / 2pi`` (receiver inside a random main lobe)."""
    if not 0.0 < theta <= TWO_PI + 1e-12:
        raise ValueError("beamwidth must lie in (0, 2pi]")
    u = rng.random(size)
    return (u < theta / TWO_PI) if size is not None else bool(u < theta / TWO_PI)
