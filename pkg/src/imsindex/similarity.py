"""False alarm / miss-detection estimation, the similarity index, and
classical distribution distances for comparison."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

MONTE_CARLO, ANALYTIC, BOUND = "monte_carlo", "analytic", "bound"

# SINR histogram binning shared by every distance computation
HIST_LO_DB = -40.0
HIST_HI_DB = 60.0
HIST_BINS = 400


@dataclass(frozen=True)
class OutageCounts:
    """Sufficient statistics of a paired outage experiment.

    Counts add, so partial results from independent workers can be merged with ``+``.
    """

    n_h0: int = 0
    n_h1: int = 0
    n_fa: int = 0  # x in outage while y is not
    n_md: int = 0  # x not in outage while y is

    def __add__(self, other: "OutageCounts") -> "OutageCounts":
        return OutageCounts(self.n_h0 + other.n_h0, self.n_h1 + other.n_h1,
                            self.n_fa + other.n_fa, self.n_md + other.n_md)

    @classmethod
    def from_arrays(cls, gamma_x, gamma_y, beta: float) -> "OutageCounts":
        out_x = np.asarray(gamma_x) < beta
        out_y = np.asarray(gamma_y) < beta
        return cls(int(np.count_nonzero(~out_y)), int(np.count_nonzero(out_y)),
                   int(np.count_nonzero(out_x & ~out_y)), int(np.count_nonzero(~out_x & out_y)))

    @property
    def total(self) -> int:
        return self.n_h0 + self.n_h1


@dataclass(frozen=True)
class ErrorStats:
    p_fa: float
    p_md: float
    xi: float
    n_h0: int
    n_h1: int
    se_fa: float
    se_md: float
    fa_defined: bool = True
    md_defined: bool = True

    @classmethod
    def from_counts(cls, counts: OutageCounts) -> "ErrorStats":
        if counts.total == 0:
            raise ValueError("need at least one realisation")
        p_fa, se_fa = _binomial(counts.n_fa, counts.n_h0)
        p_md, se_md = _binomial(counts.n_md, counts.n_h1)
        if counts.n_h0 == 0:
            warnings.warn("no H0 realisations: p_fa undefined, using 0 (its weight xi is 0)")
        if counts.n_h1 == 0:
            warnings.warn("no H1 realisations: p_md undefined, using 0 (its weight 1-xi is 0)")
        return cls(p_fa, p_md, counts.n_h0 / counts.total, counts.n_h0, counts.n_h1,
                   se_fa, se_md, counts.n_h0 > 0, counts.n_h1 > 0)

    @property
    def se_xi(self) -> float:
        n = self.n_h0 + self.n_h1
        return math.sqrt(self.xi * (1.0 - self.xi) / n)


def _binomial(k: int, n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 0.0
    p = k / n
    return p, math.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True)
class IndexResult:
    value: float
    beta_db: float
    xi_used: float
    provenance: str = MONTE_CARLO
    se: float = float("nan")


def error_probs(pairs, beta: float) -> ErrorStats:
    """Conditional error frequencies of test model x against reference y.

    ``pairs`` is either an iterable of :class:`SinrPair` or a ``(gamma_x, gamma_y)``
    tuple of arrays.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    gx, gy = _as_arrays(pairs)
    if gx.size == 0:
        raise ValueError("need at least one SINR pair")
    return ErrorStats.from_counts(OutageCounts.from_arrays(gx, gy, beta))


def _as_arrays(pairs) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pairs, tuple) and len(pairs) == 2 and not hasattr(pairs[0], "gamma_x"):
        return np.asarray(pairs[0], dtype=float), np.asarray(pairs[1], dtype=float)
    pairs = list(pairs)
    return (np.array([p.gamma_x for p in pairs], dtype=float),
            np.array([p.gamma_y for p in pairs], dtype=float))


def index_value(p_fa: float, p_md: float, xi: float) -> float:
    return 1.0 - xi * p_fa - (1.0 - xi) * p_md


def similarity_index(stats: ErrorStats, xi_override: float | None = None,
                     beta_db: float = float("nan"), provenance: str = MONTE_CARLO) -> IndexResult:
    xi = stats.xi if xi_override is None else xi_override
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    value = index_value(stats.p_fa, stats.p_md, xi)
    if xi_override is None and stats.n_h0 + stats.n_h1 > 0:
        # with xi = empirical Pr[y not in outage], S is a plain agreement frequency
        n = stats.n_h0 + stats.n_h1
        se = math.sqrt(max(value * (1.0 - value), 0.0) / n)
    else:
        se = math.hypot(xi * stats.se_fa, (1.0 - xi) * stats.se_md)
    return IndexResult(min(max(value, 0.0), 1.0), beta_db, xi, provenance, se)


# ------------------------------------------------------------------ distances

@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        if self.edges.size != self.mass.size + 1:
            raise ValueError("edges must have one more entry than mass")


def sinr_histogram(gamma, lo_db: float = HIST_LO_DB, hi_db: float = HIST_HI_DB,
                   bins: int = HIST_BINS) -> Histogram:
    """Normalised histogram of SINR in dB; out-of-range mass lands in the edge bins."""
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(gamma)
    db = np.clip(np.nan_to_num(db, nan=lo_db, neginf=lo_db, posinf=hi_db), lo_db, hi_db)
    edges = np.linspace(lo_db, hi_db, bins + 1)
    counts, _ = np.histogram(db, bins=edges)
    total = counts.sum()
    if total == 0:
        raise ValueError("empty sample")
    return Histogram(edges, counts / total)


def _masses(dist_a, dist_b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(dist_a, Histogram) and isinstance(dist_b, Histogram):
        if dist_a.edges.shape != dist_b.edges.shape or not np.allclose(dist_a.edges, dist_b.edges):
            raise ValueError("histograms use different binning")
        a, b = dist_a.mass, dist_b.mass
    else:
        a = np.asarray(getattr(dist_a, "mass", dist_a), dtype=float)
        b = np.asarray(getattr(dist_b, "mass", dist_b), dtype=float)
        if a.shape != b.shape:
            raise ValueError("distributions use different binning")
    for m in (a, b):
        if np.any(m < 0) or not math.isclose(m.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError("distributions must be non-negative and sum to one")
    return a, b


def bhattacharyya(dist_x, dist_y) -> tuple[float, float]:
    """Bhattacharyya coefficient and distance ``-ln(rho)``."""
    a, b = _masses(dist_x, dist_y)
    rho = float(np.sum(np.sqrt(a * b)))
    rho = min(rho, 1.0)
    return rho, (math.inf if rho == 0.0 else -math.log(rho))


def kl_divergence(dist_ref, dist_other, base: float = 10.0) -> float:
    """Divergence of ``dist_other`` from the reference ``dist_ref``.

    Computes ``sum other * log_base(other / ref)``; base 10 by default. Returns
    ``inf`` (with a warning naming the bins) if ``other`` puts mass where
    ``ref`` has none.
    """
    ref, other = _masses(dist_ref, dist_other)
    support = other > 0
    bad = np.flatnonzero(support & (ref == 0))
    if bad.size:
        warnings.warn(f"kl_divergence: reference has zero mass in bins {bad[:10].tolist()}")
        return math.inf
    terms = other[support] * np.log(other[support] / ref[support])
    return max(float(terms.sum()) / math.log(base), 0.0)


def euclidean_distance(dist_a, dist_b) -> float:
    a, b = _masses(dist_a, dist_b)
    return float(np.linalg.norm(a - b))


def bhattacharyya_index_bounds(xi: float, rho: float) -> tuple[float, float]:
    """Bounds on S in terms of xi = Pr[y not in outage] and the coefficient rho."""
    if not (0.0 <= xi <= 1.0 and 0.0 <= rho <= 1.0):
        raise ValueError("xi and rho must lie in [0, 1]")
    v = xi * (1.0 - xi)
    lower = 1.5 - xi - rho * math.sqrt(v)
    upper = 1.0 - xi + math.sqrt(max(0.25 - v * rho * rho, 0.0))
    clamp = lambda t: min(max(t, 0.0), 1.0)  # noqa: E731
    return clamp(lower), clamp(upper)


def agreement_fraction(gamma_x, gamma_y, beta: float) -> float:
    """Fraction of realisations where x and y take the same outage decision."""
    return float(np.mean((np.asarray(gamma_x) < beta) == (np.asarray(gamma_y) < beta)))


def merge(counts: Iterable[OutageCounts]) -> OutageCounts:
    total = OutageCounts()
    for c in counts:
        total = total + c
    return total
