"""Closed-form outage probabilities, accuracy indices and bounds.

Scenario 1: Rayleigh fading, omnidirectional links, homogeneous PPP of interferers.
Scenario 2: adds ideal sector antennas (no side lobe) and exponential blockage,
which turns the effective interferer field into a radially thinned PPP.
Scenario 3: scenario 2 with a deterministic channel; only bounds are available.

Expectations over the interferer fading ``h ~ Exp(1)`` are taken numerically,
either by adaptive quadrature (default) or Gauss-Laguerre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize, special

from . import similarity
from .interference import IBM, PHYM, PRM
from .propagation import db_to_linear, dbm_to_watts

TWO_PI = 2.0 * math.pi


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


class NoiseLimitedError(ValueError):
    """The link is in outage on noise alone, so no protection radius exists."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    fading_nodes: int = 64
    method: str = "adaptive"  # or "laguerre"

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("adaptive", "laguerre"):
            raise ValueError("method must be 'adaptive' or 'laguerre'")
        if self.max_subdivisions < 1 or self.fading_nodes < 1:
            raise ValueError("max_subdivisions and fading_nodes must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class AnalyticResult:
    value: float
    error: float = 0.0
    quad: QuadratureSpec = DEFAULT_QUAD

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class Scenario1Params:
    lambda_t: float
    d0: float
    alpha: float
    c: float
    a: float
    p: float
    sigma: float
    beta: float
    r_ibm: float = math.inf
    r_prm: float = 0.0

    def __post_init__(self):
        if self.lambda_t < 0 or self.d0 <= 0 or self.alpha <= 0 or self.beta <= 0:
            raise ValueError("invalid scenario parameters")
        if self.d0 < self.a or self.r_ibm < self.a:
            raise ValueError("closed forms need d0 >= a and r_ibm >= a")

    @classmethod
    def defaults(cls, **overrides) -> "Scenario1Params":
        """Outdoor microwave setting: d0=20 m, c=-22.7 dB, alpha=3.6, p=20 dBm,
        sigma=-111 dBm, beta=5 dB, d_t=80 m."""
        base = dict(lambda_t=1 / 80**2, d0=20.0, alpha=3.6, c=float(db_to_linear(-22.7)), a=1.0,
                    p=float(dbm_to_watts(20.0)), sigma=float(dbm_to_watts(-111.0)),
                    beta=float(db_to_linear(5.0)), r_ibm=60.0, r_prm=40.0)
        if "d_t" in overrides:
            overrides["lambda_t"] = 1.0 / overrides.pop("d_t") ** 2
        base.update(overrides)
        return cls(**base)

    @property
    def k(self) -> float:
        """``beta * d0^alpha``: the Laplace argument scale."""
        return self.beta * self.d0**self.alpha

    @property
    def noise_term(self) -> float:
        return self.sigma * self.k / (self.p * self.c)

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class Scenario2Params(Scenario1Params):
    theta: float = TWO_PI
    eps_lambda_o: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.theta <= TWO_PI + 1e-12 or self.eps_lambda_o < 0:
            raise ValueError("need 0 < theta <= 2pi and eps_lambda_o >= 0")

    @classmethod
    def defaults(cls, **overrides) -> "Scenario2Params":
        """28 GHz LoS law (c=-61.4 dB, alpha=2), sigma=-84 dBm (1 GHz),
        eps*lambda_o=0.008, theta=20 deg, r_prm=40 m, r_ibm=80 m, d_t=30 m."""
        base = dict(lambda_t=1 / 30**2, d0=20.0, alpha=2.0, c=float(db_to_linear(-61.4)), a=1.0,
                    p=float(dbm_to_watts(20.0)), sigma=float(dbm_to_watts(-84.0)),
                    beta=float(db_to_linear(5.0)), r_ibm=80.0, r_prm=40.0,
                    theta=math.radians(20.0), eps_lambda_o=0.008)
        if "d_t" in overrides:
            overrides["lambda_t"] = 1.0 / overrides.pop("d_t") ** 2
        base.update(overrides)
        return cls(**base)

    @property
    def lobe(self) -> float:
        return (self.theta / TWO_PI) ** 2

    @property
    def noise_term(self) -> float:
        # main-lobe gains (2pi/theta)^2 on the intended link
        return self.sigma * self.k * self.lobe / (self.p * self.c)

    @property
    def field_scale(self) -> float:
        return self.theta**2 * self.lambda_t / TWO_PI


# ---------------------------------------------------------------- special functions

def upper_incomplete_gamma(s: float, x: float) -> float:
    """``Gamma(s, x) = int_x^inf t^(s-1) e^-t dt`` for real ``s`` (also s <= 0)."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        if s <= 0:
            raise ValueError("Gamma(s, 0) diverges for s <= 0")
        return math.gamma(s)
    if s > 0:
        return float(special.gammaincc(s, x) * special.gamma(s))
    if s == 0:
        return float(special.exp1(x))
    # climb to a positive (or zero) order, then recurse down:
    # Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s
    n = int(math.ceil(-s))
    top = s + n
    g = upper_incomplete_gamma(top, x) if top > 0 else float(special.exp1(x))
    for j in range(n - 1, -1, -1):
        sj = s + j
        g = (g - x**sj * math.exp(-x)) / sj
    return g


def _gamma_vec(s: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return special.gammaincc(s, x) * special.gamma(s)


def _r_exp_integral(kappa: float, lo: float, hi: float) -> float:
    """``int_lo^hi r exp(-kappa r) dr``, stable as kappa -> 0."""
    if kappa == 0.0:
        if math.isinf(hi):
            return math.inf
        return 0.5 * (hi * hi - lo * lo)
    up = special.gammainc(2.0, kappa * hi) if math.isfinite(hi) else 1.0
    return float((up - special.gammainc(2.0, kappa * lo)) / kappa**2)


def _expect_exp(fn, quad: QuadratureSpec) -> AnalyticResult:
    """``E[fn(h)]`` for ``h ~ Exp(1)``."""
    if quad.method == "laguerre":
        x, w = np.polynomial.laguerre.laggauss(quad.fading_nodes)
        vals = np.array([fn(float(t)) for t in x])
        return AnalyticResult(float(np.dot(w, vals)), math.nan, quad)
    val, err = integrate.quad(lambda h: fn(h) * math.exp(-h), 0.0, math.inf,
                              epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
    if err > max(quad.abs_tol, quad.rel_tol * abs(val)) * 100:
        raise QuadratureError("fading expectation did not converge", err)
    return AnalyticResult(val, err, quad)


def _outage_from_exponent(exponent: AnalyticResult) -> AnalyticResult:
    value = -math.expm1(-exponent.value)
    return AnalyticResult(min(max(value, 0.0), 1.0), exponent.error * math.exp(-exponent.value), exponent.quad)


# --------------------------------------------------------------------- scenario 1

def _s1_ibm_bracket(t: float, prm: Scenario1Params, radius: float) -> float:
    """Bracketed integrand of the IBM outage exponent for fading value h (t = k h)."""
    a, alpha = prm.a, prm.alpha
    s = 1.0 - 2.0 / alpha
    near = a * a * (-math.expm1(-t))
    edge_a = a * a * (-math.expm1(-t * a**-alpha))
    if math.isinf(radius):
        if alpha <= 2:
            raise ValueError("the full-plane interference diverges for alpha <= 2")
        edge_r = 0.0
        gam_r = math.gamma(s)
    else:
        edge_r = radius * radius * (-math.expm1(-t * radius**-alpha))
        gam_r = upper_incomplete_gamma(s, t * radius**-alpha)
    gam_a = upper_incomplete_gamma(s, t * a**-alpha) if t > 0 else math.gamma(s) if s > 0 else math.inf
    if t == 0.0:
        return 0.0
    return near + edge_r - edge_a + t ** (2.0 / alpha) * (gam_r - gam_a)


def _s1_prm_tail_bracket(t: float, prm: Scenario1Params) -> float:
    r, alpha = prm.r_prm, prm.alpha
    if alpha <= 2:
        raise ValueError("the full-plane interference diverges for alpha <= 2")
    if t == 0.0:
        return 0.0
    s = 1.0 - 2.0 / alpha
    return (-r * r * (-math.expm1(-t * r**-alpha))
            + t ** (2.0 / alpha) * (math.gamma(s) - upper_incomplete_gamma(s, t * r**-alpha)))


def s1_outage(model: str, params: Scenario1Params, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticResult:
    """Outage probability under IBM (finite ``r_ibm``), PhyM, or PRM."""
    model = model.lower()
    if model == PRM:
        return AnalyticResult(-math.expm1(-params.lambda_t * math.pi * params.r_prm**2), 0.0, quad)
    if model == IBM:
        radius = params.r_ibm
    elif model == PHYM:
        radius = math.inf
    else:
        raise ValueError(f"no scenario-1 closed form for {model!r}")
    if params.lambda_t == 0:
        return _outage_from_exponent(AnalyticResult(params.noise_term, 0.0, quad))
    k = params.k
    e = _expect_exp(lambda h: _s1_ibm_bracket(k * h, params, radius), quad)
    expo = params.noise_term + math.pi * params.lambda_t * e.value
    return _outage_from_exponent(AnalyticResult(expo, math.pi * params.lambda_t * e.error, quad))


def s1_cond_phym_given_prm_ok(params: Scenario1Params, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticResult:
    """``Pr[PhyM outage | no interferer within r_prm]``."""
    if params.r_prm < params.a:
        raise ValueError("closed form needs r_prm >= a")
    if params.lambda_t == 0 or math.isinf(params.r_prm):
        return _outage_from_exponent(AnalyticResult(params.noise_term, 0.0, quad))
    k = params.k
    e = _expect_exp(lambda h: _s1_prm_tail_bracket(k * h, params), quad)
    expo = params.noise_term + math.pi * params.lambda_t * e.value
    return _outage_from_exponent(AnalyticResult(expo, math.pi * params.lambda_t * e.error, quad))


@dataclass(frozen=True)
class IndexComponents:
    """Everything that goes into an analytic accuracy index."""

    p_fa: float
    p_md: float
    xi: float
    p_out_x: float
    p_out_y: float
    p_cond: float = math.nan
    result: similarity.IndexResult = field(default=None)


def _assemble(model: str, p_x: float, p_y: float, p_cond: float, beta: float) -> IndexComponents:
    xi = 1.0 - p_y
    if model == IBM:
        # gamma_phym <= gamma_ibm on every realisation
        p_fa = 0.0
        p_md = 1.0 - p_x / p_y if p_y > 0 else 0.0
    elif model == PRM:
        p_fa = 1.0 - (1.0 - p_x) * (1.0 - p_cond) / xi if xi > 0 else 0.0
        p_md = (1.0 - p_x) * p_cond / p_y if p_y > 0 else 0.0
    else:
        raise ValueError(f"no index for model {model!r}")
    p_fa = min(max(p_fa, 0.0), 1.0)
    p_md = min(max(p_md, 0.0), 1.0)
    value = similarity.index_value(p_fa, p_md, xi)
    res = similarity.IndexResult(min(max(value, 0.0), 1.0), 10 * math.log10(beta), xi, similarity.ANALYTIC, 0.0)
    return IndexComponents(p_fa, p_md, xi, p_x, p_y, p_cond, res)


def s1_index(model: str, params: Scenario1Params, quad: QuadratureSpec = DEFAULT_QUAD) -> IndexComponents:
    model = model.lower()
    p_y = s1_outage(PHYM, params, quad).value
    p_x = s1_outage(model, params, quad).value
    p_cond = s1_cond_phym_given_prm_ok(params, quad).value if model == PRM else math.nan
    return _assemble(model, p_x, p_y, p_cond, params.beta)


# ------------------------------------------------------------ scenario 2 measures

def region_measure(theta: float, lambda_t: float, eps_lambda_o: float, R: float) -> float:
    """Mean number of aligned LoS interferers in the sector of radius ``R``."""
    if R < 0:
        raise ValueError("R must be non-negative")
    if math.isinf(R) and eps_lambda_o == 0:
        return math.inf if lambda_t > 0 else 0.0
    return theta**2 * lambda_t / TWO_PI * _r_exp_integral(eps_lambda_o, 0.0, R)


def far_field(theta: float, lambda_t: float, eps_lambda_o: float, R: float) -> tuple[float, float]:
    """Mean count beyond ``R`` in the sector, and the probability that none is there."""
    if R < 0:
        raise ValueError("R must be non-negative")
    if math.isinf(R):
        return 0.0, 1.0
    if eps_lambda_o == 0:
        return (math.inf, 0.0) if lambda_t > 0 else (0.0, 1.0)
    measure = theta**2 * lambda_t / TWO_PI * float(special.gammaincc(2.0, eps_lambda_o * R)) / eps_lambda_o**2
    return measure, math.exp(-measure)


# --------------------------------------------------------------------- scenario 2

def _radial_tail(t: float, prm: Scenario2Params, lo: float, hi: float, quad: QuadratureSpec) -> float:
    """``int_lo^hi (1 - exp(-t r^-alpha)) exp(-kappa r) r dr``."""
    if t == 0.0 or hi <= lo:
        return 0.0
    kappa, alpha = prm.eps_lambda_o, prm.alpha
    if math.isinf(hi) and kappa == 0 and alpha <= 2:
        raise ValueError("the full-plane interference diverges for alpha <= 2 without blockage")
    f = lambda r: -math.expm1(-t * r**-alpha) * math.exp(-kappa * r) * r  # noqa: E731
    val, err = integrate.quad(f, lo, hi, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
    return val


def _s2_bracket(t: float, prm: Scenario2Params, radius: float, quad: QuadratureSpec) -> float:
    near = -math.expm1(-t) * _r_exp_integral(prm.eps_lambda_o, 0.0, prm.a)
    return near + _radial_tail(t, prm, prm.a, radius, quad)


def s2_outage(model: str, params: Scenario2Params, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticResult:
    """Outage probability under IBM, PhyM or PRM with sector antennas (z = 0) and blockage."""
    model = model.lower()
    if model == PRM:
        lam = region_measure(params.theta, params.lambda_t, params.eps_lambda_o, params.r_prm)
        return AnalyticResult(-math.expm1(-lam), 0.0, quad)
    if model == IBM:
        radius = params.r_ibm
    elif model == PHYM:
        radius = math.inf
    else:
        raise ValueError(f"no scenario-2 closed form for {model!r}")
    if params.lambda_t == 0:
        return _outage_from_exponent(AnalyticResult(params.noise_term, 0.0, quad))
    k = params.k
    e = _expect_exp(lambda h: _s2_bracket(k * h, params, radius, quad), quad)
    expo = params.noise_term + params.field_scale * e.value
    return _outage_from_exponent(AnalyticResult(expo, params.field_scale * e.error, quad))


def s2_phym_outage_closed(params: Scenario2Params, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticResult:
    """PhyM outage in the regrouped form with a single ``exp(-t r^-alpha - kappa r)`` integral.

    Algebraically equal to ``s2_outage('phym', ...)``; needs ``eps_lambda_o > 0``.
    """
    kappa, a, alpha = params.eps_lambda_o, params.a, params.alpha
    if kappa <= 0:
        raise ValueError("regrouped form needs eps_lambda_o > 0")
    g_a = float(special.gammainc(2.0, kappa * a))  # 1 - (1 + kappa a) e^{-kappa a}

    def bracket(h):
        t = params.k * h
        tail, _ = integrate.quad(lambda r: math.exp(-t * r**-alpha - kappa * r) * r, a, math.inf,
                                 epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
        return 1.0 - math.exp(-t) * g_a - kappa**2 * tail

    e = _expect_exp(bracket, quad)
    scale = params.field_scale / kappa**2
    return _outage_from_exponent(AnalyticResult(params.noise_term + scale * e.value, scale * e.error, quad))


def s2_cond_phym_given_prm_ok(params: Scenario2Params, quad: QuadratureSpec = DEFAULT_QUAD) -> AnalyticResult:
    if params.r_prm < params.a:
        raise ValueError("closed form needs r_prm >= a")
    if params.lambda_t == 0 or math.isinf(params.r_prm):
        return _outage_from_exponent(AnalyticResult(params.noise_term, 0.0, quad))
    k = params.k
    e = _expect_exp(lambda h: _radial_tail(k * h, params, params.r_prm, math.inf, quad), quad)
    expo = params.noise_term + params.field_scale * e.value
    return _outage_from_exponent(AnalyticResult(expo, params.field_scale * e.error, quad))


def s2_index(model: str, params: Scenario2Params, quad: QuadratureSpec = DEFAULT_QUAD) -> IndexComponents:
    model = model.lower()
    p_y = s2_outage(PHYM, params, quad).value
    p_x = s2_outage(model, params, quad).value
    p_cond = s2_cond_phym_given_prm_ok(params, quad).value if model == PRM else math.nan
    return _assemble(model, p_x, p_y, p_cond, params.beta)


# --------------------------------------------------------------------- scenario 3

def zeta_threshold(params: Scenario2Params) -> tuple[float, float]:
    """Interference budget ``zeta`` (deterministic channel) and the largest PRM
    radius ``zeta^(-1/alpha)`` that still guarantees zero false alarms."""
    zeta = params.d0 ** (-params.alpha) / params.beta - params.sigma / (params.p * params.c) * params.lobe
    if zeta <= 0:
        raise NoiseLimitedError(f"zeta = {zeta:.3g} <= 0: the link fails on noise alone at this beta")
    return zeta, zeta ** (-1.0 / params.alpha)


def _log_grid(zeta: float, points: int = 241) -> np.ndarray:
    return np.logspace(math.log10(1e-6 / zeta), math.log10(1e6 / zeta), points)


def _minimise_log(objective, grid: np.ndarray) -> tuple[float, float]:
    """Grid search over tau followed by bounded refinement in log(tau)."""
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.array([objective(t) for t in grid])
    vals = np.where(np.isfinite(vals), vals, np.inf)
    i = int(np.argmin(vals))
    lo = math.log(grid[max(i - 1, 0)])
    hi = math.log(grid[min(i + 1, grid.size - 1)])
    if hi > lo:
        res = optimize.minimize_scalar(lambda u: objective(math.exp(u)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-10})
        if res.fun < vals[i]:
            return float(math.exp(res.x)), float(res.fun)
    return float(grid[i]), float(vals[i])


def _chernoff_lower_exponent(tau: float, params: Scenario2Params, r_ibm: float) -> float:
    """``int (1 - e^{-tau g(r)}) r e^{-kappa r} dr`` over [0, r_ibm], g = 1 inside a."""
    kappa, a, alpha = params.eps_lambda_o, params.a, params.alpha
    near = -math.expm1(-tau) * _r_exp_integral(kappa, 0.0, a)
    far, _ = integrate.quad(lambda r: -math.expm1(-tau * r**-alpha) * r * math.exp(-kappa * r), a, r_ibm,
                            epsabs=1e-13, epsrel=1e-10, limit=400)
    return near + far


def chernoff_lower_closed(tau: float, params: Scenario2Params, r_ibm: float) -> float:
    """The same integral written with the single ``r e^{-kappa r - tau r^-alpha}`` term."""
    kappa, a, alpha = params.eps_lambda_o, params.a, params.alpha
    head = (1.0 - math.exp(-tau) + (1.0 + kappa * a) * math.exp(-kappa * a - tau)
            - (1.0 + kappa * r_ibm) * math.exp(-kappa * r_ibm)) / kappa**2
    tail, _ = integrate.quad(lambda r: r * math.exp(-kappa * r - tau * r**-alpha), a, r_ibm,
                             epsabs=1e-13, epsrel=1e-12, limit=400)
    return head - tail


def _chernoff_upper_exponent(tau: float, params: Scenario2Params) -> float:
    """``int (e^{tau g(r)} - 1) r e^{-kappa r} dr`` over the whole sector."""
    kappa, a, alpha = params.eps_lambda_o, params.a, params.alpha
    if tau > 700:
        return math.inf
    near = math.expm1(tau) * _r_exp_integral(kappa, 0.0, a)
    if kappa == 0 and alpha <= 2:
        return math.inf
    far, _ = integrate.quad(lambda r: math.expm1(tau * r**-alpha) * r * math.exp(-kappa * r), a, math.inf,
                            epsabs=1e-13, epsrel=1e-10, limit=400)
    return near + far


def chernoff_upper_closed(tau: float, params: Scenario2Params) -> float:
    kappa, a, alpha = params.eps_lambda_o, params.a, params.alpha
    head = (1.0 - math.exp(tau) + (1.0 + kappa * a) * math.exp(-kappa * a + tau)) / kappa**2
    tail, _ = integrate.quad(lambda r: r * math.exp(-kappa * r + tau * r**-alpha), a, math.inf,
                             epsabs=1e-13, epsrel=1e-12, limit=400)
    return -(head - tail)


@dataclass(frozen=True)
class ChernoffBound:
    value: float
    tau: float
    log_objective: float


def s3_chernoff_ibm_lower(params: Scenario2Params, r_ibm: float | None = None,
                          tau_grid: np.ndarray | None = None) -> ChernoffBound:
    """Lower bound on ``Pr[IBM outage]`` under the deterministic channel."""
    r_ibm = params.r_ibm if r_ibm is None else r_ibm
    zeta, _ = zeta_threshold(params)
    if params.lambda_t == 0:
        return ChernoffBound(0.0, 0.0, 0.0)
    scale = params.field_scale
    obj = lambda tau: tau * zeta - scale * _chernoff_lower_exponent(tau, params, r_ibm)  # noqa: E731
    tau, best = _minimise_log(obj, _log_grid(zeta) if tau_grid is None else np.asarray(tau_grid))
    best = min(best, 0.0)  # tau -> 0 gives the trivial bound
    return ChernoffBound(max(-math.expm1(best), 0.0) + 0.0, tau, best)


def s3_chernoff_phym_upper(params: Scenario2Params, tau_grid: np.ndarray | None = None) -> ChernoffBound:
    """Upper bound on ``Pr[PhyM outage]`` under the deterministic channel."""
    zeta, _ = zeta_threshold(params)
    if params.lambda_t == 0:
        # Pr[0 > zeta] = 0; the exponent -tau*zeta decreases without bound
        return ChernoffBound(0.0, math.inf, -math.inf)
    scale = params.field_scale
    obj = lambda tau: -tau * zeta + scale * _chernoff_upper_exponent(tau, params)  # noqa: E731
    tau, best = _minimise_log(obj, _log_grid(zeta) if tau_grid is None else np.asarray(tau_grid))
    best = min(best, 0.0)
    return ChernoffBound(min(math.exp(best), 1.0), tau, best)


def s3_ibm_md_upper(params: Scenario2Params, r_ibm: float | None = None) -> float:
    """Upper bound on the IBM miss-detection probability from the two Chernoff bounds."""
    lo = s3_chernoff_ibm_lower(params, r_ibm).value
    hi = s3_chernoff_phym_upper(params).value
    return 1.0 if hi == 0 else min(max(1.0 - lo / hi, 0.0), 1.0)


def s3_prm_index_bounds(params: Scenario2Params, phym_ok: float | None = None) -> tuple[float, float]:
    """``max(Pr[PRM outage], Pr[PhyM no outage]) <= S <= 1`` for r_prm in the zero-false-alarm range.

    ``phym_ok`` may carry an estimate of ``Pr[PhyM no outage]``; by default the
    Chernoff upper bound on the PhyM outage is used, which keeps the result a
    rigorous lower bound.
    """
    _, r_max = zeta_threshold(params)
    if not 0 < params.r_prm <= r_max * (1 + 1e-12):
        raise ValueError(f"r_prm={params.r_prm:g} outside the zero-false-alarm range (0, {r_max:g}]")
    lam = region_measure(params.theta, params.lambda_t, params.eps_lambda_o, params.r_prm)
    p_prm = -math.expm1(-lam)
    if phym_ok is None:
        phym_ok = 1.0 - s3_chernoff_phym_upper(params).value
    return max(p_prm, phym_ok), 1.0


def s3_ibm_index_bounds(params: Scenario2Params, r_ibm: float | None = None) -> tuple[float, float]:
    lo_ibm = s3_chernoff_ibm_lower(params, r_ibm).value
    phym_ok = 1.0 - s3_chernoff_phym_upper(params).value
    return max(lo_ibm, phym_ok), 1.0
