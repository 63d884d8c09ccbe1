"""Interference models as virtual channel-gain masks, and the SINR they induce.

PhyM counts every interferer, IBM only those within ``r_ibm``, TIM those whose
channel gain exceeds ``eps_gain``; PRM declares outage as soon as one
interferer is within ``r_prm`` (an infinite mask, so the SINR collapses to 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

PHYM, IBM, PRM, TIM = "phym", "ibm", "prm", "tim"


@dataclass(frozen=True)
class ModelSpec:
    kind: str = PHYM
    radius: float | None = None
    eps_gain: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in (PHYM, IBM, PRM, TIM):
            raise ValueError(f"unknown interference model {self.kind!r}")
        if kind in (IBM, PRM) and not (self.radius is not None and self.radius > 0):
            raise ValueError(f"{kind} needs a positive radius")
        if kind == TIM and not (self.eps_gain is not None and self.eps_gain > 0):
            raise ValueError("tim needs a positive eps_gain")

    @classmethod
    def phym(cls) -> "ModelSpec":
        return cls(PHYM)

    @classmethod
    def ibm(cls, r_ibm: float) -> "ModelSpec":
        return cls(IBM, radius=r_ibm)

    @classmethod
    def prm(cls, r_prm: float | None = None, *, delta: float | None = None,
            d0: float | None = None) -> "ModelSpec":
        if r_prm is None:
            if delta is None or d0 is None or delta < 0:
                raise ValueError("give r_prm, or delta >= 0 together with d0")
            r_prm = (1.0 + delta) * d0
        return cls(PRM, radius=r_prm)

    @classmethod
    def tim(cls, eps_gain: float) -> "ModelSpec":
        return cls(TIM, eps_gain=eps_gain)

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """``phym``, ``ibm:60``, ``prm:40``, ``tim:-130db`` or ``tim:1e-13``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == PHYM:
            return cls.phym()
        if name == TIM:
            eps = 10 ** (float(arg[:-2]) / 10) if arg.endswith("db") else float(arg)
            return cls.tim(eps)
        if name in (IBM, PRM):
            return cls(name, radius=math.inf if arg in ("inf", "") else float(arg))
        raise ValueError(f"unknown interference model {text!r}")

    def label(self) -> str:
        if self.kind == PHYM:
            return "phym"
        if self.kind == TIM:
            return f"tim:{self.eps_gain:.6g}"
        return f"{self.kind}:{self.radius:g}"


@dataclass(frozen=True)
class LinkBudgetTerm:
    tx_power: float
    tx_gain: float
    channel_gain: float
    rx_gain: float
    distance: float

    def __post_init__(self):
        if min(self.tx_power, self.tx_gain, self.channel_gain, self.rx_gain, self.distance) < 0:
            raise ValueError("link budget terms must be non-negative")

    @property
    def received_power(self) -> float:
        return self.tx_power * self.tx_gain * self.channel_gain * self.rx_gain


@dataclass(frozen=True)
class SinrPair:
    gamma_x: float
    gamma_y: float


def virtual_mask(model: ModelSpec, term: LinkBudgetTerm) -> float:
    if model.kind == PHYM:
        return 1.0
    if model.kind == IBM:
        return 1.0 if term.distance <= model.radius else 0.0
    if model.kind == PRM:
        return math.inf if term.distance <= model.radius else 0.0
    return 1.0 if term.channel_gain > model.eps_gain else 0.0


def mask_array(model: ModelSpec, distance, channel_gain) -> np.ndarray:
    """Vectorised :func:`virtual_mask`; PRM entries come back as ``inf``/0."""
    distance = np.asarray(distance, dtype=float)
    if model.kind == PHYM:
        return np.ones_like(distance)
    if model.kind == IBM:
        return (distance <= model.radius).astype(float)
    if model.kind == PRM:
        return np.where(distance <= model.radius, math.inf, 0.0)
    return (np.asarray(channel_gain, dtype=float) > model.eps_gain).astype(float)


def sinr(model: ModelSpec, signal: LinkBudgetTerm, interferers: Sequence[LinkBudgetTerm],
         noise: float) -> float:
    numerator = signal.received_power
    total = 0.0
    for term in interferers:
        a = virtual_mask(model, term)
        if a == 0.0:
            continue
        if math.isinf(a):
            # +inf mask: outage is certain, whatever the other terms are
            if numerator == 0.0 and noise == 0.0:
                raise ValueError("SINR undefined: zero numerator and zero denominator")
            return 0.0
        total += term.tx_power * term.tx_gain * a * term.channel_gain * term.rx_gain
    denominator = total + noise
    if denominator <= 0.0:
        if numerator == 0.0:
            raise ValueError("SINR undefined: zero numerator and zero denominator")
        return math.inf
    return numerator / denominator


def interference_batch(model: ModelSpec, trial_index, interferer_power, distance, channel_gain,
                       n_trials: int) -> np.ndarray:
    """Aggregate masked interference per realisation.

    Interferers of all trials are flattened; ``trial_index`` maps each one to
    its realisation. PRM yields ``inf`` where an interferer sits inside the
    protocol radius and 0 elsewhere.
    """
    distance = np.asarray(distance, dtype=float)
    if model.kind == PRM:
        hit = np.bincount(trial_index, weights=(distance <= model.radius).astype(float),
                          minlength=n_trials) > 0
        return np.where(hit, math.inf, 0.0)
    w = np.asarray(interferer_power, dtype=float)
    if model.kind != PHYM:
        w = w * mask_array(model, distance, channel_gain)
    return np.bincount(trial_index, weights=w, minlength=n_trials)


def sinr_from_parts(signal_power, interference, noise: float) -> np.ndarray:
    """``signal / (interference + noise)`` with an infinite interference giving 0."""
    signal_power = np.asarray(signal_power, dtype=float)
    interference = np.asarray(interference, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = signal_power / (interference + noise)
    return np.where(np.isinf(interference), 0.0, g)


def sinr_batch(model: ModelSpec, signal_power, trial_index, interferer_power, distance,
               channel_gain, noise: float, n_trials: int, extra_interference=0.0) -> np.ndarray:
    """SINR of many realisations at once (see :func:`interference_batch`).

    ``extra_interference`` is added to every realisation for the models other
    than PRM, e.g. the mean contribution of a truncated far field.
    """
    interference = interference_batch(model, trial_index, interferer_power, distance,
                                      channel_gain, n_trials)
    if model.kind != PRM:
        interference = interference + extra_interference
    return sinr_from_parts(signal_power, interference, noise)


def outage(gamma, beta: float):
    if not beta > 0:
        raise ValueError("beta must be positive")
    out = np.asarray(gamma) < beta
    return bool(out) if out.ndim == 0 else out
