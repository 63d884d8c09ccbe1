"""Scenario configuration: presets, flat ``key = value`` files and overrides.

Physical quantities are in SI units; powers, gains and thresholds are given in
dB/dBm and carry a ``_db``/``_dbm`` suffix. They are converted to linear scale
once, through the properties of :class:`ScenarioConfig`.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..interference import PRM, ModelSpec
from ..propagation import db_to_linear, dbm_to_watts, parse_fading

SCENARIOS = ("s1", "s2", "s3", "s4")


class ConfigError(ValueError):
    """Invalid configuration key or value."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "s1"
    # network
    d_t: float = 80.0
    d0: float = 20.0
    alpha: float = 3.6
    c_db: float = -22.7
    a: float = 1.0
    p_dbm: float = 20.0
    sigma_dbm: float = -111.0
    beta_db: float = 5.0
    # antennas and blockage (scenarios 2-4)
    theta_deg: float = 360.0
    z_db: float = -math.inf
    eps_lambda_o: float = 0.0
    # reference model y and model under test x
    fading: str = "rayleigh"
    y_model: str = "phym"
    x_model: str = "phym"
    x_signal_fading: str = ""  # empty: same draws as y
    x_interf_fading: str = ""
    # scenario 4 (obstacles, multipath)
    d_o: float = 20.0
    l_o_db: float = 10.0
    refl_coeff: float = 0.63
    shadow_db: float = 5.8
    reflector_prob: float = 0.1
    window: float = 500.0
    x_l_o_db: float = math.inf
    x_refl_coeff: float = 0.0  # 0 disables reflections in x
    x_z_db: float = -math.inf
    x_keep_main_gain: bool = False  # True: dropping side lobes leaves the main-lobe gain unchanged
    # experiment
    trials: int = 100_000
    seed: int = 1
    truncation_radius: float | None = None  # None: automatic
    network_radius: float = math.inf
    chunk: int = 20_000
    distances: bool = False

    def __post_init__(self):
        s = self.scenario.lower()
        object.__setattr__(self, "scenario", s)
        if s not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.trials < 1 or self.chunk < 1:
            raise ConfigError("trials and chunk must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.d_t <= 0 or self.d0 <= 0 or self.alpha <= 0 or self.a <= 0:
            raise ConfigError("d_t, d0, alpha and a must be positive")
        if not 0 < self.theta_deg <= 360:
            raise ConfigError("theta_deg must lie in (0, 360]")
        if self.z_db >= 0 or self.x_z_db >= 0:
            raise ConfigError("side-lobe gains must be below 0 dB")
        if self.eps_lambda_o < 0:
            raise ConfigError("eps_lambda_o must be >= 0")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise ConfigError("truncation_radius must be positive")
        if not self.network_radius > 0:
            raise ConfigError("network_radius must be positive")
        if s == "s4":
            if self.d_o <= 0 or self.window <= 0:
                raise ConfigError("s4 needs d_o > 0 and window > 0")
            if not 0 <= self.reflector_prob <= 1:
                raise ConfigError("reflector_prob must lie in [0, 1]")
            if not (0 < self.refl_coeff <= 1 and 0 <= self.x_refl_coeff <= 1):
                raise ConfigError("reflection coefficients must lie in (0, 1]")
        try:
            self.x_spec, self.y_spec, self.y_fading
            for text in (self.x_signal_fading, self.x_interf_fading):
                if text:
                    parse_fading(text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    # ------------------------------------------------------------ derived values
    @property
    def lambda_t(self) -> float:
        return 1.0 / self.d_t**2

    @property
    def lambda_o(self) -> float:
        return 1.0 / self.d_o**2

    @property
    def c(self) -> float:
        return float(db_to_linear(self.c_db))

    @property
    def p(self) -> float:
        return float(dbm_to_watts(self.p_dbm))

    @property
    def sigma(self) -> float:
        return float(dbm_to_watts(self.sigma_dbm))

    @property
    def beta(self) -> float:
        return float(db_to_linear(self.beta_db))

    @property
    def theta(self) -> float:
        return math.radians(self.theta_deg)

    @property
    def z(self) -> float:
        return float(db_to_linear(self.z_db))

    @property
    def x_spec(self) -> ModelSpec:
        return self._model(self.x_model)

    @property
    def y_spec(self) -> ModelSpec:
        return self._model(self.y_model)

    def _model(self, text: str) -> ModelSpec:
        # "prm:zeta" / "ibm:2zeta": radius in units of the zero-false-alarm radius
        name, _, arg = text.partition(":")
        if arg.endswith("zeta"):
            mult = float(arg[:-4]) if arg[:-4] else 1.0
            return ModelSpec.parse(f"{name}:{mult * s3_prm_radius(self)!r}")
        return ModelSpec.parse(text)

    @property
    def y_fading(self):
        return parse_fading(self.fading)

    def with_(self, **kw) -> "ScenarioConfig":
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        return "".join(f"{k} = {format_value(v)}\n" for k, v in self.to_dict().items())


# ------------------------------------------------------------------ presets

def preset(name: str, **overrides) -> ScenarioConfig:
    """Named parameter sets of the four scenarios."""
    name = name.lower()
    if name == "s1":
        base = dict(scenario="s1", d_t=80.0, alpha=3.6, c_db=-22.7, sigma_dbm=-111.0,
                    theta_deg=360.0, eps_lambda_o=0.0, x_model="ibm:60")
    elif name in ("s2", "s3"):
        base = dict(scenario=name, d_t=30.0, alpha=2.0, c_db=-61.4, sigma_dbm=-84.0,
                    theta_deg=20.0, eps_lambda_o=0.008, x_model="prm:40")
        if name == "s3":
            base.update(fading="deterministic:1", x_model="prm:zeta")
    elif name == "s4":
        base = dict(scenario="s4", d_t=50.0, alpha=2.0, c_db=-61.4, sigma_dbm=-84.0,
                    theta_deg=20.0, z_db=-10.0, fading="deterministic:1", d_o=20.0,
                    l_o_db=10.0, refl_coeff=0.63, x_model="phym", x_l_o_db=math.inf,
                    x_refl_coeff=0.0, x_z_db=-math.inf)
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {SCENARIOS}")
    base.update(overrides)
    return coerce(base)


def s3_prm_radius(cfg: ScenarioConfig) -> float:
    """Largest protocol radius with zero false alarms under the deterministic channel."""
    from ..analytic import zeta_threshold
    return zeta_threshold(to_scenario2(cfg, ModelSpec.phym()))[1]


def to_scenario2(cfg: ScenarioConfig, x: ModelSpec | None = None):
    """Analytic parameter object matching a scenario-1/2/3 configuration."""
    from ..analytic import Scenario2Params
    x = cfg.x_spec if x is None else x
    return Scenario2Params(
        lambda_t=cfg.lambda_t, d0=cfg.d0, alpha=cfg.alpha, c=cfg.c, a=cfg.a, p=cfg.p,
        sigma=cfg.sigma, beta=cfg.beta,
        r_ibm=x.radius if x.kind == "ibm" else math.inf,
        r_prm=x.radius if x.kind == PRM else 0.0,
        theta=cfg.theta, eps_lambda_o=cfg.eps_lambda_o)


# --------------------------------------------------------------- text format

_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def format_value(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if v == math.inf else "-inf" if v == -math.inf else repr(v)
    return str(v)


ALIASES = {"r_ibm": "ibm", "r_prm": "prm"}


def _expand(values: dict) -> dict:
    """Rewrite the shorthand keys ``r_ibm``/``r_prm`` into ``x_model``."""
    out = {}
    for k, v in values.items():
        if k in ALIASES:
            out["x_model"] = f"{ALIASES[k]}:{str(v).strip()}"
        else:
            out[k] = v
    return out


def _convert(key: str, raw) -> object:
    if key in ALIASES:
        return raw
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}; valid keys: {', '.join(sorted(_FIELD_TYPES))}")
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELD_TYPES[key]
    try:
        if key == "truncation_radius":
            return None if text.lower() in ("auto", "") else float(text)
        if kind == "bool":
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return text


def coerce(values: dict) -> ScenarioConfig:
    values = _expand(values)
    return ScenarioConfig(**{k: _convert(k, v) for k, v in values.items()})


def parse_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {n}: expected key = value")
        key = key.strip()
        _convert(key, value)
        out[key] = value.strip()
    return out


def load(path: str | Path, overrides: dict | None = None) -> ScenarioConfig:
    values = parse_text(Path(path).read_text())
    base = values.get("scenario", "s1")
    merged = {**values, **(overrides or {})}
    return preset(merged.pop("scenario", base), **merged)


def parse_overrides(items) -> dict:
    """``["r=1", "seed=3"]`` -> dict, validating keys."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        key = key.strip()
        _convert(key, value)
        out[key] = value.strip()
    return out


def apply(cfg: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    try:
        return dataclasses.replace(cfg, **{k: _convert(k, v) for k, v in _expand(overrides).items()})
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
