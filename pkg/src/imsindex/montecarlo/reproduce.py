"""Data behind each figure and table: one CSV row per plotted point or table
cell, plus a JSON sidecar holding the configuration and seed."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import analytic
from ..interference import ModelSpec
from . import engine
from .config import ScenarioConfig, format_value, preset, s3_prm_radius, to_scenario2

TARGETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "table2", "table3")
D_T_GRID = tuple(float(v) for v in range(10, 151, 10))
R_GRID = tuple(float(v) for v in range(5, 101, 5))
BETA_GRID_DB = tuple(float(v) for v in range(0, 11))

# (l_o dB, reflection coeff, z dB, theta deg, d_t, d_o, simplification in x)
# simplification: "refl" drops reflections, "pen" makes obstacles impenetrable,
# "lobe" removes side lobes, "all" does all three
TABLE3_ROWS = (
    (10, 0.63, -10, 20, 50, 20, "refl"),
    (10, 0.74, -10, 40, 30, 20, "refl"),
    (20, 0.90, -10, 40, 50, 50, "refl"),
    (10, 0.74, -10, 20, 50, 50, "pen"),
    (20, 0.74, -10, 20, 30, 50, "pen"),
    (20, 0.74, -10, 20, 30, 20, "pen"),
    (15, 0.74, -5, 20, 50, 20, "lobe"),
    (15, 0.74, -5, 20, 20, 50, "lobe"),
    (15, 0.74, -10, 40, 30, 20, "lobe"),
    (25, 0.90, -10, 10, 30, 30, "all"),
    (15, 0.63, -15, 30, 50, 50, "all"),
    (15, 0.74, -10, 20, 100, 50, "all"),
)
TABLE2_FADINGS = ("rayleigh", "nakagami:3", "nakagami:9")
TABLE2_ALPHAS = (2.0, 3.0, 4.0, 5.0)
TABLE2_NETWORK_RADIUS = 500.0


@dataclass
class Table:
    target: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row):
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _fmt(row.get(k, "")) for k in self.columns})
        return buf.getvalue()

    def sidecar(self) -> str:
        return json.dumps(_jsonable(self.meta), indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format_value(float(v)) if math.isfinite(v) else ("nan" if math.isnan(v) else format_value(float(v)))
    return v


def _jsonable(v):
    if isinstance(v, ScenarioConfig):
        return {k: _jsonable(x) for k, x in v.to_dict().items()}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else format_value(v) if not math.isnan(v) else "nan"
    if isinstance(v, np.integer):
        return int(v)
    return v


def _run_cols():
    return ["S", "se_S", "p_fa", "p_md", "xi", "p_out_x", "p_out_y"]


def _rep_fields(rep: engine.RunReport) -> dict:
    return {"S": rep.index.value, "se_S": rep.index.se, "p_fa": rep.stats.p_fa, "p_md": rep.stats.p_md,
            "xi": rep.stats.xi, "p_out_x": rep.p_out_x, "p_out_y": rep.p_out_y}


def _s1_params(cfg: ScenarioConfig, model: ModelSpec) -> analytic.Scenario1Params:
    return analytic.Scenario1Params(
        lambda_t=cfg.lambda_t, d0=cfg.d0, alpha=cfg.alpha, c=cfg.c, a=cfg.a, p=cfg.p, sigma=cfg.sigma,
        beta=cfg.beta, r_ibm=model.radius if model.kind == "ibm" else math.inf,
        r_prm=model.radius if model.kind == "prm" else 0.0)


def analytic_index(cfg: ScenarioConfig, model: ModelSpec | None = None) -> float:
    model = cfg.x_spec if model is None else model
    if cfg.scenario == "s1":
        return analytic.s1_index(model.kind, _s1_params(cfg, model)).result.value
    return analytic.s2_index(model.kind, to_scenario2(cfg, model)).result.value


# ---------------------------------------------------------------- figures

def fig2(trials: int, seed: int, threads: int = 1) -> Table:
    """S1 accuracy against the model radius, IBM and PRM, d_t = 30 and 80 m."""
    t = Table("fig2", ["d_t", "model", "radius", "S_analytic"] + _run_cols())
    for d_t in (30.0, 80.0):
        cfg = preset("s1", d_t=d_t, trials=trials, seed=seed)
        models = [ModelSpec.ibm(r) for r in R_GRID] + [ModelSpec.prm(r) for r in R_GRID]
        for rep, m in zip(engine.run_models(cfg, models, threads=threads), models):
            t.add(d_t=d_t, model=m.kind, radius=m.radius, S_analytic=analytic_index(cfg, m), **_rep_fields(rep))
    t.meta = {"base": preset("s1", trials=trials, seed=seed), "d_t": [30.0, 80.0], "radii": R_GRID}
    return t


def fig3(trials: int, seed: int, threads: int = 1) -> Table:
    """S1 accuracy against d_t for IBM(60) and PRM(40)."""
    t = Table("fig3", ["d_t", "model", "radius", "S_analytic"] + _run_cols())
    models = [ModelSpec.ibm(60.0), ModelSpec.prm(40.0)]
    for i, d_t in enumerate(D_T_GRID):
        cfg = preset("s1", d_t=d_t, trials=trials, seed=seed)
        for rep, m in zip(engine.run_models(cfg, models, point=i, threads=threads), models):
            t.add(d_t=d_t, model=m.kind, radius=m.radius, S_analytic=analytic_index(cfg, m), **_rep_fields(rep))
    t.meta = {"base": preset("s1", trials=trials, seed=seed), "d_t": D_T_GRID}
    return t


def fig4(trials: int, seed: int, threads: int = 1) -> Table:
    """S1 IBM(20) and IBM(60): accuracy index next to KL divergence and
    Bhattacharyya distance of the SINR histograms, against d_t."""
    t = Table("fig4", ["d_t", "radius", "S", "se_S", "kl", "bhattacharyya_distance", "rho"])
    for i, d_t in enumerate(D_T_GRID):
        cfg = preset("s1", d_t=d_t, trials=trials, seed=seed, distances=True)
        models = [ModelSpec.ibm(20.0), ModelSpec.ibm(60.0)]
        for rep, m in zip(engine.run_models(cfg, models, point=i, threads=threads), models):
            t.add(d_t=d_t, radius=m.radius, S=rep.index.value, se_S=rep.index.se, kl=rep.kl,
                  bhattacharyya_distance=rep.bhattacharyya_distance, rho=rep.rho)
    t.meta = {"base": preset("s1", trials=trials, seed=seed, distances=True), "d_t": D_T_GRID}
    return t


def fig5(trials: int, seed: int, threads: int = 1) -> Table:
    """Mean number of aligned LoS interferers beyond R and the chance of at least one."""
    t = Table("fig5", ["theta_deg", "d_t", "R", "mean_count", "p_nonempty"])
    for theta_deg in (10.0, 20.0, 40.0):
        for R in np.arange(0.0, 501.0, 25.0):
            m, empty = analytic.far_field(math.radians(theta_deg), 1 / 30.0**2, 0.008, float(R))
            t.add(theta_deg=theta_deg, d_t=30.0, R=float(R), mean_count=m, p_nonempty=1.0 - empty)
    t.meta = {"eps_lambda_o": 0.008, "d_t": 30.0}
    return t


def fig6(trials: int, seed: int, threads: int = 1) -> Table:
    """Accuracy against the SINR threshold, scenarios 1 and 2."""
    t = Table("fig6", ["scenario", "d_t", "model", "radius", "beta_db", "S_analytic"] + _run_cols())
    for scen, d_t, models in (("s1", 80.0, [ModelSpec.ibm(60.0), ModelSpec.prm(40.0)]),
                              ("s2", 30.0, [ModelSpec.ibm(80.0), ModelSpec.prm(40.0)])):
        cfg = preset(scen, d_t=d_t, trials=trials, seed=seed)
        reps = engine.run_models(cfg, models, threads=threads, betas_db=list(BETA_GRID_DB))
        for rep in reps:
            m = ModelSpec.parse(rep.model)
            c = cfg.with_(beta_db=rep.index.beta_db)
            t.add(scenario=scen, d_t=d_t, model=m.kind, radius=m.radius, beta_db=rep.index.beta_db,
                  S_analytic=analytic_index(c, m), **_rep_fields(rep))
    t.meta = {"s1": preset("s1", trials=trials, seed=seed), "s2": preset("s2", trials=trials, seed=seed),
              "beta_db": BETA_GRID_DB}
    return t


def fig7(trials: int, seed: int, threads: int = 1) -> Table:
    """Scenario 3 against d_t: PRM at the zero-false-alarm radius, IBM at twice that."""
    t = Table("fig7", ["d_t", "model", "radius", "lower_bound", "throughput_dev_pct"] + _run_cols())
    for i, d_t in enumerate(D_T_GRID):
        cfg = preset("s3", d_t=d_t, trials=trials, seed=seed)
        r0 = s3_prm_radius(cfg)
        models = [ModelSpec.prm(r0), ModelSpec.ibm(2 * r0)]
        reps = engine.run_models(cfg, models, point=i, threads=threads)
        for rep, m in zip(reps, models):
            p2 = to_scenario2(cfg, m)
            lo = (analytic.s3_prm_index_bounds(p2)[0] if m.kind == "prm"
                  else analytic.s3_ibm_index_bounds(p2, m.radius)[0])
            t.add(d_t=d_t, model=m.kind, radius=m.radius, lower_bound=lo,
                  throughput_dev_pct=rep.throughput_dev, **_rep_fields(rep))
    t.meta = {"base": preset("s3", trials=trials, seed=seed), "d_t": D_T_GRID}
    return t


# ----------------------------------------------------------------- tables

def table2_config(fading: str, alpha: float, trials: int, seed: int) -> ScenarioConfig:
    return preset("s1", d_t=80.0, alpha=alpha, fading=fading, trials=trials, seed=seed,
                  network_radius=TABLE2_NETWORK_RADIUS)


def table2(trials: int, seed: int, threads: int = 1) -> Table:
    """Deterministic-channel approximation: fitted c0, mean accuracy over
    0..10 dB, Bhattacharyya distance and throughput deviation."""
    t = Table("table2", ["fading", "alpha", "c0", "accuracy", "bhattacharyya_distance", "rho",
                         "throughput_dev_pct"])
    for fading in TABLE2_FADINGS:
        for alpha in TABLE2_ALPHAS:
            cfg = table2_config(fading, alpha, trials, seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fit = engine.fit_c0(cfg, BETA_GRID_DB, threads=threads)
            t.add(fading=fading, alpha=alpha, c0=fit.c0, accuracy=fit.mean_index,
                  bhattacharyya_distance=fit.bhattacharyya_distance, rho=fit.rho,
                  throughput_dev_pct=fit.throughput_dev)
    t.meta = {"base": table2_config("rayleigh", 2.0, trials, seed), "scope": "interferers",
              "beta_db": BETA_GRID_DB, "fadings": TABLE2_FADINGS, "alphas": TABLE2_ALPHAS}
    return t


def table3_config(row: int, trials: int, seed: int) -> ScenarioConfig:
    lo, r, z, th, d_t, d_o, simp = TABLE3_ROWS[row - 1]
    x = dict(x_l_o_db=float(lo), x_refl_coeff=r, x_z_db=float(z))
    if simp in ("refl", "all"):
        x["x_refl_coeff"] = 0.0
    if simp in ("pen", "all"):
        x["x_l_o_db"] = math.inf
    if simp in ("lobe", "all"):
        x["x_z_db"] = -math.inf
    return preset("s4", l_o_db=float(lo), refl_coeff=r, z_db=float(z), theta_deg=float(th), d_t=float(d_t),
                  d_o=float(d_o), trials=trials, seed=seed, **x)


def table3(trials: int, seed: int, threads: int = 1) -> Table:
    """Scenario 4: accuracy of PhyM with simplified propagation against the full model."""
    t = Table("table3", ["experiment", "l_o_db", "refl_coeff", "z_db", "theta_deg", "d_t", "d_o",
                         "simplification"] + _run_cols())
    for i, row in enumerate(TABLE3_ROWS, 1):
        cfg = table3_config(i, trials, seed)
        rep = engine.run_models(cfg, point=i, threads=threads)[0]
        lo, r, z, th, d_t, d_o, simp = row
        t.add(experiment=i, l_o_db=lo, refl_coeff=r, z_db=z, theta_deg=th, d_t=d_t, d_o=d_o,
              simplification=simp, **_rep_fields(rep))
    t.meta = {"rows": [table3_config(i, trials, seed) for i in range(1, 13)]}
    return t


def reproduce(target: str, trials: int = 100_000, seed: int = 1, threads: int = 1) -> Table:
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    table = globals()[target](trials, seed, threads)
    table.meta = {"target": target, "trials": trials, "seed": seed, **table.meta}
    return table
