"""Command-line front end.

Verbs: ``run``, ``sweep``, ``analytic``, ``fit-c0``, ``reproduce`` and
``selfcheck``. Data goes to ``<out>/<verb>-<timestamp>.csv`` (or ``.json``)
with a JSON sidecar holding every setting needed to re-run it; a one-line
summary goes to standard output.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical
non-convergence, 3 a selfcheck failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from datetime import datetime
from pathlib import Path

import numpy as np
from scipy import special

from . import __version__, analytic, similarity
from .analytic import NoiseLimitedError, QuadratureError
from .interference import ModelSpec
from .montecarlo import engine
from .montecarlo.config import ConfigError, ScenarioConfig, apply, load, parse_overrides, preset
from .montecarlo.reproduce import TARGETS, Table, _jsonable, reproduce
from .propagation import SectorAntenna

VERBS = ("run", "sweep", "analytic", "fit-c0", "reproduce", "selfcheck")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3

# radius used when --model names a bare kind that differs from the preset's
DEFAULT_RADII = {
    "s1": {"ibm": "60", "prm": "40"},
    "s2": {"ibm": "80", "prm": "40"},
    "s3": {"ibm": "2zeta", "prm": "zeta"},
    "s4": {"ibm": "80", "prm": "40"},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="imsindex", description="Similarity index of interference models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    def common(sp, mc=True):
        sp.add_argument("--config", help="key = value file, or a JSON sidecar of an earlier run")
        sp.add_argument("--scenario", choices=("s1", "s2", "s3", "s4"), help="start from a preset")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="K=V",
                        help="override a config key (repeatable)")
        sp.add_argument("--model", help="model under test: phym, ibm[:r], prm[:r], tim:eps")
        sp.add_argument("--out", default="results", help="output directory (default: results)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if mc:
            sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
            sp.add_argument("--trials", type=int, help="Monte Carlo realisations")
            sp.add_argument("--threads", type=int, default=1)

    common(sub.add_parser("run", help="one Monte Carlo estimate of the index"))
    sp = sub.add_parser("sweep", help="Monte Carlo estimates over one parameter")
    common(sp)
    sp.add_argument("--param", required=True, help=f"one of {', '.join(engine.SWEEPABLE)}")
    sp.add_argument("--values", required=True, help="comma list, or start:stop:step (stop inclusive)")
    sp = sub.add_parser("analytic", help="closed-form index (scenarios 1-3)")
    common(sp, mc=False)
    sp.add_argument("--abs-tol", type=float, default=analytic.DEFAULT_QUAD.abs_tol)
    sp.add_argument("--rel-tol", type=float, default=analytic.DEFAULT_QUAD.rel_tol)
    sp.add_argument("--max-subdivisions", type=int, default=analytic.DEFAULT_QUAD.max_subdivisions)
    sp.add_argument("--quad", choices=("adaptive", "laguerre"), default=analytic.DEFAULT_QUAD.method)
    sp = sub.add_parser("fit-c0", help="fit the deterministic channel constant")
    common(sp)
    sp.add_argument("--scope", choices=("interferers", "signal", "all"), default="interferers")
    sp = sub.add_parser("reproduce", help="data behind a figure or table")
    sp.add_argument("target", choices=TARGETS)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default="results")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_parser("selfcheck", help="fast invariant checks (under a minute)")
    return p


# --------------------------------------------------------------- config setup

def _load_config(path: str, overrides: dict) -> ScenarioConfig:
    if path.endswith(".json"):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        values = dict(data.get("config", data))
        values.update(overrides)
        return preset(values.pop("scenario", "s1"), **values)
    try:
        return load(path, overrides)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _resolve_model(cfg: ScenarioConfig, text: str) -> str:
    text = text.strip().lower()
    if ":" in text or text in ("phym",):
        return text
    current = cfg.x_model.partition(":")[0]
    if text == current:
        return cfg.x_model
    radius = DEFAULT_RADII[cfg.scenario].get(text)
    if radius is None:
        raise ConfigError(f"model {text!r} needs a parameter, e.g. {text}:1e-13")
    return f"{text}:{radius}"


def make_config(args) -> ScenarioConfig:
    overrides = parse_overrides(args.overrides)
    if args.config:
        cfg = _load_config(args.config, {})
        if args.scenario and args.scenario != cfg.scenario:
            raise ConfigError("--scenario disagrees with the scenario in --config")
    else:
        cfg = preset(args.scenario or "s1")
    if args.model:
        cfg = cfg.with_(x_model=_resolve_model(cfg, args.model))
    cfg = apply(cfg, overrides)
    for flag in ("seed", "trials"):
        if getattr(args, flag, None) is not None:
            cfg = cfg.with_(**{flag: getattr(args, flag)})
    if getattr(args, "threads", 1) < 1:
        raise ConfigError("--threads must be >= 1")
    return cfg


def _parse_values(text: str) -> list[float]:
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --values {text!r}") from None


# ------------------------------------------------------------------- output

def _write(out: str, verb: str, fmt: str, table: Table) -> Path:
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"{verb}-{datetime.now().strftime('%Y%m%dT%H%M%S')}"
    base, k = stem, 1
    while (directory / f"{base}.csv").exists() or (directory / f"{base}.json").exists():
        k += 1
        base = f"{stem}-{k}"
    meta = {"version": __version__, "verb": verb, **table.meta}
    if fmt == "csv":
        data = directory / f"{base}.csv"
        data.write_text(table.to_csv())
        (directory / f"{base}.json").write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    else:
        data = directory / f"{base}.json"
        body = {"meta": meta, "columns": table.columns,
                "rows": [{k: r.get(k) for k in table.columns} for r in table.rows]}
        data.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n")
    return data


def _report_table(verb: str, reports: list[engine.RunReport], cfg: ScenarioConfig, extra_cols=(),
                  extra=None) -> Table:
    rows = []
    for i, rep in enumerate(reports):
        row = rep.row()
        row["truncation_radius"] = rep.truncation_radius
        row.update((extra or [{}] * len(reports))[i])
        rows.append(row)
    columns = list(extra_cols) + [k for k in rows[0] if k not in extra_cols]
    return Table(verb, columns, rows, {"config": cfg})


def _summary(rep: engine.RunReport) -> str:
    return rep.summary()


# ------------------------------------------------------------------- verbs

def cmd_run(args) -> int:
    cfg = make_config(args)
    rep = engine.run_models(cfg, threads=args.threads)[0]
    path = _write(args.out, "run", args.format, _report_table("run", [rep], cfg))
    print(_summary(rep))
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = make_config(args)
    values = _parse_values(args.values)
    if not values:
        raise ConfigError("--values is empty")
    reports = engine.sweep(cfg, args.param, values, threads=args.threads)
    table = _report_table("sweep", reports, cfg, extra_cols=(args.param,),
                          extra=[{args.param: v} for v in values])
    table.meta.update(param=args.param, values=values)
    path = _write(args.out, "sweep", args.format, table)
    for v, rep in zip(values, reports):
        print(f"{args.param}={v:g}: {_summary(rep)}")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_analytic(args) -> int:
    cfg = make_config(args)
    m = cfg.x_spec
    if cfg.scenario == "s4":
        raise ConfigError("scenario 4 has no closed form; use run")
    from .montecarlo.config import to_scenario2
    from .montecarlo.reproduce import _s1_params
    if cfg.scenario == "s3":
        if m.kind not in ("prm", "ibm"):
            raise ConfigError("scenario 3 bounds exist for prm and ibm only")
        p2 = to_scenario2(cfg, m)
        zeta, r_max = analytic.zeta_threshold(p2)
        lo, hi = (analytic.s3_prm_index_bounds(p2) if m.kind == "prm"
                  else analytic.s3_ibm_index_bounds(p2, m.radius))
        row = {"model": m.label(), "S_lower": lo, "S_upper": hi, "zeta": zeta, "r_zero_fa": r_max}
        table = Table("analytic", list(row), [row], {"config": cfg})
        line = f"{m.label()}: {lo:.6f} <= S <= {hi:.6f} (zero false alarms for r_prm <= {r_max:.4f} m)"
    else:
        if m.kind == "tim":
            raise ConfigError("no closed form for tim; use run")
        try:
            quad = analytic.QuadratureSpec(abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                                           max_subdivisions=args.max_subdivisions, method=args.quad)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        comp = (analytic.s1_index(m.kind, _s1_params(cfg, m), quad) if cfg.scenario == "s1"
                else analytic.s2_index(m.kind, to_scenario2(cfg, m), quad))
        row = {"model": m.label(), "S": comp.result.value,
               "p_fa": comp.p_fa, "p_md": comp.p_md, "xi": comp.xi,
               "p_out_x": comp.p_out_x, "p_out_y": comp.p_out_y}
        table = Table("analytic", list(row), [row], {"config": cfg, "quadrature": {
            "abs_tol": quad.abs_tol, "rel_tol": quad.rel_tol, "max_subdivisions": quad.max_subdivisions,
            "method": quad.method}})
        line = (f"{m.label()} vs phym (analytic): S={comp.result.value:.6f} "
                f"p_fa={comp.p_fa:.6f} p_md={comp.p_md:.6f} xi={comp.xi:.6f}")
    path = _write(args.out, "analytic", args.format, table)
    print(line)
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_fit_c0(args) -> int:
    cfg = make_config(args)
    fit = engine.fit_c0(cfg, scope=args.scope, threads=args.threads)
    row = {"c0": fit.c0, "accuracy": fit.mean_index, "throughput_dev_pct": fit.throughput_dev,
           "rho": fit.rho, "bhattacharyya_distance": fit.bhattacharyya_distance,
           **{f"S_at_{b:g}dB": v for b, v in fit.indices.items()}}
    table = Table("fit-c0", list(row), [row], {"config": cfg, "scope": args.scope})
    path = _write(args.out, "fit-c0", args.format, table)
    print(f"c0={fit.c0:.6f} mean S={fit.mean_index:.6f} rho={fit.rho:.6f} "
          f"throughput deviation={fit.throughput_dev:.4f}%")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.trials < 1 or args.threads < 1 or not 0 <= args.seed < 2**64:
        raise ConfigError("--trials and --threads must be >= 1 and --seed an unsigned 64-bit integer")
    table = reproduce(args.target, trials=args.trials, seed=args.seed, threads=args.threads)
    path = _write(args.out, "reproduce", args.format, table)
    print(f"{args.target}: {len(table.rows)} rows, trials={args.trials} seed={args.seed}")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- selfcheck

DISTANCE_EXAMPLE = {"X": (0.05, 0.25, 0.7), "Y": (0.1, 0.45, 0.45), "Z": (0.25, 0.2, 0.55)}
DISTANCE_EXAMPLE_EXPECTED = {  # distances of Y and Z from X
    "euclidean": (0.324, 0.255), "bhattacharyya": (0.033, 0.045), "kl": (0.059, 0.098)}
GAMMA_SPOTS = ((0.5, 1.0, 0.27880558528066196), (-0.5, 1.0, 0.1781477117815607),
               (0.0, 1.0, 0.21938393439552029), (2.0, 3.0, 0.19914827347145578))


def distance_example_table() -> dict[str, tuple[float, float]]:
    x = np.array(DISTANCE_EXAMPLE["X"])
    out = {}
    for name, fn in (("euclidean", similarity.euclidean_distance),
                     ("bhattacharyya", lambda a, b: similarity.bhattacharyya(a, b)[1]),
                     ("kl", similarity.kl_divergence)):
        out[name] = tuple(fn(x, np.array(DISTANCE_EXAMPLE[k])) for k in ("Y", "Z"))
    return out


def _check_antenna():
    worst = 0.0
    for theta in np.linspace(0.05, 2 * np.pi, 40):
        for z in np.linspace(0.0, 0.99, 25):
            a = SectorAntenna(float(theta), float(z))
            worst = max(worst, abs(theta * a.main_gain + (2 * np.pi - theta) * z - 2 * np.pi))
            if not a.main_gain >= 1.0 - 1e-12 >= z - 1e-12:
                return False, f"main gain below 1 at theta={theta:.3f}, z={z:.3f}"
    return worst <= 1e-12, f"max normalisation error {worst:.1e}"


def _check_dominance():
    bad = []
    for scen in ("s1", "s2", "s3", "s4"):
        cfg = preset(scen, trials=1000, seed=7, chunk=1000, x_model="phym")
        models = [ModelSpec.phym(), ModelSpec.ibm(20.0), ModelSpec.ibm(60.0), ModelSpec.ibm(150.0)]
        parts = next(engine.iter_parts(cfg, models))
        g = [parts.gamma_x(m.label()) for m in models]
        # more interferers never raise the SINR
        ok = all(np.all(g[i] >= g[i + 1] * (1 - 1e-12)) for i in range(1, len(g) - 1))
        ok &= bool(np.all(g[0] <= g[-1] * (1 + 1e-12)))
        if not ok:
            bad.append(scen)
    return not bad, "1000 topologies per scenario" + (f"; violated in {bad}" if bad else "")


def _check_gamma():
    worst = 0.0
    for s, x, ref in GAMMA_SPOTS:
        worst = max(worst, abs(analytic.upper_incomplete_gamma(s, x) - ref) / ref)
    return worst < 1e-9, f"max relative error {worst:.1e}"


def _check_distance_example():
    got = distance_example_table()
    worst = max(abs(g - e) for k in got for g, e in zip(got[k], DISTANCE_EXAMPLE_EXPECTED[k]))
    return worst <= 1e-3, " ".join(f"{k}={got[k][0]:.3f}/{got[k][1]:.3f}" for k in got)


def _check_special():
    # the library gamma must agree with scipy where both are defined
    v = analytic.upper_incomplete_gamma(1.5, 2.0)
    ref = float(special.gammaincc(1.5, 2.0) * special.gamma(1.5))
    return math.isclose(v, ref, rel_tol=1e-12), f"Gamma(1.5, 2) = {v:.10f}"


SELFCHECKS = (("antenna normalisation", _check_antenna), ("dominance", _check_dominance),
              ("incomplete gamma spot values", _check_gamma), ("scipy agreement", _check_special),
              ("distribution distances", _check_distance_example))


def cmd_selfcheck(args) -> int:
    t0 = time.perf_counter()
    failed = 0
    for name, fn in SELFCHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    print(f"selfcheck: {len(SELFCHECKS) - failed}/{len(SELFCHECKS)} passed in "
          f"{time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_CHECK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "analytic": cmd_analytic, "fit-c0": cmd_fit_c0,
            "reproduce": cmd_reproduce, "selfcheck": cmd_selfcheck}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.verb](args)
    except QuadratureError as exc:
        print(f"imsindex: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, NoiseLimitedError, UsageError) as exc:
        print(f"imsindex: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"imsindex: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
