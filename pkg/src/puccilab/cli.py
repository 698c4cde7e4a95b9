"""Command line runner: parse a JSON config, dispatch, persist results.

Configs are strict: every key must be known, every section must belong to
the requested command, and validation failures name the dotted path of the
offending key.  Runs write ``manifest.json`` (config echo, verdicts,
timings), ``summary.json`` (data, no timings), and RFC-4180 CSV series;
every output embeds the config hash, so reruns of the same config are
bit-identical apart from the manifest timing fields.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import eigensolver as es
from . import robust, simulate
from .errors import ConfigError, InputError, PucciLabError
from .fields import (
    Ball,
    BoundFields,
    CovarianceField,
    FullLine,
    HalfLine,
    Interval,
    ScalarField,
    make_grid,
    sample_covariance,
    validate_covariance,
)

ARTIFACT_VERSION = "0.1.0"

COMMANDS = ("eig-linear", "eig-pucci", "minmax", "exhaust", "select",
            "simulate", "saddle")

_SECTIONS = {
    "eig-linear": {"domain", "grid", "covariance", "bounds", "solver"},
    "eig-pucci": {"domain", "grid", "bounds", "solver"},
    "minmax": {"domain", "grid", "bounds", "solver", "sampler", "selection"},
    "exhaust": {"domain", "bounds", "exhaustion", "solver"},
    "select": {"domain", "grid", "bounds", "solver", "selection"},
    "simulate": {"domain", "grid", "bounds", "covariance", "solver", "simulation"},
    "saddle": {"domain", "grid", "bounds", "solver", "simulation", "saddle"},
}
_REQUIRED = {
    "eig-linear": {"domain", "grid", "covariance"},
    "eig-pucci": {"domain", "grid", "bounds"},
    "minmax": {"domain", "grid", "bounds", "sampler", "selection"},
    "exhaust": {"domain", "bounds", "exhaustion"},
    "select": {"domain", "grid", "bounds", "selection"},
    "simulate": {"domain", "grid", "bounds", "covariance", "simulation"},
    "saddle": {"domain", "grid", "bounds", "simulation"},
}


# ---------------------------------------------------------------------------
# strict config parsing


def _check_keys(d, allowed, path):
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key,
                              f"unknown key (expected one of {sorted(allowed)})")


def _need(d, key, path, types=None):
    if key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
    value = d[key]
    if types is not None and not isinstance(value, types):
        raise ConfigError(f"{path}.{key}" if path else key,
                          f"expected {types}, got {type(value).__name__}")
    return value


def _opt(d, key, default, path, types=None):
    if key not in d:
        return default
    return _need(d, key, path, types)


def _build_domain(spec, path, allow_unbounded=False):
    _need(spec, "kind", path, str)
    kind = spec["kind"]
    if kind == "interval":
        _check_keys(spec, {"kind", "a", "b"}, path)
        try:
            return Interval(float(_need(spec, "a", path, (int, float))),
                            float(_need(spec, "b", path, (int, float))))
        except InputError as exc:
            raise ConfigError(path, str(exc)) from exc
    if kind == "ball":
        _check_keys(spec, {"kind", "dim", "radius", "center"}, path)
        center = _opt(spec, "center", None, path, list)
        try:
            return Ball(int(_need(spec, "dim", path, int)),
                        float(_need(spec, "radius", path, (int, float))),
                        tuple(center) if center is not None else None)
        except InputError as exc:
            raise ConfigError(path, str(exc)) from exc
    if allow_unbounded and kind == "half_line":
        _check_keys(spec, {"kind", "a"}, path)
        return HalfLine(float(_need(spec, "a", path, (int, float))))
    if allow_unbounded and kind == "line":
        _check_keys(spec, {"kind"}, path)
        return FullLine()
    raise ConfigError(f"{path}.kind", f"unknown domain kind '{kind}'")


def _build_field(spec, path):
    _need(spec, "kind", path, str)
    kind = spec["kind"]
    if kind == "constant":
        _check_keys(spec, {"kind", "value"}, path)
        return ScalarField.constant(float(_need(spec, "value", path, (int, float))))
    if kind == "profile":
        _check_keys(spec, {"kind", "name", "params"}, path)
        params = _need(spec, "params", path, dict)
        try:
            return ScalarField.profile(_need(spec, "name", path, str),
                                       **{k: float(v) for k, v in params.items()})
        except InputError as exc:
            raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown field kind '{kind}'")


def _build_bounds(spec, domain, grid, path):
    _check_keys(spec, {"theta", "Theta"}, path)
    theta = _build_field(_need(spec, "theta", path, dict), f"{path}.theta")
    Theta = _build_field(_need(spec, "Theta", path, dict), f"{path}.Theta")
    bounds = BoundFields(domain, theta, Theta)
    if grid is not None:
        try:
            bounds.validate_on(grid)
        except InputError as exc:
            raise ConfigError(f"{path}.theta", str(exc)) from exc
    return bounds


def _build_covariance(spec, bounds, grid, path):
    _need(spec, "kind", path, str)
    kind = spec["kind"]
    if kind in ("constant", "profile"):
        f = _build_field(spec, path)
        if isinstance(grid.domain, Interval):
            return CovarianceField.scalar(f)
        return CovarianceField.radial(f, f)
    if kind in ("theta", "Theta"):
        _check_keys(spec, {"kind"}, path)
        if bounds is None:
            raise ConfigError(path, f"covariance '{kind}' needs a bounds section")
        return simulate._envelope_field(bounds, kind, grid)
    if kind == "sampled":
        _check_keys(spec, {"kind", "family", "seed"}, path)
        if bounds is None:
            raise ConfigError(path, "sampled covariance needs a bounds section")
        return sample_covariance(bounds, grid, _need(spec, "family", path, str),
                                 int(_need(spec, "seed", path, int)))
    raise ConfigError(f"{path}.kind", f"unknown covariance kind '{kind}'")


def _build_solver(spec, grid_n, path):
    if spec is None:
        return es.SolverConfig(n=grid_n)
    _check_keys(spec, {"lambda_tol", "inner_tol", "max_outer", "max_inner",
                       "residual_factor", "x0"}, path)
    try:
        return es.SolverConfig(
            n=grid_n,
            lam_tol=float(_opt(spec, "lambda_tol", 1e-9, path, (int, float))),
            inner_tol=float(_opt(spec, "inner_tol", 1e-12, path, (int, float))),
            max_outer=int(_opt(spec, "max_outer", 500, path, int)),
            max_inner=int(_opt(spec, "max_inner", 60, path, int)),
            residual_factor=float(_opt(spec, "residual_factor", 1e-8, path, (int, float))),
            x0=_opt(spec, "x0", None, path, (int, float)),
        )
    except InputError as exc:
        raise ConfigError(path, str(exc)) from exc


@dataclass(eq=False)
class RunConfig:
    command: str
    seed: int
    raw: dict
    out_dir: Path
    domain: object = None
    grid: object = None
    bounds: object = None
    solver: object = None
    covariance_spec: dict = None
    sampler: dict = None
    selection: dict = None
    exhaustion: dict = None
    simulation: dict = None
    saddle: dict = None


def parse_config(text, command=None):
    """Parse and validate a JSON config document into a RunConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")
    top_allowed = {"command", "seed", "domain", "bounds", "grid", "solver",
                   "covariance", "sampler", "selection", "exhaustion",
                   "simulation", "saddle", "output"}
    _check_keys(doc, top_allowed, "")

    cmd = _opt(doc, "command", command, "", str)
    if cmd is None:
        raise ConfigError("command", "missing required key")
    if cmd not in COMMANDS:
        raise ConfigError("command", f"unknown command '{cmd}' (have {COMMANDS})")
    if command is not None and cmd != command:
        raise ConfigError("command", f"config says '{cmd}' but '{command}' was requested")

    for section in ("domain", "bounds", "grid", "solver", "covariance", "sampler",
                    "selection", "exhaustion", "simulation", "saddle"):
        if section in doc and section not in _SECTIONS[cmd]:
            raise ConfigError(section, f"section not used by command '{cmd}'")
    for section in _REQUIRED[cmd]:
        if section not in doc:
            raise ConfigError(section, f"section required by command '{cmd}'")

    seed = int(_opt(doc, "seed", 0, "", int))
    output = _opt(doc, "output", {}, "", dict)
    _check_keys(output, {"dir"}, "output")
    out_dir = Path(_opt(output, "dir", "runs/latest", "output", str))

    cfg = RunConfig(cmd, seed, doc, out_dir)

    unbounded_ok = cmd == "exhaust"
    cfg.domain = _build_domain(_need(doc, "domain", "", dict), "domain",
                               allow_unbounded=unbounded_ok)

    if "grid" in doc:
        gspec = doc["grid"]
        _check_keys(gspec, {"n"}, "grid")
        try:
            cfg.grid = make_grid(cfg.domain, int(_need(gspec, "n", "grid", int)))
        except InputError as exc:
            raise ConfigError("grid.n", str(exc)) from exc

    if "bounds" in doc:
        cfg.bounds = _build_bounds(doc["bounds"], cfg.domain, cfg.grid, "bounds")

    grid_n = cfg.grid.n if cfg.grid is not None else 2000
    cfg.solver = _build_solver(doc.get("solver"), grid_n, "solver")

    if "covariance" in doc:
        cfg.covariance_spec = _need(doc, "covariance", "", dict)
        # built lazily in run(); structural validation happens here
        _need(cfg.covariance_spec, "kind", "covariance", str)

    if "sampler" in doc:
        spec = doc["sampler"]
        _check_keys(spec, {"n_samples", "families"}, "sampler")
        families = tuple(_opt(spec, "families",
                              ["constant", "fourier", "piecewise"], "sampler", list))
        n_samples = int(_need(spec, "n_samples", "sampler", int))
        if n_samples < 1:
            raise ConfigError("sampler.n_samples", "must be at least 1")
        cfg.sampler = {"n_samples": n_samples, "families": families}

    if "selection" in doc:
        spec = doc["selection"]
        _check_keys(spec, {"m", "m_list"}, "selection")
        if "m_list" in spec:
            m_list = [int(v) for v in _need(spec, "m_list", "selection", list)]
        elif "m" in spec:
            m_list = [int(_need(spec, "m", "selection", int))]
        else:
            raise ConfigError("selection", "needs 'm' or 'm_list'")
        if any(m < 1 for m in m_list):
            raise ConfigError("selection", "levels must be positive integers")
        cfg.selection = {"m_list": m_list}

    if "exhaustion" in doc:
        spec = doc["exhaustion"]
        _check_keys(spec, {"n_max", "grid_n", "shrink", "known_limit", "limit_tol"},
                    "exhaustion")
        cfg.exhaustion = {
            "n_max": int(_need(spec, "n_max", "exhaustion", int)),
            "grid_n": int(_opt(spec, "grid_n", 1000, "exhaustion", int)),
            "shrink": float(_opt(spec, "shrink", 1.0, "exhaustion", (int, float))),
            "known_limit": _opt(spec, "known_limit", None, "exhaustion", (int, float)),
            "limit_tol": float(_opt(spec, "limit_tol", 0.25, "exhaustion", (int, float))),
        }
        if cfg.exhaustion["n_max"] < 1:
            raise ConfigError("exhaustion.n_max", "must be at least 1")

    if "simulation" in doc:
        spec = doc["simulation"]
        _check_keys(spec, {"dt", "T", "n_paths", "eps_boundary", "drift",
                           "store_stride", "csv_stride", "store_paths",
                           "bound_tol", "window"}, "simulation")
        n_paths = int(_need(spec, "n_paths", "simulation", int))
        if n_paths < 1:
            raise ConfigError("simulation.n_paths", "must be at least 1")
        drift = _opt(spec, "drift", "optimal", "simulation", str)
        if drift not in ("optimal", "none"):
            raise ConfigError("simulation.drift", "must be 'optimal' or 'none'")
        window = _opt(spec, "window", [0.5, 1.0], "simulation", list)
        if len(window) != 2 or not 0.0 <= window[0] < window[1] <= 1.0:
            raise ConfigError("simulation.window", "must be [lo, hi] fractions of T")
        cfg.simulation = {
            "dt": float(_opt(spec, "dt", 1e-3, "simulation", (int, float))),
            "T": float(_opt(spec, "T", 50.0, "simulation", (int, float))),
            "n_paths": n_paths,
            "eps_boundary": float(_opt(spec, "eps_boundary", 1e-6, "simulation", (int, float))),
            "drift": drift,
            "store_stride": int(_opt(spec, "store_stride", 1, "simulation", int)),
            "csv_stride": int(_opt(spec, "csv_stride", 50, "simulation", int)),
            "store_paths": int(_opt(spec, "store_paths", 4, "simulation", int)),
            "bound_tol": float(_opt(spec, "bound_tol", 0.05, "simulation", (int, float))),
            "window": (float(window[0]), float(window[1])),
        }

    if "saddle" in doc:
        spec = doc["saddle"]
        _check_keys(spec, {"kappas", "tol", "n_sampled"}, "saddle")
        cfg.saddle = {
            "kappas": tuple(float(v) for v in _opt(spec, "kappas", [0.5, 1.0], "saddle", list)),
            "tol": float(_opt(spec, "tol", 0.05, "saddle", (int, float))),
            "n_sampled": int(_opt(spec, "n_sampled", 3, "saddle", int)),
        }

    return cfg


# ---------------------------------------------------------------------------
# output helpers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path, header, rows, config_hash):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\r\n")
        fh.write(",".join(header) + "\r\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\r\n")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(raw):
    blob = json.dumps(_jsonable(raw), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# command implementations


def _coord_header(domain):
    return "x" if isinstance(domain, Interval) else "r"


def _eigen_csv(pair, domain):
    header = ["node_index", _coord_header(domain), "eta"]
    n_dirs = 0 if pair.policy is None else pair.policy.shape[1]
    header += [f"policy_dir{j}" for j in range(n_dirs)]
    rows = []
    for i, (s, v) in enumerate(zip(pair.grid.nodes, pair.eta)):
        row = [i, s, v]
        if n_dirs:
            row += [int(pair.policy[i, j]) for j in range(n_dirs)]
        rows.append(row)
    return header, rows


def _eigen_record(pair):
    record = pair.describe()
    record["eta"] = [float(v) for v in pair.eta]
    return record


def _run_eig_linear(cfg):
    c = _build_covariance(cfg.covariance_spec, cfg.bounds, cfg.grid, "covariance")
    pair = es.principal_eig_linear(c, cfg.grid, cfg.solver)
    summary = {"eigenpair": _eigen_record(pair), "covariance": c.describe()}
    verdicts = [("converged", pair.residual <= cfg.solver.residual_factor * abs(pair.lam),
                 f"residual {pair.residual:.3g}"),
                ("positivity", bool(pair.eta.min() > 0.0), "eta > 0 at interior nodes")]
    if cfg.bounds is not None:
        rep = validate_covariance(c, cfg.bounds, cfg.grid)
        summary["admissibility"] = rep.describe()
        verdicts.append(("admissible", rep.passed,
                         f"max spectral violation {rep.max_violation:.3g}"))
    header, rows = _eigen_csv(pair, cfg.domain)
    return summary, [("eigenfunction", header, rows)], verdicts


def _run_eig_pucci(cfg):
    pair = es.principal_eig_pucci(cfg.bounds, cfg.grid, cfg.solver)
    summary = {"eigenpair": _eigen_record(pair), "bounds": cfg.bounds.describe()}
    verdicts = [("converged", pair.residual <= cfg.solver.residual_factor * abs(pair.lam),
                 f"residual {pair.residual:.3g}"),
                ("positivity", bool(pair.eta.min() > 0.0), "eta > 0 at interior nodes")]
    header, rows = _eigen_csv(pair, cfg.domain)
    return summary, [("eigenfunction", header, rows)], verdicts


def _run_minmax(cfg, threads):
    report = robust.verify_minmax(cfg.bounds, cfg.grid, cfg.sampler["n_samples"],
                                  cfg.selection["m_list"], cfg.seed, cfg.solver,
                                  families=cfg.sampler["families"],
                                  n_workers=threads)
    summary = report.describe()
    verdicts = [(name, ok, "") for name, ok in report.verdicts.items()]
    sample_rows = [[s["index"], s["family"], s["seed"], s["lambda"]]
                   for s in report.samples]
    sel_rows = [[s["m"], s["lambda"], s["gap"], s["defect"], s["kappa"]]
                for s in report.selections]
    return summary, [
        ("samples", ["index", "family", "seed", "lambda"], sample_rows),
        ("selection", ["m", "lambda", "gap", "defect", "kappa"], sel_rows),
    ], verdicts


def _run_exhaust(cfg):
    ex = cfg.exhaustion
    report = robust.exhaustion_limit(cfg.domain, cfg.bounds, ex["n_max"],
                                     grid_n=ex["grid_n"], shrink=ex["shrink"],
                                     known_limit=ex["known_limit"])
    summary = report.describe()
    verdicts = [("monotone_nonincreasing", report.monotone, "")]
    if ex["known_limit"] is not None:
        ok = report.limit_gap <= ex["limit_tol"] and report.limit_gap >= -ex["limit_tol"]
        verdicts.append(("limit_within_tolerance", bool(ok),
                         f"gap {report.limit_gap:.4g} vs tol {ex['limit_tol']}"))
    rows = []
    for n, (member, lam) in enumerate(zip(report.members, report.lambdas), start=1):
        if member["kind"] == "interval":
            rows.append([n, member["a"], member["b"], lam])
        else:
            rows.append([n, 0.0, member["radius"], lam])
    return summary, [("sequence", ["n", "a", "b", "lambda"], rows)], verdicts


def _run_select(cfg):
    pair = es.principal_eig_pucci(cfg.bounds, cfg.grid, cfg.solver)
    csvs = []
    summary = {"lambda_star": float(pair.lam), "selections": []}
    verdicts = []
    for m in cfg.selection["m_list"]:
        sel = robust.construct_selection(pair, cfg.bounds, cfg.grid, m)
        lam_m = es.principal_eig_linear(sel.c_smooth, cfg.grid, cfg.solver).lam
        entry = sel.describe()
        entry["lambda"] = float(lam_m)
        entry["gap"] = float(lam_m - pair.lam)
        summary["selections"].append(entry)
        verdicts.append((f"defect_certified_m{m}",
                         sel.sup_defect <= 3.0 / m + sel.allowance,
                         f"defect {sel.sup_defect:.4g} vs 3/m = {3.0 / m:.4g}"))
        raw = sel.c_raw.coefficient_arrays(cfg.grid)
        smooth = sel.c_smooth.coefficient_arrays(cfg.grid)
        header = ["node_index", _coord_header(cfg.domain), "gamma", "Gamma"]
        header += [f"c_raw_{j}" for j in range(len(raw))]
        header += [f"c_smooth_{j}" for j in range(len(smooth))]
        rows = []
        for i, s in enumerate(cfg.grid.nodes):
            row = [i, s, sel.gamma[i], sel.Gamma[i]]
            row += [col[i] for col in raw]
            row += [col[i] for col in smooth]
            rows.append(row)
        csvs.append((f"selection_m{m}", header, rows))
    return summary, csvs, verdicts


def _run_simulate(cfg):
    sim = cfg.simulation
    star = es.principal_eig_pucci(cfg.bounds, cfg.grid, cfg.solver)
    c = _build_covariance(cfg.covariance_spec, cfg.bounds, cfg.grid, "covariance")
    drift = None
    if sim["drift"] == "optimal":
        drift = es.principal_eig_linear(c, cfg.grid, cfg.solver)
    one_d = isinstance(cfg.domain, Interval)
    x0 = star.x0 if one_d else tuple(
        c0 + (star.x0 if j == 0 else 0.0) for j, c0 in enumerate(cfg.domain.center))
    pcfg = simulate.PathConfig(x0=x0, dt=sim["dt"], T=sim["T"], seed=cfg.seed,
                               eps_boundary=sim["eps_boundary"],
                               store_stride=sim["store_stride"])
    records = simulate.simulate_paths(c, drift, pcfg, cfg.domain, sim["n_paths"])
    strategy = simulate.StrategySpec.pi_star()
    worst = math.inf
    rates = []
    stopped = 0
    origin_ok = True
    positive = True
    rows = []
    for rec in records:
        rec = simulate.wealth_path(rec, star.lam, star, strategy)
        ratio = rec.wealth / rec.bound
        worst = min(worst, float(ratio.min()))
        if rec.wealth.min() <= 0.0:
            # the path's growth measurement is aborted, the run is not
            positive = False
        origin_ok = origin_ok and abs(rec.wealth[0] - 1.0) == 0.0 \
            and abs(rec.bound[0] - 1.0) <= 1e-9
        stopped += int(rec.stopped)
        if not rec.stopped and rec.wealth.min() > 0.0:
            t_end = sim["T"]
            rates.append(simulate.growth_rate(
                rec, (sim["window"][0] * t_end, sim["window"][1] * t_end)))
        if rec.path_index < sim["store_paths"]:
            sl = slice(None, None, sim["csv_stride"])
            if one_d:
                for t, xv, vv, bv in zip(rec.times[sl], rec.states[sl],
                                         rec.wealth[sl], rec.bound[sl]):
                    rows.append([rec.path_index, t, xv, vv, bv])
            else:
                for t, xv, vv, bv in zip(rec.times[sl], rec.states[sl],
                                         rec.wealth[sl], rec.bound[sl]):
                    rows.append([rec.path_index, t, *xv, vv, bv])
    rates_arr = np.array(rates) if rates else np.array([float("nan")])
    summary = {
        "lambda_star": float(star.lam),
        "n_paths": sim["n_paths"],
        "n_stopped": stopped,
        "worst_relative_defect": float(worst),
        "mean_growth": float(rates_arr.mean()),
        "sd_growth": float(rates_arr.std()),
        "covariance": c.describe(),
        "drift": sim["drift"],
    }
    verdicts = [
        ("pathwise_bound", worst >= 1.0 - sim["bound_tol"],
         f"worst V/(e^(lambda t) eta) = {worst:.4f}"),
        ("positivity", positive,
         "wealth stayed positive" if positive else "wealth went non-positive"),
        ("origin_equality", origin_ok, "V_0 = 1 = eta(x0)"),
    ]
    state_cols = ["X"] if one_d else [f"X{j}" for j in range(cfg.domain.dim)]
    header = ["path_index", "t", *state_cols, "V", "bound"]
    return summary, [("paths", header, rows)], verdicts


def _run_saddle(cfg):
    sim = cfg.simulation
    sd = cfg.saddle or {"kappas": (0.5, 1.0), "tol": 0.05, "n_sampled": 3}
    scfg = simulate.SaddleConfig(dt=sim["dt"], T=sim["T"], n_paths=sim["n_paths"],
                                 seed=cfg.seed, eps_boundary=sim["eps_boundary"],
                                 kappas=sd["kappas"], tol=sd["tol"],
                                 n_sampled=sd["n_sampled"],
                                 window_frac=sim["window"], solver=cfg.solver)
    report = simulate.minmax_experiment(cfg.bounds, cfg.domain, cfg.grid, scfg)
    summary = report.describe()
    verdicts = [(name, ok, "") for name, ok in report.verdicts.items()]
    rows = [[c.scenario, c.strategy, c.n_paths, c.n_stopped, c.n_ruined,
             c.mean_rate, c.sd_rate] for c in report.cells]
    header = ["scenario", "strategy", "n_paths", "n_stopped", "n_ruined",
              "mean_rate", "sd_rate"]
    return summary, [("cells", header, rows)], verdicts


_DISPATCH = {
    "eig-linear": lambda cfg, threads: _run_eig_linear(cfg),
    "eig-pucci": lambda cfg, threads: _run_eig_pucci(cfg),
    "minmax": _run_minmax,
    "exhaust": lambda cfg, threads: _run_exhaust(cfg),
    "select": lambda cfg, threads: _run_select(cfg),
    "simulate": lambda cfg, threads: _run_simulate(cfg),
    "saddle": lambda cfg, threads: _run_saddle(cfg),
}


@dataclass(eq=False)
class RunManifest:
    command: str
    config_hash: str
    verdicts: list = field(default_factory=list)
    error: str = None
    wall_clock_s: float = 0.0
    timings: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.error is None and all(v["passed"] for v in self.verdicts)


def run(config, threads=1):
    """Execute a parsed RunConfig; writes manifest, summary, and CSV files."""
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    chash = config_hash(config.raw)
    manifest = RunManifest(config.command, chash)
    t0 = time.perf_counter()
    summary, csvs = {}, []
    try:
        summary, csvs, verdicts = _DISPATCH[config.command](config, threads)
        manifest.verdicts = [
            {"name": name, "passed": bool(ok), "detail": detail}
            for name, ok, detail in verdicts
        ]
    except PucciLabError as exc:
        manifest.error = f"{type(exc).__name__}: {exc}"
        report = getattr(exc, "report", None)
        if report is not None and hasattr(report, "describe"):
            summary = {"partial": report.describe()}
    t_dispatch = time.perf_counter() - t0
    manifest.timings = {config.command: t_dispatch}

    t1 = time.perf_counter()
    summary_doc = {"config_hash": chash, "command": config.command}
    summary_doc.update(summary)
    _write_json(out_dir / "summary.json", summary_doc)
    for name, header, rows in csvs:
        _write_csv(out_dir / f"{name}.csv", header, rows, chash)
    manifest.timings["write_outputs"] = time.perf_counter() - t1
    manifest.wall_clock_s = time.perf_counter() - t0
    manifest_doc = {
        "artifact": {"name": "puccilab", "version": ARTIFACT_VERSION},
        "command": config.command,
        "config": config.raw,
        "config_hash": chash,
        "verdicts": manifest.verdicts,
        "error": manifest.error,
        "wall_clock_s": manifest.wall_clock_s,
        "timings": manifest.timings,
    }
    _write_json(out_dir / "manifest.json", manifest_doc)
    return manifest


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="puccilab",
        description="Extremal-operator eigenvalue lab and robust growth experiments",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on worker threads for independent solves")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text, command=args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        if args.seed < 0:
            print("error: seed must be nonnegative", file=sys.stderr)
            return 2
        cfg.seed = args.seed
        cfg.raw["seed"] = args.seed
    if args.out is not None:
        cfg.out_dir = Path(args.out)

    manifest = run(cfg, threads=max(1, args.threads))
    for v in manifest.verdicts:
        state = "pass" if v["passed"] else "FAIL"
        print(f"[{state}] {v['name']} {v['detail']}".rstrip())
    if manifest.error:
        print(f"error: {manifest.error}", file=sys.stderr)
    return 0 if manifest.passed else 1


if __name__ == "__main__":
    sys.exit(main())
