"""Batch experiment harness: t-sweeps for each uniform-estimate proxy,
CSV/JSON/plot-data emission, and pass/fail summaries against declared
tolerances.

Each experiment runs one metric over a decreasing t-list (or a fixed
case list), writes per-t rows, and summarizes with the max/min ratio and
a log-log trend slope.  Tolerances live in the config with documented
defaults (uniformity ratio <= 2, identity checks <= 1e-10, slope fits
within 10/15 percent); the theory guarantees existence of uniform
constants, not their values, so thresholds are explicit and
overridable.  Reruns with equal config and seed produce byte-identical
output files.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conifold_model as cm
from . import spectral_laplace as sl
from . import weight_calculus as wcalc
from . import weighted_calc as wc
from .link_spectra import link_from_string

__all__ = [
    "EXPERIMENTS",
    "DEFAULT_TOLERANCES",
    "ExperimentConfig",
    "SweepResult",
    "run",
    "emit",
    "run_config_file",
    "region_atlas_rows",
]

EXPERIMENTS = (
    "embedding_uniformity",
    "invertibility_uniformity",
    "compact_invertibility",
    "poincare_uniformity",
    "gns_uniformity",
    "neck_convergence",
    "eta_bounds",
    "weight_crossing",
    "region_atlas",
    "norm_identities",
)

DEFAULT_TOLERANCES = {
    "uniformity_ratio": 2.0,
    "trend_slope": 0.1,
    "identity_defect": 1e-10,
    "eta_exponent_first": 0.1,
    "eta_exponent_second": 0.15,
    "constants_sigma": 1e-2,
    "crossing_slack": 0.2,
}

_DEFAULT_T = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run: which metric, on which model, over which sweep."""

    experiment: str
    model: str = "dumbbell"
    t_list: tuple[float, ...] = _DEFAULT_T
    p: float = 2.0
    k: int = 0
    beta: float = -0.5
    e_max: float = 12.0
    n_per_region: int = 400
    r_max: float = 1.0e3
    seed: int = 0
    family_size: int = 32
    tau: float = 0.5
    a: float = 0.4
    b: float = 0.2
    grid_step: float = 0.25
    kind: str = "AC"
    m: int = 3
    link: str = "sphere:2"
    gamma_cases: tuple = ((0.0, 0.0), (1.0, 2.0))
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        ts = tuple(float(t) for t in self.t_list)
        if any(not 0.0 < t < 1.0 for t in ts):
            raise ValueError("t values must lie in (0, 1)")
        if any(t2 >= t1 for t1, t2 in zip(ts, ts[1:])):
            raise ValueError("t_list must be strictly decreasing")
        object.__setattr__(self, "t_list", ts)
        object.__setattr__(self, "gamma_cases",
                           tuple((float(g), float(e)) for g, e in self.gamma_cases))
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances or {})
        if any(v <= 0 for v in tol.values()):
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "tolerances", tol)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        for key in ("t_list", "gamma_cases"):
            if key in d and isinstance(d[key], list):
                d[key] = tuple(tuple(x) if isinstance(x, list) else x for x in d[key]) \
                    if key == "gamma_cases" else tuple(d[key])
        return ExperimentConfig(**d)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment, "model": self.model,
            "t_list": list(self.t_list), "p": self.p, "k": self.k,
            "beta": self.beta, "e_max": self.e_max,
            "n_per_region": self.n_per_region, "r_max": self.r_max,
            "seed": self.seed, "family_size": self.family_size,
            "tau": self.tau, "a": self.a, "b": self.b,
            "grid_step": self.grid_step, "kind": self.kind, "m": self.m,
            "link": self.link, "gamma_cases": [list(c) for c in self.gamma_cases],
            "tolerances": dict(self.tolerances),
        }


@dataclass(frozen=True)
class SweepResult:
    experiment: str
    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    summary: dict
    passed: bool
    seed: int
    config: dict


def _thread_map(fn, items):
    n_threads = int(os.environ.get("CONIFOLD_LAB_THREADS", "1"))
    if n_threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_threads) as ex:
        return list(ex.map(fn, items))


def _fit_slope(xs, ys):
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.maximum(np.asarray(ys, dtype=float), 1e-300))
    xs = xs - xs.mean()
    return float(np.sum(xs * (ys - ys.mean())) / np.sum(xs * xs))


def _family(cfg: ExperimentConfig):
    if cfg.model == "dumbbell":
        return cm.dumbbell_family(beta=cfg.beta, tau=cfg.tau, a=cfg.a, b=cfg.b)
    if cfg.model == "spindle":
        return cm.spindle_family(beta=cfg.beta, tau=cfg.tau, a=cfg.a, b=cfg.b)
    path = Path(cfg.model)
    if path.suffix == ".json" and path.exists():
        family, _ = cm.load_family(path)
        return family
    raise ValueError(f"unknown glued benchmark {cfg.model!r}")


def _base_model(cfg: ExperimentConfig):
    if cfg.model in ("hyperboloid_capped", "exact_cone_cs_ac", "rxs2", "sine_spindle"):
        return cm.preset_model(cfg.model, beta=cfg.beta)
    path = Path(cfg.model)
    if path.exists():
        return cm.load_model(path)
    raise ValueError(f"unknown model {cfg.model!r}")


def _ratio_summary(values, tol_ratio):
    vmax, vmin = max(values), min(values)
    ratio = vmax / vmin if vmin > 0 else math.inf
    return ratio, vmax, vmin


# --- runners ----------------------------------------------------------------


def _run_embedding(cfg: ExperimentConfig) -> SweepResult:
    fam = _family(cfg)
    tol = cfg.tolerances

    def one(t):
        glued = fam.at(t)
        grid = wc.build_grid(glued.geometry, n_per_region=cfg.n_per_region,
                             r_max=cfg.r_max)
        bumps = wc.bump_family(grid, n_members=cfg.family_size, seed=cfg.seed)
        rep = wc.embedding_constant_estimate(bumps, p=cfg.p, beta=cfg.beta)
        return {"t": t, "constant": rep.constant, "p_star": rep.p_star,
                "family_size": len(bumps), "grid_size": grid.n}

    rows = _thread_map(one, list(cfg.t_list))
    consts = [r["constant"] for r in rows]
    ratio, vmax, vmin = _ratio_summary(consts, tol["uniformity_ratio"])
    slope = _fit_slope(cfg.t_list, consts)
    passed = ratio <= tol["uniformity_ratio"] and abs(slope) <= tol["trend_slope"]
    summary = {"max": vmax, "min": vmin, "max_over_min": ratio,
               "trend_slope": slope, "pass": passed}
    return SweepResult("embedding_uniformity",
                       ("t", "constant", "p_star", "family_size", "grid_size"),
                       tuple(rows), summary, passed, cfg.seed, cfg.to_dict())


def _run_invertibility(cfg: ExperimentConfig) -> SweepResult:
    fam = _family(cfg)
    tol = cfg.tolerances

    def one(t):
        rep = sl.invertibility_constant(fam.at(t), beta=cfg.beta, e_max=cfg.e_max,
                                        n_per_region=cfg.n_per_region, r_max=cfg.r_max)
        row = {"model": cfg.model, "t": t, "beta": cfg.beta,
               "constant": rep.constant, "sigma_min": rep.sigma_min,
               "grid_size": rep.grid_size}
        for e, s in rep.per_mode:
            row[f"sigma_e{e:g}"] = s
        return row

    rows = _thread_map(one, list(cfg.t_list))
    consts = [r["constant"] for r in rows]
    ratio, vmax, vmin = _ratio_summary(consts, tol["uniformity_ratio"])
    passed = ratio <= tol["uniformity_ratio"]
    summary = {"max": vmax, "min": vmin, "max_over_min": ratio,
               "trend_slope": _fit_slope(cfg.t_list, consts), "pass": passed}
    return SweepResult("invertibility_uniformity", tuple(rows[0].keys()),
                       tuple(rows), summary, passed, cfg.seed, cfg.to_dict())


def _run_compact(cfg: ExperimentConfig) -> SweepResult:
    # the generic default benchmark is non-compact; this experiment's
    # default is the compact spindle
    name = "spindle" if cfg.model == "dumbbell" else cfg.model
    if name == "spindle":
        fam = cm.spindle_family(beta=cfg.beta, tau=cfg.tau, a=cfg.a, b=cfg.b)
    else:
        fam = _family(ExperimentConfig(**{**cfg.to_dict(), "model": name}))
    tol = cfg.tolerances

    def one(t):
        rep = sl.restricted_invertibility_compact(
            fam, beta=cfg.beta, t=t, e_max=cfg.e_max, n_per_region=cfg.n_per_region)
        return {"model": "spindle", "t": t, "beta": cfg.beta,
                "constant": rep.constant,
                "sigma_constrained": rep.sigma_constrained,
                "sigma_mode0_unconstrained": rep.sigma_mode0_unconstrained,
                "grid_size": rep.grid_size}

    rows = _thread_map(one, list(cfg.t_list))
    consts = [r["constant"] for r in rows]
    ratio, vmax, vmin = _ratio_summary(consts, tol["uniformity_ratio"])
    constants_detected = all(
        r["sigma_mode0_unconstrained"] < tol["constants_sigma"] * r["sigma_constrained"]
        for r in rows)
    passed = ratio <= tol["uniformity_ratio"] and constants_detected
    summary = {"max": vmax, "min": vmin, "max_over_min": ratio,
               "trend_slope": _fit_slope(cfg.t_list, consts),
               "constants_detected": constants_detected, "pass": passed}
    return SweepResult("compact_invertibility", tuple(rows[0].keys()),
                       tuple(rows), summary, passed, cfg.seed, cfg.to_dict())


def _run_poincare(cfg: ExperimentConfig) -> SweepResult:
    fam = _family(cfg)
    tol = cfg.tolerances

    def one(t):
        rep = sl.poincare_constant(fam.at(t), beta=cfg.beta, e_max=cfg.e_max,
                                   n_per_region=cfg.n_per_region, r_max=cfg.r_max)
        return {"model": cfg.model, "t": t, "beta": cfg.beta,
                "constant": rep.constant, "grid_size": rep.grid_size}

    rows = _thread_map(one, list(cfg.t_list))
    consts = [r["constant"] for r in rows]
    ratio, vmax, vmin = _ratio_summary(consts, tol["uniformity_ratio"])
    passed = ratio <= tol["uniformity_ratio"]
    summary = {"max": vmax, "min": vmin, "max_over_min": ratio,
               "trend_slope": _fit_slope(cfg.t_list, consts), "pass": passed}
    return SweepResult("poincare_uniformity", tuple(rows[0].keys()),
                       tuple(rows), summary, passed, cfg.seed, cfg.to_dict())


def _run_gns(cfg: ExperimentConfig) -> SweepResult:
    fam = _family(cfg)
    tol = cfg.tolerances
    ce = wcalc.conjugate_exponents(cfg.p, fam.L.m)
    if ce.p_star is None:
        raise ValueError(f"p = {cfg.p} >= m: no L^p* target")

    def one(t):
        glued = fam.at(t)
        grid = wc.build_grid(glued.geometry, n_per_region=cfg.n_per_region,
                             r_max=cfg.r_max)
        bumps = wc.bump_family(grid, n_members=cfg.family_size, seed=cfg.seed)
        best = 0.0
        for u in bumps:
            num = wc.weighted_sobolev_norm(u, wc.WeightSpec(p=ce.p_star, k=0, beta=cfg.beta))
            den = wc.gradient_norm(u, p=cfg.p, beta=cfg.beta)
            if den > 0:
                best = max(best, num / den)
        return {"t": t, "constant": best, "p_star": ce.p_star, "grid_size": grid.n}

    rows = _thread_map(one, list(cfg.t_list))
    consts = [r["constant"] for r in rows]
    ratio, vmax, vmin = _ratio_summary(consts, tol["uniformity_ratio"])
    passed = ratio <= tol["uniformity_ratio"]
    summary = {"max": vmax, "min": vmin, "max_over_min": ratio,
               "trend_slope": _fit_slope(cfg.t_list, consts), "pass": passed}
    return SweepResult("gns_uniformity", tuple(rows[0].keys()),
                       tuple(rows), summary, passed, cfg.seed, cfg.to_dict())


def _run_neck(cfg: ExperimentConfig) -> SweepResult:
    fam = _family(cfg)
    rows = []
    for t in cfg.t_list:
        for entry in cm.neck_convergence_check(fam, t, j_max=1):
            rows.append({"t": t, "pair": entry["pair"], "j": entry["j"],
                         "sup": entry["sup"]})
    decreasing = True
    pairs = sorted({(r["pair"], r["j"]) for r in rows})
    for pair, j in pairs:
        seq = [r["sup"] for r in rows if r["pair"] == pair and r["j"] == j]
        if any(b >= a for a, b in zip(seq, seq[1:])):
            decreasing = False
    summary = {"strictly_decreasing": decreasing, "pass": decreasing}
    return SweepResult("neck_convergence", ("t", "pair", "j", "sup"),
                       tuple(rows), summary, decreasing, cfg.seed, cfg.to_dict())


def _run_eta(cfg: ExperimentConfig) -> SweepResult:
    tol = cfg.tolerances
    rows = []
    for t in cfg.t_list:
        eta = cm.cutoff_eta(t, cfg.a, cfg.b)
        s = np.linspace(cfg.b, cfg.a, 4001)
        r = t**s
        m1 = float(np.max(np.abs(r * eta.deriv(r, 1))))
        m2 = float(np.max(np.abs(r * r * eta.deriv(r, 2))))
        rows.append({"t": t, "max_r_eta1": m1, "max_r2_eta2": m2,
                     "inv_log_t": 1.0 / abs(math.log(t))})
    x = [r["inv_log_t"] for r in rows]
    exp1 = _fit_slope(x, [r["max_r_eta1"] for r in rows])
    exp2 = _fit_slope(x, [r["max_r2_eta2"] for r in rows])
    passed = (abs(exp1 - 1.0) <= tol["eta_exponent_first"]
              and abs(exp2 - 1.0) <= tol["eta_exponent_second"])
    summary = {"exponent_first": exp1, "exponent_second": exp2, "pass": passed}
    return SweepResult("eta_bounds", ("t", "max_r_eta1", "max_r2_eta2", "inv_log_t"),
                       tuple(rows), summary, passed, cfg.seed, cfg.to_dict())


def _run_crossing(cfg: ExperimentConfig) -> SweepResult:
    model = _base_model(cfg if cfg.model != "dumbbell"
                        else ExperimentConfig(**{**cfg.to_dict(), "model": "hyperboloid_capped"}))
    tol = cfg.tolerances
    rows = []
    ok = True
    for gamma, e in cfg.gamma_cases:
        rep = sl.weight_crossing_kernel(model, gamma=float(gamma), e=float(e),
                                        slack=tol["crossing_slack"],
                                        n_per_region=cfg.n_per_region, r_max=cfg.r_max)
        slope_ok = rep.tail_slope is None or rep.tail_slope <= rep.slope_bound
        resid_ok = rep.residual_sigma < rep.threshold
        ok = ok and slope_ok and resid_ok
        rows.append({"gamma": gamma, "e": e,
                     "tail_slope": rep.tail_slope if rep.tail_slope is not None else "floor",
                     "slope_bound": rep.slope_bound,
                     "residual_sigma": rep.residual_sigma,
                     "threshold": rep.threshold,
                     "pass": slope_ok and resid_ok})
    summary = {"pass": ok}
    return SweepResult("weight_crossing",
                       ("gamma", "e", "tail_slope", "slope_bound",
                        "residual_sigma", "threshold", "pass"),
                       tuple(rows), summary, ok, cfg.seed, cfg.to_dict())


def region_atlas_rows(kind: str, m: int, link_spec: str, step: float,
                      lo: float | None = None, hi: float | None = None):
    """Classification grid replicating the qualitative content of the
    harmonic-function region figures: one row per weight cell."""
    link = link_from_string(link_spec)
    lo = lo if lo is not None else (2.0 - m) - 1.5
    hi = hi if hi is not None else 1.5
    vals = np.arange(lo, hi + step / 2, step)
    if kind == "AC":
        ends = [wcalc.EndDescriptor("AC", link), wcalc.EndDescriptor("AC", link)]
    elif kind == "CS":
        ends = [wcalc.EndDescriptor("CS", link), wcalc.EndDescriptor("CS", link)]
    elif kind == "CSAC":
        ends = [wcalc.EndDescriptor("CS", link), wcalc.EndDescriptor("AC", link)]
    else:
        raise ValueError(f"unknown region kind {kind!r}")

    def show(v):
        return "" if v is None else (int(v) if isinstance(v, (bool, int)) else v)

    rows = []
    for b1 in vals:
        for b2 in vals:
            try:
                facts = wcalc.classify_weight_region(
                    kind, ends, wcalc.WeightVector((float(b1), float(b2))), m)
            except wcalc.ExceptionalWeightError:
                rows.append({"beta1": float(b1), "beta2": float(b2),
                             "exceptional": 1, "injective": "", "surjective": "",
                             "index": "", "kernel_dim": ""})
                continue
            rows.append({"beta1": float(b1), "beta2": float(b2), "exceptional": 0,
                         "injective": show(facts.injective),
                         "surjective": show(facts.surjective),
                         "index": show(facts.index),
                         "kernel_dim": show(facts.kernel_dim)})
    return rows


def _run_region_atlas(cfg: ExperimentConfig) -> SweepResult:
    rows = region_atlas_rows(cfg.kind, cfg.m, cfg.link, cfg.grid_step)
    # consistency: where surjectivity and index are both known, kernel = index
    ok = True
    for r in rows:
        if r["exceptional"]:
            continue
        if r["surjective"] == 1 and r["index"] != "" and r["kernel_dim"] != "":
            ok = ok and (r["kernel_dim"] == r["index"] or r["injective"] == 1)
    summary = {"cells": len(rows), "consistent": ok, "pass": ok}
    return SweepResult("region_atlas",
                       ("beta1", "beta2", "exceptional", "injective",
                        "surjective", "index", "kernel_dim"),
                       tuple(rows), summary, ok, cfg.seed, cfg.to_dict())


def _run_norm_identities(cfg: ExperimentConfig) -> SweepResult:
    tol = cfg.tolerances
    rows = []
    cone = cm.preset_model("exact_cone_cs_ac", beta=cfg.beta)
    grid = wc.build_grid(cone.geometry(0), n_per_region=cfg.n_per_region,
                         r_max=cfg.r_max)
    rng = np.random.default_rng(cfg.seed)
    bumps = wc.bump_family(grid, n_members=4, seed=cfg.seed)
    cases = []
    for i, u in enumerate(bumps):
        t = float(10.0 ** (-rng.uniform(0.3, 2.0)))
        cases.append((f"scaled_{i}", u, wc.WeightSpec(p=2.0, k=min(i, 2) % 3, beta=0.0), t))
        cases.append((f"weighted_{i}", u,
                      wc.WeightSpec(p=2.0, k=(i + 1) % 3, beta=cfg.beta), t))
    # variable per-end weights need the constant reference-weight correction
    from .link_spectra import make_link
    link = make_link("sphere", dim=2)
    var = cm.ConifoldModel(3, (cm.Component(
        link=link, warp=cm.warp_preset("exact_cone"),
        left=cm.EndSpec("CS", link, nu=1.0, beta=cfg.beta, boundary=2.0),
        right=cm.EndSpec("AC", link, nu=-1.0, beta=cfg.beta + 1.0, boundary=2.0),
    ),))
    vgrid = wc.build_grid(var.geometry(0), n_per_region=cfg.n_per_region,
                          r_max=cfg.r_max)
    vbumps = wc.bump_family(vgrid, n_members=2, modes=(0.0,), seed=cfg.seed + 1)
    for i, u in enumerate(vbumps):
        t = float(10.0 ** (-rng.uniform(0.5, 1.5)))
        cases.append((f"variable_{i}", u,
                      wc.WeightSpec(p=2.0, k=1, beta=None, beta_prime=cfg.beta), t))
    ok = True
    for name, u, spec, t in cases[:10]:
        defect = wc.rescaling_invariance_check(u, spec, t)
        good = defect <= tol["identity_defect"]
        ok = ok and good
        rows.append({"case": name, "t": t, "k": spec.k,
                     "beta": "per-end" if spec.beta is None else spec.beta,
                     "defect": defect, "pass": int(good)})
    pairs = wc.random_bump_pairs(grid, 100, seed=cfg.seed)
    violations = 0
    for u, v in pairs:
        rep = wc.holder_check(u, v, p=cfg.p, beta1=cfg.beta, beta2=0.25)
        violations += int(rep.violated)
    rows.append({"case": "holder_sweep", "t": 0.0, "k": 0, "beta": cfg.beta,
                 "defect": float(violations), "pass": int(violations == 0)})
    ok = ok and violations == 0
    summary = {"holder_violations": violations, "pass": ok}
    return SweepResult("norm_identities",
                       ("case", "t", "k", "beta", "defect", "pass"),
                       tuple(rows), summary, ok, cfg.seed, cfg.to_dict())


_RUNNERS = {
    "embedding_uniformity": _run_embedding,
    "invertibility_uniformity": _run_invertibility,
    "compact_invertibility": _run_compact,
    "poincare_uniformity": _run_poincare,
    "gns_uniformity": _run_gns,
    "neck_convergence": _run_neck,
    "eta_bounds": _run_eta,
    "weight_crossing": _run_crossing,
    "region_atlas": _run_region_atlas,
    "norm_identities": _run_norm_identities,
}


def run(config: ExperimentConfig) -> SweepResult:
    """Dispatch one experiment; deterministic given the config and seed."""
    try:
        return _RUNNERS[config.experiment](config)
    except Exception as exc:
        raise type(exc)(f"[{config.experiment}] {exc}") from exc


# --- emission ----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(result: SweepResult, formats=("csv", "json"), out_dir=".") -> list[Path]:
    """Write the result in the requested formats.

    csv:      fixed documented column order, one row per sweep entry.
    json:     {experiment, seed, summary, columns, rows, config}.
    plotdata: one two-column whitespace file per metric column, suitable
              for any plotting tool.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    base = result.experiment
    if "csv" in formats:
        path = out / f"{base}.csv"
        lines = [",".join(result.columns)]
        for row in result.rows:
            lines.append(",".join(_fmt(row.get(c, "")) for c in result.columns))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    if "json" in formats:
        path = out / f"{base}.json"
        payload = {
            "experiment": result.experiment,
            "seed": result.seed,
            "passed": result.passed,
            "summary": result.summary,
            "columns": list(result.columns),
            "rows": [dict(r) for r in result.rows],
            "config": result.config,
        }
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                        encoding="utf-8")
        written.append(path)
    if "plotdata" in formats:
        xcol = result.columns[0]
        for col in result.columns[1:]:
            vals = [(row.get(xcol), row.get(col)) for row in result.rows
                    if isinstance(row.get(col), (int, float))]
            if not vals:
                continue
            path = out / f"{base}_{col}.dat"
            path.write_text(
                "\n".join(f"{_fmt(x)} {_fmt(y)}" for x, y in vals) + "\n",
                encoding="utf-8")
            written.append(path)
    return written


def run_config_file(path, formats=("csv", "json"), out_dir=".") -> tuple[int, list[SweepResult]]:
    """Run every experiment in a JSON config file (a single config object
    or a list under 'experiments').  Returns (exit_code, results); the
    exit code is 0 iff every configured tolerance passes."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = raw["experiments"] if isinstance(raw, dict) and "experiments" in raw else [raw]
    results = []
    failures = []
    for entry in entries:
        cfg = ExperimentConfig.from_dict(entry)
        res = run(cfg)
        emit(res, formats=formats, out_dir=out_dir)
        results.append(res)
        if not res.passed:
            failures.append(cfg.experiment)
    return (0 if not failures else 1), results
