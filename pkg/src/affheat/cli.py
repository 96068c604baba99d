"""Command-line front end.

Subcommands: verify, table, kernel, caloric, regions, rootsys-info.
Every artifact is deterministic for a fixed config and seed; each CSV is
accompanied by a .meta.json with the resolved configuration and the
formula identifier of every emitted column.

Exit codes: 0 success, 1 check failure, 2 configuration error,
3 numerical-precision abort.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
import time
from fractions import Fraction

import click
import numpy as np

from . import acceptance as acc
from . import caloric as cal
from . import kernel as ker
from . import norms as nrm
from .config import RunConfig, load_config, rational_str
from .errors import (
    AffheatError,
    ConfigError,
    EmptyRegion,
    ExceptionalCaseUnsupported,
    PrecisionLoss,
    ResolutionCapExceeded,
    RoundingFailed,
)
from .rootsys import chi0, eta, n_lambda, poincare, tau_of
from .spectral import build_grid
from .walk import build_kappa, certify_admissible, saddle, sp_delta_p

_PRECISION_ERRORS = (PrecisionLoss, ResolutionCapExceeded, RoundingFailed)


def _die_config(exc: Exception) -> None:
    click.echo(f"config error: {exc}", err=True)
    sys.exit(2)


def _load(config_path: str, out: str | None, threads: int | None,
          precision: str | None, seed: int | None) -> RunConfig:
    overrides = {"out_dir": out, "threads": threads,
                 "precision": precision, "seed": seed}
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        _die_config(exc)


def _write_meta(path: str, cfg: RunConfig, extra: dict) -> None:
    meta = {"config": cfg.resolved(), **extra}
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def _common(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(exists=False), help="JSON run config")(fn)
    fn = click.option("--out", default=None, help="output directory")(fn)
    fn = click.option("--threads", default=None, type=int,
                      help="worker hint (vectorized internally; recorded)")(fn)
    fn = click.option("--precision", default=None,
                      type=click.Choice(["double", "extended"]))(fn)
    fn = click.option("--seed", default=None, type=int)(fn)
    return fn


@click.group()
def main() -> None:
    """Spherical heat-kernel toolkit for regular affine buildings."""


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------


@main.command()
@_common
@click.option("--full", is_flag=True,
              help="run the complete acceptance suite (several minutes)")
@click.option("--checks", default=None,
              help="comma-separated acceptance ids, e.g. C01,C03")
def verify(config_path, out, threads, precision, seed, full, checks) -> None:
    """Run correctness checks; nonzero exit on any failure."""
    cfg = _load(config_path, out, threads, precision, seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    results = []
    try:
        if full or checks:
            ids = set(checks.split(",")) if checks else None
            results = acc.run_all(ids=ids)
        else:
            results = _fast_checks(cfg)
            for res in results:
                click.echo(res.line())
    except ExceptionalCaseUnsupported as exc:
        _die_config(exc)
    except _PRECISION_ERRORS as exc:
        click.echo(f"numerical-precision abort: {exc}", err=True)
        sys.exit(3)
    report = {
        "checks": [
            {"id": r.check_id, "name": r.name, "passed": r.passed,
             "measured": r.measured, "tolerance": r.tolerance,
             "seconds": round(r.seconds, 2)}
            for r in results
        ],
        "config": cfg.resolved(),
        "all_passed": all(r.passed for r in results),
    }
    path = os.path.join(cfg.out_dir, "verify_report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    click.echo(f"report: {path}")
    sys.exit(0 if report["all_passed"] else 1)


def _fast_checks(cfg: RunConfig) -> list[acc.CheckResult]:
    """Per-config smoke suite: grid, transform, saddle, small dual route."""
    rs, q, walk = cfg.root_system(), cfg.qparams(), cfg.walk()
    out = []

    t0 = time.time()
    grid = build_grid(rs, q, cfg.resolution, check_radius=4.0)
    mass_err = abs(float(np.sum(grid.weights)) - 1.0)
    out.append(acc.CheckResult(
        "grid", "Plancherel mass and orthogonality (radius 4)",
        mass_err <= 1e-8 and grid.orthogonality_residual <= 1e-8,
        {"mass_error": mass_err, "orthogonality": grid.orthogonality_residual,
         "resolution": grid.resolution, "rescale": grid.mass_rescale},
        "1e-8", time.time() - t0))

    t0 = time.time()
    km = build_kappa(rs, q, walk)
    ev = eta(rs, q).cart_float()
    base_err = abs(km.kappa_real(ev) * km.rho - 1.0)
    k0_err = abs(km.kappa_real(np.zeros(rs.ambient)) - 1.0)
    out.append(acc.CheckResult(
        "kappa", "transform normalization and eta identity",
        base_err <= 1e-10 and k0_err <= 1e-12,
        {"rho": km.rho, "kappa_eta_rho_minus_1": base_err}, "1e-10",
        time.time() - t0))

    t0 = time.time()
    rng = np.random.default_rng(cfg.seed)
    verts, center = km.hull_vertices, km.hull_vertices.mean(axis=0)
    worst = 0.0
    for _ in range(20):
        w = rng.dirichlet(np.ones(len(verts)))
        dvec = km.basis.T @ (center + 0.8 * (w @ verts - center))
        s, _ = saddle(km, dvec)
        worst = max(worst, float(np.linalg.norm(km.grad_log_kappa(s) - dvec)))
    out.append(acc.CheckResult(
        "saddle", "rate-function maximizers on 20 interior drifts",
        worst <= 1e-12, {"worst_residual": worst}, "1e-12", time.time() - t0))

    t0 = time.time()
    rep = certify_admissible(rs, q, walk, horizon=20)
    out.append(acc.CheckResult(
        "walk", "computed irreducibility and aperiodicity certificates",
        rep.irreducible,
        {"irreducible": rep.irreducible, "aperiodic": rep.aperiodic,
         "period": rep.period}, "irreducible required", time.time() - t0))

    t0 = time.time()
    n_small = 16
    table = ker.build_structure_table(rs, q)
    exact = ker.heat_recursive_profiles(rs, q, walk, n_small, table=table,
                                        exact=True, wanted=[n_small])[n_small]
    lams = sorted(exact.values)
    rf = ker.heat_spectral_series(km, grid, [n_small], lams, rtol=2e-7,
                                  on_imprecise="keep")[0]
    worst_rel = 0.0
    for lam in lams:
        if rf.meta["resolved"][lam]:
            ex = float(exact.values[lam])
            worst_rel = max(worst_rel, abs(rf.values[lam] - ex) / ex)
    mass = sum(n_lambda(rs, q, lam) * v for lam, v in exact.values.items())
    out.append(acc.CheckResult(
        "dual-route", f"kernel routes agree at n={n_small}",
        worst_rel <= 1e-9 and mass == 1,
        {"worst_rel_resolved": worst_rel, "exact_mass_is_one": mass == 1,
         "structure_residual": table.max_residual},
        "1e-9 relative on resolved points; exact stochasticity",
        time.time() - t0))

    t0 = time.time()
    profs = ker.heat_recursive_profiles(rs, q, walk, 60, table=table,
                                        exact=False, wanted=[20, 40, 60])
    worst_l1 = max(abs(nrm.lp_norm(rs, q, profs[n], 1.0) - 1.0)
                   for n in (20, 40, 60))
    out.append(acc.CheckResult(
        "l1", "l1 collapse of the kernel norm", worst_l1 <= 1e-6,
        {"worst_deviation": worst_l1}, "1e-6", time.time() - t0))
    return out


# --------------------------------------------------------------------------
# data-emitting subcommands
# --------------------------------------------------------------------------


@main.command(name="table")
@_common
def table_cmd(config_path, out, threads, precision, seed) -> None:
    """Emit the lp-norm table: p, n, norm, theoretical rate, ratio."""
    cfg = _load(config_path, out, threads, precision, seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    rs, q, walk = cfg.root_system(), cfg.qparams(), cfg.walk()
    try:
        km = build_kappa(rs, q, walk)
        table = ker.build_structure_table(rs, q, resolution=cfg.resolution)
        ns = [n for n in cfg.n_schedule if n >= 2]
        profs = ker.heat_recursive_profiles(rs, q, walk, max(ns), table=table,
                                            exact=False, wanted=ns)
    except _PRECISION_ERRORS as exc:
        click.echo(f"numerical-precision abort: {exc}", err=True)
        sys.exit(3)
    path = os.path.join(cfg.out_dir, "norm_table.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "n", "norm", "theoretical_rate", "ratio"])
        for p in cfg.p_list:
            for n in ns:
                norm = nrm.lp_norm(rs, q, profs[n], p)
                rate = nrm.theoretical_rate(km, p, n)
                w.writerow(["inf" if p == math.inf else p, n, _fmt(norm),
                            _fmt(rate), _fmt(norm / rate)])
    _write_meta(path + ".meta.json", cfg, {
        "columns": {
            "norm": "volume-weighted lp norm of the kernel profile",
            "theoretical_rate": "rate:p<2 | rate:p=2 | rate:p>2 piecewise scale",
            "ratio": "norm / rate; bounded iff the rate is sharp",
        },
        "route": "float convolution recursion (positive sums)",
    })
    click.echo(path)


@main.command(name="kernel")
@_common
def kernel_cmd(config_path, out, threads, precision, seed) -> None:
    """Emit kernel profiles: n, lambda coords, value, sphere volume, route."""
    cfg = _load(config_path, out, threads, precision, seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    rs, q, walk = cfg.root_system(), cfg.qparams(), cfg.walk()
    try:
        km = build_kappa(rs, q, walk)
        table = ker.build_structure_table(rs, q, resolution=cfg.resolution)
        ns = sorted(set(cfg.n_schedule))
        profs = ker.heat_recursive_profiles(rs, q, walk, max(ns) if ns else 0,
                                            table=table, exact=True, wanted=ns)
        spectral = {}
        if cfg.precision == "extended" and rs.rank == 1:
            grid = build_grid(rs, q, cfg.resolution)
            for n in ns:
                lams = sorted(profs[n].values)
                spectral[n] = ker.heat_spectral(km, grid, n, lams,
                                                precision="extended")
    except _PRECISION_ERRORS as exc:
        click.echo(f"numerical-precision abort: {exc}", err=True)
        sys.exit(3)
    path = os.path.join(cfg.out_dir, "kernel.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "lambda_coords", "k_value", "N_lambda", "route"])
        for n in ns:
            for lam in sorted(profs[n].values):
                val = profs[n].values[lam]
                w.writerow([n, " ".join(map(str, lam)), _fmt(float(val)),
                            rational_str(n_lambda(rs, q, lam)), "recursive"])
                if n in spectral:
                    w.writerow([n, " ".join(map(str, lam)),
                                _fmt(spectral[n].values[lam]),
                                rational_str(n_lambda(rs, q, lam)),
                                "spectral-extended"])
    _write_meta(path + ".meta.json", cfg, {
        "columns": {"k_value": "per-vertex transition probability profile"},
    })
    click.echo(path)


@main.command(name="caloric")
@_common
@click.option("--datum", default=None,
              help="initial profile as coords=value pairs, e.g. '2:1.0;0:0.5'")
def caloric_cmd(config_path, out, threads, precision, seed, datum) -> None:
    """Evolve a radial datum and emit convergence errors per p."""
    cfg = _load(config_path, out, threads, precision, seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    rs, q, walk = cfg.root_system(), cfg.qparams(), cfg.walk()
    try:
        f = _parse_datum(rs, datum)
    except ValueError as exc:
        _die_config(exc)
    try:
        km = build_kappa(rs, q, walk)
        table = ker.build_structure_table(rs, q, resolution=cfg.resolution)
        ns = [n for n in cfg.n_schedule if n >= 1]
        k_series = ker.heat_recursive_profiles(rs, q, walk, max(ns), table=table,
                                               exact=False, wanted=ns)
        u_series = {n: cal.evolve(km, f, n, table=table).profile for n in ns}
    except _PRECISION_ERRORS as exc:
        click.echo(f"numerical-precision abort: {exc}", err=True)
        sys.exit(3)
    path = os.path.join(cfg.out_dir, "caloric_errors.csv")
    slopes = {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "n", "err"])
        for p in cfg.p_list:
            mv = cal.mass(km, f, p)
            errs = cal.convergence_error(rs, q, u_series, k_series, mv, p)
            for n, e in sorted(errs.items()):
                w.writerow(["inf" if p == math.inf else p, n, _fmt(e)])
            positive = {n: e for n, e in errs.items() if e > 0}
            key = "inf" if p == math.inf else str(p)
            slopes[key] = (cal.convergence_slope(positive) if len(positive) > 1
                           else None)
            slopes[f"mass_p={key}"] = mv
    summary = os.path.join(cfg.out_dir, "caloric_summary.json")
    with open(summary, "w") as fh:
        json.dump({"fitted_slopes": slopes, "datum": {"".join(map(str, k)): v
                                                      for k, v in f.values.items()},
                   "config": cfg.resolved()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_meta(path + ".meta.json", cfg, {
        "columns": {"err": "||u_n - mass * k_n||_p / ||k_n||_p"}})
    click.echo(path)
    click.echo(summary)


def _parse_datum(rs, datum: str | None) -> ker.RadialFunction:
    if not datum:
        return ker.RadialFunction(values={rs.zero(): 1.0})
    values = {}
    for part in datum.split(";"):
        coords, _, val = part.partition(":")
        lam = tuple(int(c) for c in coords.split(","))
        if len(lam) != rs.rank:
            raise ValueError(f"datum point {coords!r} has wrong rank")
        rs.require_dominant(lam)
        values[lam] = float(val)
    return ker.RadialFunction(values=values)


@main.command(name="regions")
@_common
def regions_cmd(config_path, out, threads, precision, seed) -> None:
    """Enumerate the lp critical regions for the configured schedule."""
    cfg = _load(config_path, out, threads, precision, seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    rs, q, walk = cfg.root_system(), cfg.qparams(), cfg.walk()
    km = build_kappa(rs, q, walk)
    path = os.path.join(cfg.out_dir, "regions.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "n", "size", "lambda_coords"])
        for p in cfg.p_list:
            gamma = cfg.gamma_lt2 if p < 2 else (cfg.gamma_eq2 if p == 2 else None)
            spec = nrm.RegionSpec.create(rs, p, gamma=gamma, r_n_rule=cfg.r_n_rule)
            for n in cfg.n_schedule:
                try:
                    region = nrm.critical_region(spec, km, n)
                except EmptyRegion:
                    w.writerow(["inf" if p == math.inf else p, n, 0, ""])
                    continue
                w.writerow(["inf" if p == math.inf else p, n, len(region),
                            ";".join(" ".join(map(str, lam))
                                     for lam in sorted(region))])
    _write_meta(path + ".meta.json", cfg, {
        "columns": {"lambda_coords": "region:p<2-ball | region:p=2-shell | "
                                     "region:p>2-ball"}})
    click.echo(path)


@main.command(name="rootsys-info")
@_common
def rootsys_info(config_path, out, threads, precision, seed) -> None:
    """Dump the exact root-system and parameter tables for the config."""
    cfg = _load(config_path, out, threads, precision, seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    rs, q = cfg.root_system(), cfg.qparams()
    ev = eta(rs, q)
    info = {
        "family": rs.family,
        "rank": rs.rank,
        "weyl_order": len(rs.weyl),
        "simple_roots": [[rational_str(Fraction(c)) for c in a]
                         for a in rs.simple_roots],
        "positive_roots": [[rational_str(Fraction(c)) for c in a]
                           for a in rs.pos_roots],
        "fundamental_coweights": [[rational_str(Fraction(c)) for c in lam]
                                  for lam in rs.fundamental_coweights],
        "gram": [[rational_str(x) for x in row] for row in rs.gram],
        "marks": list(rs.marks),
        "good_types": sorted(rs.good_types),
        "tau": {str(tuple(float(c) for c in a)): rational_str(tau_of(rs, q, a))
                for a in rs.pos_roots},
        "poincare": rational_str(poincare(rs, q)),
        "eta_pairings_with_coweights": {
            str(i): ev.pair_float(rs, tuple(int(i == j) for j in range(rs.rank)))
            for i in range(rs.rank)},
        "sphere_volumes_radius_4": {
            " ".join(map(str, lam)): rational_str(n_lambda(rs, q, lam))
            for lam in rs.dominant_ball(4.0)},
        "chi0_on_coweights": {
            str(i): rational_str(chi0(rs, q, tuple(int(i == j)
                                                   for j in range(rs.rank))))
            for i in range(rs.rank)},
    }
    path = os.path.join(cfg.out_dir, "rootsys_info.json")
    with open(path, "w") as fh:
        json.dump({"info": info, "config": cfg.resolved()}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    click.echo(path)


if __name__ == "__main__":
    main()
