"""Experiment runner: every module capability as a reproducible subcommand.

Each run reads an optional JSON config plus flag overrides, validates, then
writes one CSV data file and a JSON manifest (full resolved config + seed +
timestamp) under the output directory.  Identical configs produce
byte-identical CSVs.  Exit codes: 0 success, 1 validation error, 2 numeric
certificate failure, 3 I/O error; failures emit a single machine-parsable
JSON line on stderr and leave no partial CSV behind.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import cycles, occupation, spatial, thermo
from .config import (dispersion_from_config, fmt, gaussian_dispersion, load_json,
                     weights_from_config, write_csv, write_manifest)
from .errors import CertificateError, ConfigError, QuadratureError, SizeCapError
from .lattice import auto_lattice, build_lattice
from .weights import WeightSequence

OUTDIR_ENV = "PERMGAS_OUTDIR"


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _parse_grid(text):
    """Comma list '0.1,0.2' or 'lin:a:b:num' linspace syntax."""
    if text.startswith("lin:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"bad grid spec {text!r}")
        return list(np.linspace(float(parts[1]), float(parts[2]), int(parts[3])))
    return [float(t) for t in text.split(",") if t.strip()]


def _parse_pairs(text):
    """'1:1,2:4' -> ((1, 1), (2, 4))."""
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        a, b = item.split(":")
        out.append((int(a), int(b)))
    return tuple(out)


def _add_common(sp):
    sp.add_argument("--config", help="JSON config file; flags override its fields")
    sp.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or '.')")
    sp.add_argument("--prefix", help="output file stem (default: subcommand name)")
    sp.add_argument("--tol", type=float, help="numeric tolerance")
    sp.add_argument("--seed", type=int, help="RNG seed")


def _add_weights(sp):
    sp.add_argument("--alpha", help="explicit head as comma list, e.g. '0.693'")
    sp.add_argument("--tail", choices=["zero", "power", "logdecay"])
    sp.add_argument("--tail-c", type=float)
    sp.add_argument("--tail-p", type=float)
    sp.add_argument("--shift", type=float)


def _add_dispersion(sp):
    sp.add_argument("--dim", type=int, help="spatial dimension d")
    sp.add_argument("--beta", type=float, help="Gaussian dispersion parameter")


def _resolved(args, key, cfg, default=None):
    v = getattr(args, key.replace("-", "_"), None)
    if v is not None:
        return v
    if cfg is not None and key in cfg:
        return cfg[key]
    return default


def _require(val, name):
    if val is None:
        raise ConfigError(f"missing required field {name!r}")
    return val


def _weights_of(args, cfg):
    wcfg = dict((cfg or {}).get("weights", {}))
    if args.alpha is not None:
        wcfg["explicit"] = [float(t) for t in args.alpha.split(",") if t.strip()]
    if args.tail is not None:
        wcfg["tail"] = {"kind": args.tail, "c": args.tail_c or 0.0, "p": args.tail_p or 0.0}
    elif args.tail_c is not None or args.tail_p is not None:
        t = dict(wcfg.get("tail", {"kind": "zero", "c": 0.0, "p": 0.0}))
        if args.tail_c is not None:
            t["c"] = args.tail_c
        if args.tail_p is not None:
            t["p"] = args.tail_p
        wcfg["tail"] = t
    if args.shift is not None:
        wcfg["shift"] = args.shift
    return weights_from_config(wcfg), wcfg


def _dispersion_of(args, cfg):
    dcfg = dict((cfg or {}).get("dispersion", {}))
    if args.beta is not None or "kind" not in dcfg:
        if args.beta is not None:
            dcfg.setdefault("kind", "gaussian")
            dcfg["beta"] = args.beta
    if args.dim is not None:
        dcfg["d"] = args.dim
    if dcfg.get("kind") == "gaussian":
        return gaussian_dispersion(_require(dcfg.get("beta"), "beta"),
                                   _require(dcfg.get("d"), "dim")), dcfg
    if dcfg:
        return dispersion_from_config(dcfg), dcfg
    raise ConfigError("no dispersion given (need --beta/--dim or config)")


def _outpaths(args, default_prefix):
    outdir = args.out or os.environ.get(OUTDIR_ENV) or "."
    prefix = args.prefix or default_prefix
    return (os.path.join(outdir, prefix + ".csv"),
            os.path.join(outdir, prefix + "_manifest.json"))


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (csv_header, csv_rows, manifest_payload)
# ---------------------------------------------------------------------------

def _run_h_series(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    n_max = int(_require(_resolved(args, "n_max", cfg), "n-max"))
    hs = cycles.h_series(w, n_max)
    rows = [(n, hs.values[n]) for n in range(n_max + 1)]
    man = {"command": "h-series", "weights": wcfg, "n_max": n_max,
           "h_inf": hs.h_inf, "B": hs.B, "log_fallback": hs.used_log_fallback}
    return ("n", "h_n"), rows, man


def _run_h_crosscheck(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    n_max = int(_resolved(args, "n_max", cfg, 30))
    gamma = float(_resolved(args, "gamma", cfg, 0.5))
    rep = cycles.h_crosscheck(w, n_max, gamma)
    rows = [
        ("explicit_formula", rep.explicit_abs, rep.explicit_rel, 1),
        ("increment_series", rep.increments_abs, rep.increments_rel, 1),
        ("laplace_identity", rep.laplace_residual, rep.laplace_rel,
         int(rep.laplace_applicable)),
        ("bound_factorial", 0.0, 0.0, int(rep.bound_factorial_ok)),
        ("bound_single_cycle", 0.0, 0.0, int(rep.bound_single_cycle_ok)),
        ("bound_subadditive", 0.0, 0.0,
         -1 if rep.bound_subadditive_ok is None else int(rep.bound_subadditive_ok)),
        ("bound_superadditive", 0.0, 0.0,
         -1 if rep.bound_superadditive_ok is None else int(rep.bound_superadditive_ok)),
    ]
    man = {"command": "h-crosscheck", "weights": wcfg, "n_max": n_max, "gamma": gamma,
           "laplace_bound": rep.laplace_bound}
    return ("identity", "abs_discrepancy", "rel_discrepancy", "ok"), rows, man


def _run_cycle_scan(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    n = int(_require(_resolved(args, "n", cfg), "n"))
    sg = _resolved(args, "s_grid", cfg, "0.25,0.5,0.75")
    s_grid = _parse_grid(sg) if isinstance(sg, str) else list(sg)
    scan = cycles.theorem21_scan(w, n, s_grid)
    rows = [(s, v, abs(v - s)) for s, v in scan.rows]
    man = {"command": "cycle-scan", "weights": wcfg, "n": n, "s_grid": s_grid,
           "summable_hypothesis": scan.summable}
    return ("s", "value", "gap"), rows, man


def _run_rho_c(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    tol = float(_resolved(args, "tol", cfg, 1e-9))
    rc = thermo.critical_density(disp, w, tol)
    man = {"command": "rho-c", "weights": wcfg, "dispersion": dcfg, "tol": tol}
    return ("rho_c", "error_bound"), [(rc, tol)], man


def _run_pressure(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    tol = float(_resolved(args, "tol", cfg, 1e-9))
    grid = _resolved(args, "mu_grid", cfg)
    mu = _parse_grid(grid) if isinstance(grid, str) else list(_require(grid, "mu-grid"))
    rows = [(m, thermo.pressure(disp, w, m, tol), tol) for m in mu]
    man = {"command": "pressure", "weights": wcfg, "dispersion": dcfg,
           "tol": tol, "mu_grid": mu}
    return ("mu", "pressure", "error_bound"), rows, man


def _run_free_energy(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    tol = float(_resolved(args, "tol", cfg, 1e-9))
    grid = _resolved(args, "rho_grid", cfg)
    rho = _parse_grid(grid) if isinstance(grid, str) else list(_require(grid, "rho-grid"))
    rows = [(r, thermo.free_energy(disp, w, r, tol), tol) for r in rho]
    man = {"command": "free-energy", "weights": wcfg, "dispersion": dcfg,
           "tol": tol, "rho_grid": rho}
    return ("rho", "free_energy", "error_bound"), rows, man


def _run_duality_check(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    tol = float(_resolved(args, "tol", cfg, 1e-8))
    c = float(_resolved(args, "shift_c", cfg, 0.7))
    mu = _resolved(args, "mu_grid", cfg, "lin:-3:-0.05:60")
    rho_spec = _resolved(args, "rho_grid", cfg)
    mu_grid = _parse_grid(mu) if isinstance(mu, str) else list(mu)
    if rho_spec is None:
        rc = thermo.critical_density(disp, w, tol)
        if not math.isfinite(rc):
            raise ConfigError("rho grid required when the critical density is infinite")
        rho_grid = list(np.linspace(0.0, 1.5 * rc, 64))
    else:
        rho_grid = _parse_grid(rho_spec) if isinstance(rho_spec, str) else list(rho_spec)
    rep = thermo.duality_and_shift_check(disp, w, mu_grid, rho_grid, c, tol)
    rows = [("p_from_q", rep.p_from_q_residual, rep.p_from_q_bound),
            ("q_biconjugate", rep.q_biconjugate_residual, math.nan),
            ("shift_pressure", rep.shift_p_residual, tol),
            ("shift_free_energy", rep.shift_q_residual, tol)]
    man = {"command": "duality-check", "weights": wcfg, "dispersion": dcfg,
           "tol": tol, "shift_c": c, "mu_grid": mu_grid, "rho_grid": rho_grid}
    return ("check", "residual", "bound"), rows, man


def _lattice_of(args, cfg, disp):
    L = float(_require(_resolved(args, "box", cfg, (cfg or {}).get("L")), "L"))
    delta = float(_resolved(args, "delta_trunc", cfg, 1e-10))
    cut = _resolved(args, "eps_cut", cfg)
    if cut is None:
        return auto_lattice(L, disp.d, disp, delta), L, delta, None
    return build_lattice(L, disp.d, disp, float(cut), delta), L, delta, float(cut)


def _particles_of(args, cfg, volume):
    n = _resolved(args, "n_particles", cfg)
    if n is not None:
        return int(n)
    rho = _require(_resolved(args, "rho", cfg), "n-particles or rho")
    return int(math.floor(float(rho) * volume))


def _run_fourier_exact(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    lat, L, delta, cut = _lattice_of(args, cfg, disp)
    n = _particles_of(args, cfg, lat.volume)
    tables = occupation.partition_dp(lat, w, n)
    marg = tables.marginals()
    rows = []
    for g, (e, mult) in enumerate(zip(lat.group_eps, lat.group_mult)):
        law = marg.group_laws[g]
        for m in range(n + 1):
            rows.append((g, e, int(mult), m, law[m]))
    man = {"command": "fourier-exact", "weights": wcfg, "dispersion": dcfg,
           "L": L, "N": n, "eps_cut": cut if cut is not None else lat.eps_cut,
           "delta_trunc": delta, "certificate": lat.certificate,
           "n_modes": lat.n_modes, "log_Y": tables.log_Y, "Y": tables.Y}
    return ("group", "eps", "multiplicity", "m", "prob"), rows, man


def _run_fourier_scan(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    rho = float(_require(_resolved(args, "rho", cfg), "rho"))
    ll = _resolved(args, "box_list", cfg, (cfg or {}).get("L_list"))
    l_list = _parse_grid(ll) if isinstance(ll, str) else list(_require(ll, "L-list"))
    gamma = float(_resolved(args, "eta_exponent", cfg, 0.5))
    sg = _resolved(args, "s_grid", cfg, "")
    s_grid = _parse_grid(sg) if isinstance(sg, str) and sg else (list(sg) if sg else [])
    delta = float(_resolved(args, "delta_trunc", cfg, 1e-10))
    scan = occupation.macroscopic_scan(disp, w, rho, l_list, gamma, s_grid, delta)
    rows = [(r.L, r.V, r.N, r.kind, r.a, r.b, r.value, r.target) for r in scan.rows]
    man = {"command": "fourier-scan", "weights": wcfg, "dispersion": dcfg,
           "rho": rho, "L_list": l_list, "eta_exponent": gamma, "s_grid": s_grid,
           "rho_c": scan.rho_c, "rho0": scan.rho0, "delta_trunc": delta}
    return ("L", "V", "N", "row", "a", "b", "value", "target"), rows, man


def _run_n0_mgf(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    lat, L, delta, cut = _lattice_of(args, cfg, disp)
    n = _particles_of(args, cfg, lat.volume)
    lg = _resolved(args, "lambda_grid", cfg, "0,0.5,1")
    lam = _parse_grid(lg) if isinstance(lg, str) else list(lg)
    tables = occupation.partition_dp(lat, w, n)
    law0, mgf = occupation.n0_law_and_mgf(tables, lam)
    tol = float(_resolved(args, "tol", cfg, 1e-9))
    rc = thermo.critical_density(disp, w, tol)
    rho0 = max(0.0, n / lat.volume - rc) if math.isfinite(rc) else 0.0
    rows = [(l, m, math.exp(l * rho0)) for l, m in zip(lam, mgf)]
    man = {"command": "n0-mgf", "weights": wcfg, "dispersion": dcfg, "L": L,
           "N": n, "lambda_grid": lam, "rho_c": rc, "rho0": rho0,
           "rho_c_finite": math.isfinite(rc), "delta_trunc": delta,
           "n0_law": [float(x) for x in law0]}
    return ("lambda", "mgf", "limit_target"), rows, man


def _run_typicality(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    disp, dcfg = _dispersion_of(args, cfg)
    lat, L, delta, cut = _lattice_of(args, cfg, disp)
    n = _particles_of(args, cfg, lat.volume)
    eps = float(_resolved(args, "eps", cfg, 0.01))
    dlt = float(_resolved(args, "delta", cfg, 0.25))
    big_m = int(_resolved(args, "big_m", cfg, 10))
    method = _resolved(args, "method", cfg, "exact")
    nsamp = int(_resolved(args, "n_samples", cfg, 100000))
    seed = int(_resolved(args, "seed", cfg, 0) or 0)
    tables = occupation.partition_dp(lat, w, n)
    rep = occupation.typicality_probs(tables, eps, dlt, big_m, method=method,
                                      n_samples=nsamp,
                                      rng=np.random.default_rng(seed))
    ci = rep.ci_half or (0.0, 0.0, 0.0)
    rows = [("A", eps, dlt, big_m, rep.p_a, ci[0]),
            ("B", eps, dlt, big_m, rep.p_b, ci[1]),
            ("C", eps, dlt, big_m, rep.p_c, ci[2])]
    man = {"command": "typicality", "weights": wcfg, "dispersion": dcfg, "L": L,
           "N": n, "eps": eps, "delta": dlt, "big_m": big_m, "method": rep.method,
           "rho_c": rep.rho_c, "rho0": rep.rho0, "rho_c_finite": rep.rho_c_finite,
           "seed": seed,
           "note": None if rep.rho_c_finite else
           "rho_c is infinite: outside the proven typicality regime"}
    return ("set", "eps", "delta", "M", "prob", "ci_half"), rows, man


def _run_spatial_mc(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    d = int(_resolved(args, "dim", cfg, 1))
    beta = float(_require(_resolved(args, "beta", cfg), "beta"))
    L = float(_require(_resolved(args, "box", cfg, (cfg or {}).get("L")), "L"))
    n = int(_require(_resolved(args, "n_particles", cfg), "n-particles"))
    pairs_spec = _resolved(args, "ab_pairs", cfg, "1:1")
    pairs = _parse_pairs(pairs_spec) if isinstance(pairs_spec, str) else \
        tuple(tuple(p) for p in pairs_spec)
    params = spatial.MCParams(
        burn_in=int(_resolved(args, "burn_in", cfg, 1000)),
        samples=int(_resolved(args, "samples", cfg, 1000)),
        thinning=int(_resolved(args, "thinning", cfg, 1)),
        sigma_x=_resolved(args, "sigma_x", cfg),
        p_displacement=float(_resolved(args, "p_disp", cfg, 0.5)),
        seed=int(_resolved(args, "seed", cfg, 0) or 0),
        ab_pairs=pairs)
    pot = spatial.XiPotential.for_box(beta, d, L)
    state = spatial.SpatialState.random(n, L, pot, np.random.default_rng(params.seed))
    res = spatial.run_chain(state, pot, w, params)
    header = ["step", "energy", "cycle_count"] + [f"N_{a}_{b}" for a, b in pairs]
    rows = []
    for i in range(params.samples):
        rows.append((i * params.thinning, res.energies[i], int(res.cycle_counts[i]),
                     *[int(x) for x in res.nab[i]]))
    bars = {k: {"mean": v[0], "err": v[1], "tau": v[2], "n_eff": v[3]}
            for k, v in res.error_bars().items()}
    man = {"command": "spatial-mc", "weights": wcfg, "beta": beta, "d": d, "L": L,
           "N": n, "params": {"burn_in": params.burn_in, "samples": params.samples,
                              "thinning": params.thinning, "sigma_x": params.sigma_x,
                              "p_displacement": params.p_displacement,
                              "seed": params.seed, "ab_pairs": [list(p) for p in pairs]},
           "sigma_final": res.sigma_final, "accept_disp": res.accept_disp,
           "accept_swap": res.accept_swap, "error_bars": bars,
           "m_img": pot.m_img}
    return tuple(header), rows, man


def _run_cross_validate(args, cfg):
    w, wcfg = _weights_of(args, cfg)
    beta = float(_require(_resolved(args, "beta", cfg), "beta"))
    L = float(_require(_resolved(args, "box", cfg, (cfg or {}).get("L")), "L"))
    n = int(_resolved(args, "n_particles", cfg, 2))
    steps = int(_resolved(args, "mc_steps", cfg, 200000))
    seed = int(_resolved(args, "seed", cfg, 0) or 0)
    mc = spatial.MCParams(burn_in=max(steps // 10, 100), samples=steps // 10,
                          thinning=10, seed=seed) if steps else None
    case = spatial.CrossValidateCase(L=L, N=n, beta=beta, weights=w, mc=mc)
    rep = spatial.cross_validate(case)
    rows = []
    for perm, lhs, rhs, diff, bound in rep.rows:
        rows.append(("perm_" + "".join(map(str, perm)), lhs, rhs, diff, bound))
    rows.append(("mc_vs_exact", rep.mc_value if rep.mc_value is not None else math.nan,
                 rep.exact_value,
                 abs(rep.mc_value - rep.exact_value) if rep.mc_value is not None else math.nan,
                 3 * rep.mc_error if rep.mc_error is not None else math.nan))
    man = {"command": "cross-validate", "weights": wcfg, "beta": beta, "L": L,
           "N": n, "mc_steps": steps, "seed": seed,
           "y_integral": rep.y_integral, "y_lattice": rep.y_lattice}
    return ("check", "lhs", "rhs", "abs_diff", "bound"), rows, man


_HANDLERS = {
    "h-series": _run_h_series,
    "h-crosscheck": _run_h_crosscheck,
    "cycle-scan": _run_cycle_scan,
    "rho-c": _run_rho_c,
    "pressure": _run_pressure,
    "free-energy": _run_free_energy,
    "duality-check": _run_duality_check,
    "fourier-exact": _run_fourier_exact,
    "fourier-scan": _run_fourier_scan,
    "n0-mgf": _run_n0_mgf,
    "typicality": _run_typicality,
    "spatial-mc": _run_spatial_mc,
    "cross-validate": _run_cross_validate,
}


def _report(files):
    """Summarize artifact files produced by `run`; never mutates them."""
    for path in files:
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        if path.endswith(".json"):
            with open(path) as f:
                man = json.load(f)
            print(f"{path}: manifest for {man.get('command')!r}")
            continue
        with open(path) as f:
            header = f.readline().strip().split(",")
            rows = [line.strip().split(",") for line in f if line.strip()]
        print(f"{path}: {len(rows)} rows, columns {','.join(header)}")
        if {"value", "target"} <= set(header):
            iv, it = header.index("value"), header.index("target")
            gap = max((abs(float(r[iv]) - float(r[it])) for r in rows), default=0.0)
            print(f"  max |value - target| = {fmt(gap)}")
        if {"s", "value", "gap"} <= set(header):
            for r in rows:
                print(f"  s={r[header.index('s')]}  value={r[header.index('value')]}"
                      f"  gap={r[header.index('gap')]}")
        if {"check", "residual"} <= set(header):
            ir = header.index("residual")
            worst = max((float(r[ir]) for r in rows if r[ir] != "nan"), default=0.0)
            print(f"  max residual = {fmt(worst)}")
        if {"abs_diff", "bound"} <= set(header):
            idx_d, idx_b = header.index("abs_diff"), header.index("bound")
            ok = all(float(r[idx_d]) <= float(r[idx_b]) for r in rows
                     if r[idx_d] != "nan" and r[idx_b] != "nan")
            print(f"  within bounds: {'PASS' if ok else 'FAIL'}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="permgas",
                                description="cycle-weighted and spatial random "
                                            "permutation experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        sp = sub.add_parser(name)
        _add_common(sp)
        _add_weights(sp)
        _add_dispersion(sp)
        sp.add_argument("--n-max", type=int)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--n", type=int)
        sp.add_argument("--s-grid")
        sp.add_argument("--mu-grid")
        sp.add_argument("--rho-grid")
        sp.add_argument("--shift-c", type=float)
        sp.add_argument("--box", "-L", dest="box", type=float, help="box side L")
        sp.add_argument("--box-list", dest="box_list", help="comma list of L values")
        sp.add_argument("--eps-cut", type=float)
        sp.add_argument("--delta-trunc", type=float)
        sp.add_argument("--n-particles", type=int)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--eta-exponent", type=float)
        sp.add_argument("--lambda-grid")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--big-m", type=int)
        sp.add_argument("--method", choices=["exact", "sample"])
        sp.add_argument("--n-samples", type=int)
        sp.add_argument("--burn-in", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--thinning", type=int)
        sp.add_argument("--sigma-x", type=float)
        sp.add_argument("--p-disp", type=float)
        sp.add_argument("--ab-pairs")
        sp.add_argument("--mc-steps", type=int)
    rp = sub.add_parser("report")
    rp.add_argument("files", nargs="*")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return _report(args.files)
        cfg = load_json(args.config) if args.config else {}
        csv_path, man_path = _outpaths(args, args.command)
        header, rows, manifest = _HANDLERS[args.command](args, cfg)
        write_csv(csv_path, header, rows)
        manifest["csv"] = os.path.basename(csv_path)
        write_manifest(man_path, manifest)
        print(f"wrote {csv_path}")
        return 0
    except (ConfigError, SizeCapError, ValueError) as e:
        _err(1, type(e).__name__, e)
        return 1
    except (CertificateError, QuadratureError) as e:
        _err(2, type(e).__name__, e)
        return 2
    except OSError as e:
        _err(3, type(e).__name__, e)
        return 3


def _err(code, kind, exc):
    sys.stderr.write(json.dumps({"error": {"code": code, "kind": kind,
                                           "msg": str(exc)}}) + "\n")


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
