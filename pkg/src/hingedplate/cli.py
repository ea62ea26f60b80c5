"""Command-line front end.

Each subcommand runs one experiment and writes `<out>/<command>.csv`,
`<out>/<command>.json`, and a rendered `<out>/<command>.png`.  Exit status:
0 when every asserted invariant passes, 1 when one fails (the JSON names
it), 2 for configuration problems or unknown commands.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import fem, figures, greens, optimize, stripe
from .core import (
    EvenPiecewiseWeight,
    PlateError,
    PlateParams,
    TwoMaterialWeight,
    make_plate,
    mass_normalized_stripe,
    unit_weight,
)
from .quad import grid_weight_values, make_grid

_NUM_EXPR = re.compile(r"^[0-9pi+\-*/. ()e]+$")


def parse_value(text: str):
    """Parse a config value: numbers may use `pi` (e.g. `pi/150`)."""
    text = text.strip()
    if _NUM_EXPR.match(text) and any(ch.isdigit() or ch == "p" for ch in text):
        try:
            return float(eval(text, {"__builtins__": {}}, {"pi": math.pi}))
        except Exception:
            pass
    return text


class ConfigError(Exception):
    pass


class RunConfig:
    """Flat key-value configuration with file + command-line overrides."""

    def __init__(self, path=None, overrides=(), seed=0, out="out"):
        self.raw = {}
        self.seed = seed
        self.out = Path(out)
        if path:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {path}")
            for lineno, line in enumerate(p.read_text().splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected `key = value`")
                k, v = line.split("=", 1)
                self.raw[k.strip()] = parse_value(v)
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"--set needs key=value, got {item!r}")
            k, v = item.split("=", 1)
            self.raw[k.strip()] = parse_value(v)

    def get(self, key, default=None, kind=float):
        if key not in self.raw:
            return default
        v = self.raw[key]
        try:
            return kind(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {v!r}") from exc

    def plate(self) -> PlateParams:
        try:
            return make_plate(self.get("plate.ell", math.pi / 150.0),
                              self.get("plate.sigma", 0.2))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def weight(self, params: PlateParams):
        kind = self.get("weight.kind", "stripe", str)
        if kind == "unweighted":
            return unit_weight(params.ell)
        if kind == "stripe":
            alpha = self.get("weight.alpha", 0.5)
            beta = self.get("weight.beta", 1.5)
            if alpha == beta == 1.0:
                return unit_weight(params.ell)
            z = self.get("weight.z", None)
            try:
                if z is None:
                    return mass_normalized_stripe(alpha, beta, params.ell)
                return TwoMaterialWeight(alpha, beta, z, params.ell)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if kind == "piecewise":
            bp = self.raw.get("weight.breakpoints")
            vals = self.raw.get("weight.values")
            if not isinstance(bp, str) or not isinstance(vals, str):
                raise ConfigError("piecewise weight needs weight.breakpoints "
                                  "and weight.values as comma lists")
            try:
                b = tuple(float(parse_value(s)) for s in bp.split(","))
                v = tuple(float(parse_value(s)) for s in vals.split(","))
                return EvenPiecewiseWeight(breakpoints=b, values=v)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        raise ConfigError(f"unknown weight.kind: {kind}")


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


_MU_CACHE: dict = {}


def _mu_first(m, params):
    key = (m, params.ell, params.sigma)
    if key not in _MU_CACHE:
        _MU_CACHE[key] = stripe.unweighted_first(m, params).lam
    return _MU_CACHE[key]


def bracket(lam, m, w, params):
    """Bracket columns for an eigenvalue row: (lower, upper, within, binding).

    Stripe densities use the m^4/beta lower bound; the homogeneous density
    degenerates to beta = 1, where the sharper (1-sigma^2) m^4 bound applies.
    For beta so close to 1 that m^4/beta exceeds mu_{m,1} the lower bound
    cannot hold (the first eigenvalue never exceeds mu_{m,1}); such rows are
    reported but not treated as violations (binding = False).
    """
    m4 = float(m) ** 4
    if getattr(w, "is_unweighted", False):
        lower = (1.0 - params.sigma ** 2) * m4
        binding = True
    else:
        lower = m4 / max(w.as_piecewise().values)
        binding = lower < _mu_first(m, params) * (1.0 - 1e-9)
    return lower, m4, lower < lam < m4, binding


def _weight_label(w):
    if getattr(w, "is_unweighted", False):
        return "1"
    pw = w.as_piecewise()
    return "/".join(fmt(v) for v in pw.values)


# ---------------------------------------------------------------------------
# commands


def cmd_table1(cfg: RunConfig, params, outdir: Path):
    fe_n = int(cfg.get("solver.fe_n", 512))
    t = optimize.table1(params, cross_check=True, fe_n=fe_n)
    rows, failures = [], []
    weights = {
        "1": unit_weight(params.ell),
        "0.5/1.5": mass_normalized_stripe(0.5, 1.5, params.ell),
        "0.5/20": mass_normalized_stripe(0.5, 20.0, params.ell),
    }
    for label, lams in t["rows"].items():
        w = weights[label]
        for m, lam in zip(t["m"], lams):
            lo, hi, within, binding = bracket(lam, m, w, params)
            rows.append((label, m, lam, lo, hi, within))
            if binding and not within:
                failures.append(f"bracket violated for p={label}, m={m}")
    for label, gaps in t["fe_rel_gap"].items():
        for m, g in zip(t["m"], gaps):
            if g > 1e-4:
                failures.append(f"FE cross-check gap {g:.2e} for p={label}, m={m}")
    write_csv(outdir / "table1.csv",
              ["weight", "m", "lambda", "lower_bound", "upper_bound", "within"], rows)
    figures.fig_table1(t, outdir / "table1.png")
    return {"rows": t["rows"], "fe_rel_gap": t["fe_rel_gap"]}, failures


def cmd_spectrum(cfg: RunConfig, params, outdir: Path):
    w = cfg.weight(params)
    if not isinstance(w, TwoMaterialWeight):
        raise ConfigError("spectrum needs an unweighted or stripe density")
    m = int(cfg.get("solver.m", 1))
    failures = []
    if w.is_unweighted:
        pts = [stripe.unweighted_first(m, params)]
    else:
        lam_max = cfg.get("spectrum.lam_max", 2.5 * float(m) ** 4 / w.alpha)
        pts = stripe.even_eigenvalues_below(m, params, w, lam_max)
    rows = []
    for i, sp in enumerate(pts, 1):
        lo, hi, within, binding = bracket(sp.lam, m, w, params)
        rows.append((i, sp.lam, sp.case_tag, lo, hi, within if i == 1 else True))
        if i == 1 and binding and not within:
            failures.append(f"first eigenvalue {sp.lam} outside ({lo}, {hi})")
    if len(pts) >= 2 and pts[1].lam <= pts[0].lam:
        failures.append("even-branch eigenvalues are not increasing")
    write_csv(outdir / "spectrum.csv",
              ["index", "lambda", "case", "lower_bound", "upper_bound", "within"], rows)
    figures.fig_spectrum([sp.lam for sp in pts], m, outdir / "spectrum.png")
    return {"lambdas": [sp.lam for sp in pts], "m": m}, failures


def cmd_sweep_beta(cfg: RunConfig, params, outdir: Path):
    m = int(cfg.get("solver.m", 1))
    alpha = cfg.get("weight.alpha", 0.5)
    count = int(cfg.get("sweep.count", 20))
    bmax = cfg.get("sweep.beta_max", 50.0)
    betas = [1.0 + (bmax - 1.0) * (i + 1) / count for i in range(count)]
    res = optimize.sweep_beta(m, alpha, betas, params)
    failures = []
    if not res.monotone:
        failures.append("beta sweep is not strictly decreasing")
    for b, lam in res.bound_violations:
        failures.append(f"lambda {lam} below (m-1)^4 at beta={b}")
    rows = []
    for b, lam in zip(res.points, res.lams):
        lo, hi = float(m) ** 4 / b, float(m) ** 4
        rows.append((b, lam, lo, hi, lo < lam < hi))
    write_csv(outdir / "sweep-beta.csv",
              ["beta", "lambda", "lower_bound", "upper_bound", "within"], rows)
    figures.fig_sweep(res, outdir / "sweep-beta.png")
    return {"betas": res.points, "lambdas": res.lams, "monotone": res.monotone}, failures


def cmd_sweep_m(cfg: RunConfig, params, outdir: Path):
    w = cfg.weight(params)
    m_max = int(cfg.get("solver.m_max", 10))
    res = optimize.sweep_m(w, params, m_max)
    failures = [] if res.monotone else ["m sweep is not strictly increasing"]
    rows = []
    for m, lam in zip(res.points, res.lams):
        lo, hi, within, binding = bracket(lam, m, w, params)
        rows.append((m, lam, lo, hi, within))
        if binding and not within:
            failures.append(f"bracket violated at m={m}")
    write_csv(outdir / "sweep-m.csv",
              ["m", "lambda", "lower_bound", "upper_bound", "within"], rows)
    figures.fig_sweep(res, outdir / "sweep-m.png")
    return {"m": res.points, "lambdas": res.lams, "monotone": res.monotone}, failures


def cmd_verify_min(cfg: RunConfig, params, outdir: Path):
    alpha = cfg.get("weight.alpha", 0.96)
    beta = cfg.get("weight.beta", 1.04)
    n_samples = int(cfg.get("verify.samples", 200))
    n_pairs = int(cfg.get("verify.pairs", 50))
    n = int(cfg.get("solver.n", 1024))
    rep = optimize.verify_class_minimum(alpha, beta, params, n_samples,
                                        seed=cfg.seed, n=n)
    rng = np.random.default_rng(cfg.seed + 1)
    pair_ok = 0
    failures = []
    for i in range(n_pairs):
        p1, p2 = optimize.nested_pair(alpha, beta, params.ell, rng)
        v = optimize.pattern_monotonicity_check(p1, p2, params, n=n)
        if v["ok"]:
            pair_ok += 1
        else:
            failures.append(f"ordered pair {i} violates the eigenvalue ordering")
    if rep["violations"]:
        failures.append(f"{len(rep['violations'])} sampled weights beat the stripe")
    rows = [(i, mg) for i, mg in enumerate(rep["margins"])]
    write_csv(outdir / "verify-min.csv", ["sample", "relative_margin"], rows)
    figures.fig_hist(rep["margins"], "relative margin over the stripe minimum",
                     outdir / "verify-min.png")
    summary = {
        "lam_bar": rep["lam_bar"],
        "min_margin": rep["min_margin"],
        "violations": len(rep["violations"]),
        "nested_pairs_ok": pair_ok,
        "nested_pairs": n_pairs,
        "in_regime": rep["in_regime"],
        "labeled_as": "theorem check" if rep["in_regime"] else "conjecture evidence",
    }
    return summary, failures


def random_bump_profile(rng, grid_nodes):
    """Nonnegative piecewise-linear function with random knots."""
    k = int(rng.integers(3, 8))
    lo, hi = grid_nodes[0], grid_nodes[-1]
    xs = np.concatenate([[lo], np.sort(rng.uniform(lo, hi, k)), [hi]])
    ys = rng.uniform(0.0, 1.0, k + 2)
    return np.interp(grid_nodes, xs, ys)


def cmd_ppp_demo(cfg: RunConfig, params, outdir: Path):
    n_samples = int(cfg.get("ppp.samples", 100))
    m_max = int(cfg.get("solver.m_max", 10))
    n = int(cfg.get("solver.n", 1024))
    rng = np.random.default_rng(cfg.seed)
    rows, failures, mins = [], [], []
    for m in range(1, m_max + 1):
        solver = greens.get_solver(m, params, n=n)
        for i in range(n_samples):
            f = random_bump_profile(rng, solver.grid.nodes)
            if not np.any(f > 0):
                continue
            w = solver.solve_samples(f)
            c = solver.coeffs(solver.boundary(f))
            mn = float(np.min(w))
            mins.append(mn)
            rows.append((i, m, mn, c.c1, c.c3, c.c4))
            if mn <= 0:
                failures.append(f"solution not positive (sample {i}, m={m})")
            if not (c.c1 > 0 and c.c4 < 0 and abs(c.c3) < abs(c.c4)):
                failures.append(f"coefficient signs violated (sample {i}, m={m})")
    write_csv(outdir / "ppp-demo.csv",
              ["sample", "m", "min_value", "c1", "c3", "c4"], rows)
    figures.fig_hist(np.log10(np.maximum(mins, 1e-300)), "log10 min of solution",
                     outdir / "ppp-demo.png")
    return {"samples": n_samples, "m_max": m_max, "min_of_mins": min(mins)}, failures


CROSSCHECK_WEIGHTS = ((1.0, 1.0), (0.5, 1.5), (0.5, 20.0), (0.9, 1.04))


def crosscheck_matrix(ells):
    """12 configurations: all (m, alpha/beta) pairs with the two half-widths
    interleaved so both are exercised."""
    out = []
    i = 0
    for m in (1, 2, 5):
        for ab in CROSSCHECK_WEIGHTS:
            out.append((m, ab, ells[i % len(ells)]))
            i += 1
    return out


def cmd_crosscheck(cfg: RunConfig, params, outdir: Path):
    n = int(cfg.get("solver.n", 2048))
    fe_n = int(cfg.get("solver.fe_n", 512))
    rows, failures = [], []
    labels, gaps_ip, gaps_fe = [], [], []
    for m, (alpha, beta), ell in crosscheck_matrix((math.pi / 150.0, 0.5)):
        pp = make_plate(ell, params.sigma)
        if alpha == beta == 1.0:
            w = unit_weight(ell)
            lam_det = stripe.unweighted_first(m, pp).lam
        else:
            w = mass_normalized_stripe(alpha, beta, ell)
            lam_det = stripe.first_even_eigenvalue(m, pp, w).lam
        lam_ip = greens.inverse_power_first(w.as_piecewise(), m, pp,
                                            tol=1e-10, n=n).lam
        lam_fe = fem.fd_first_eigen(w, m, pp, n=fe_n)[0]
        g_ip = abs(lam_det - lam_ip) / lam_det
        g_fe = abs(lam_det - lam_fe) / lam_det
        label = f"m={m},a={alpha},b={beta},l={ell:.3g}"
        labels.append(label)
        gaps_ip.append(g_ip)
        gaps_fe.append(g_fe)
        rows.append((m, alpha, beta, ell, lam_det, lam_ip, lam_fe, g_ip, g_fe))
        if g_ip > 1e-6:
            failures.append(f"resolvent-iteration gap {g_ip:.2e} at {label}")
        if g_fe > 1e-5:
            failures.append(f"finite-element gap {g_fe:.2e} at {label}")
    write_csv(outdir / "crosscheck.csv",
              ["m", "alpha", "beta", "ell", "lambda_det", "lambda_invpower",
               "lambda_fe", "gap_invpower", "gap_fe"], rows)
    figures.fig_crosscheck(labels, gaps_ip, gaps_fe, outdir / "crosscheck.png")
    return {"max_gap_invpower": max(gaps_ip), "max_gap_fe": max(gaps_fe)}, failures


def cmd_mode(cfg: RunConfig, params, outdir: Path):
    w = cfg.weight(params)
    m = int(cfg.get("solver.m", 1))
    if isinstance(w, TwoMaterialWeight):
        sp = stripe.first_even_eigenvalue(m, params, w) \
            if not w.is_unweighted else stripe.unweighted_first(m, params)
        phi = stripe.mode_function(sp, params, w)
        lam = sp.lam
    else:
        lam, phi = greens.inverse_power_first(w, m, params, tol=1e-10,
                                              n=int(cfg.get("solver.n", 2048)))
    y = np.linspace(-params.ell, params.ell, 401)
    vals = phi(y)
    rows = list(zip(y, vals, phi(y, 1)))
    failures = []
    if np.min(vals) <= 0:
        failures.append("first mode is not strictly positive")
    if np.max(np.abs(vals - vals[::-1])) > 1e-8 * np.max(np.abs(vals)):
        failures.append("first mode is not even")
    pw = w.as_piecewise()
    grid = make_grid(pw.breakpoints, 2000)
    pv = grid_weight_values(w, grid)
    nrm = 2.0 * grid.integrate(pv * phi(grid.nodes) ** 2)
    if abs(nrm - 1.0) > 1e-6:
        failures.append(f"mode normalization off: int p phi^2 = {nrm}")
    half = y[y >= 0]
    if np.any(np.diff(phi(half)) < 0) and max(pw.values) < optimize.regime_beta_cap(params):
        failures.append("first mode is not increasing on (0, ell) inside the regime")
    write_csv(outdir / "mode.csv", ["y", "phi", "dphi"], rows)
    figures.fig_mode(y, vals, outdir / "mode.png")
    return {"lambda": float(lam), "normalization": float(nrm)}, failures


def cmd_sublevel(cfg: RunConfig, params, outdir: Path):
    alpha = cfg.get("weight.alpha", 0.5)
    beta = cfg.get("weight.beta", 1.5)
    nx = int(cfg.get("sublevel.nx", 256))
    ny = int(cfg.get("sublevel.ny", 128))
    pbar = mass_normalized_stripe(alpha, beta, params.ell)
    rep = optimize.sublevel_report(pbar, params, grid=(nx, ny))
    failures = []
    if abs(rep.area_fraction - rep.fraction) > 1.0 / (nx * ny):
        failures.append("sublevel area fraction does not match the target")
    if not rep.exceeds_one_percent:
        failures.append("sublevel set is too close to a horizontal stripe")
    x = (np.arange(nx) + 0.5) * math.pi / nx
    y = (np.arange(ny) + 0.5) * 2 * params.ell / ny - params.ell
    rows = [(x[i], y[j], int(rep.mask[i, j]))
            for i in range(nx) for j in range(ny)]
    write_csv(outdir / "sublevel.csv", ["x", "y", "in_sublevel"], rows)
    figures.fig_sublevel(rep, params, outdir / "sublevel.png")
    return {
        "threshold": rep.threshold,
        "target_fraction": rep.fraction,
        "area_fraction": rep.area_fraction,
        "sym_diff_fraction": rep.sym_diff_fraction,
        "stripe_band": rep.stripe_band,
    }, failures


COMMANDS = {
    "table1": cmd_table1,
    "spectrum": cmd_spectrum,
    "sweep-beta": cmd_sweep_beta,
    "sweep-m": cmd_sweep_m,
    "verify-min": cmd_verify_min,
    "ppp-demo": cmd_ppp_demo,
    "crosscheck": cmd_crosscheck,
    "mode": cmd_mode,
    "sublevel": cmd_sublevel,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hingedplate",
        description="Weighted eigenvalues of a partially hinged plate",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key")
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(path=args.config, overrides=args.set,
                        seed=args.seed, out=args.out)
        params = cfg.plate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    outdir = cfg.out
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        summary, failures = COMMANDS[args.command](cfg, params, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PlateError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        summary, failures = {}, [str(exc)]
    payload = {
        "command": args.command,
        "seed": cfg.seed,
        "plate": {"ell": params.ell, "sigma": params.sigma},
        "passed": not failures,
        "failures": failures,
        "summary": summary,
        "runtime_s": round(time.perf_counter() - t0, 3),
    }
    (outdir / f"{args.command}.json").write_text(json.dumps(payload, indent=2))
    for f in failures:
        print(f"FAIL: {f}", file=sys.stderr)
    return 0 if not failures else 1


if __name__ == "__main__":
    sys.exit(main())
