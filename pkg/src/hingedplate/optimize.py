"""Experiment layer: weight-class minimization checks, comparison bounds,
parameter sweeps, and the sublevel-set analysis of the optimal density.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    EvenPiecewiseWeight,
    PlateParams,
    TwoMaterialWeight,
    mass_normalized_stripe,
    unit_weight,
)
from .greens import inverse_power_first
from .quad import make_grid, symmetric_breakpoints
from .stripe import (
    closed_form_unweighted_mode,
    first_even_eigenvalue,
    mode_function,
    unweighted_first,
)


@dataclass
class SweepResult:
    """One-parameter sweep of the first even eigenvalue."""

    axis: str
    points: list
    lams: list
    monotone: bool
    direction: str
    bound_violations: list = field(default_factory=list)


@dataclass
class SublevelReport:
    """Measure-matched sublevel set of the squared first mode vs the
    equal-area horizontal stripe."""

    threshold: float
    fraction: float
    mask: np.ndarray
    area_fraction: float
    sym_diff_fraction: float
    stripe_band: str
    exceeds_one_percent: bool


@dataclass(frozen=True)
class SymmetricXWeight:
    """x-dependent density, symmetric about x = pi/2, piecewise constant.

    breakpoints: 0 = x0 < ... < xk = pi/2 (half interval); values v1..vk.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b[0] != 0.0 or abs(b[-1] - math.pi / 2.0) > 1e-12 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must increase from 0 to pi/2")
        if len(v) != len(b) - 1 or np.any(v <= 0):
            raise ValueError("need one positive value per interval")
        object.__setattr__(self, "breakpoints", tuple(b))
        object.__setattr__(self, "values", tuple(v))

    def mass(self) -> float:
        return 2.0 * float(np.sum(np.asarray(self.values) * np.diff(self.breakpoints)))

    def is_mass_normalized(self, rtol: float = 1e-12) -> bool:
        return abs(self.mass() - math.pi) <= rtol * math.pi

    def single_crossing(self, tol: float = 1e-12) -> bool:
        v = np.asarray(self.values)
        for j in range(len(v) + 1):
            if np.all(v[:j] <= 1.0 + tol) and np.all(v[j:] >= 1.0 - tol):
                return True
        return False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = np.where(x > math.pi / 2.0, math.pi - x, x)
        inner = np.asarray(self.breakpoints[1:-1])
        idx = np.searchsorted(inner, t, side="right")
        out = np.asarray(self.values)[idx]
        return out if out.ndim else float(out)


def x_stripe(alpha: float, beta: float) -> SymmetricXWeight:
    """Mass-normalized x-density with the denser block centered at pi/2."""
    if not alpha < 1.0 < beta:
        raise ValueError("need alpha < 1 < beta")
    s = math.pi / 2.0 * (beta - 1.0) / (beta - alpha)
    return SymmetricXWeight(breakpoints=(0.0, s, math.pi / 2.0), values=(alpha, beta))


# ---------------------------------------------------------------------------
# first eigenvalue of the plate (minimum over x-modes)


def profile_first_eigenvalue(p, m: int, params: PlateParams, n: int = 2048) -> float:
    """First even eigenvalue of the y-profile problem at mode m, routed to
    the fastest applicable solver."""
    if isinstance(p, TwoMaterialWeight):
        if p.is_unweighted:
            return unweighted_first(m, params).lam
        return first_even_eigenvalue(m, params, p).lam
    return inverse_power_first(p, m, params, tol=1e-10, n=n).lam


def plate_first_eigenvalue(p, params: PlateParams, m_max: int = 10, n: int = 2048):
    """Minimum over x-modes 1..m_max of the first profile eigenvalue.

    Returns (lambda, argmin m); warns if the minimum is not at m = 1.
    """
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    lams = [profile_first_eigenvalue(p, m, params, n=n) for m in range(1, m_max + 1)]
    i = int(np.argmin(lams))
    if i != 0:
        warnings.warn(f"first eigenvalue attained at m={i + 1}, not m=1", stacklevel=2)
    return lams[i], i + 1


# ---------------------------------------------------------------------------
# Rayleigh comparison with the homogeneous first mode


def rayleigh_bound_u1(p, params: PlateParams, n: int = 512):
    """Upper bound on the weighted first eigenvalue from the homogeneous
    first mode u1(x,y) = phi1(y) sin(x).

    Returns (bound, ok) with ok = bound <= mu_{1,1} (1 + 1e-8).  The 2D
    quadrature is a tensor Simpson rule; since u1 separates, the tensor sums
    collapse to products of 1D integrals of the separated factors.
    """
    mu = unweighted_first(1, params).lam
    phi = closed_form_unweighted_mode(1, params, mu)
    sig, ell = params.sigma, params.ell

    if isinstance(p, SymmetricXWeight):
        if not p.single_crossing():
            raise ValueError("x-density must be <= 1 then >= 1 toward pi/2")
        if not p.is_mass_normalized(rtol=1e-10):
            raise ValueError("x-density must have unit average")
        half = make_grid(p.breakpoints, n)
        xg_nodes = np.concatenate([half.nodes, math.pi - half.nodes[::-1]])
        xg_weights = np.concatenate([half.weights, half.weights[::-1]])
        px = p(xg_nodes)
        yg = make_grid((0.0, ell), n)
        py = np.ones_like(yg.nodes)
    else:
        pw = p.as_piecewise()
        if not pw.single_crossing():
            raise ValueError("y-density must be <= 1 then >= 1 toward the edge")
        if not pw.is_mass_normalized(rtol=1e-10):
            raise ValueError("y-density must have unit average")
        xg_nodes = np.linspace(0.0, math.pi, n + 1)
        hx = math.pi / n
        xg_weights = np.full(n + 1, 2.0)
        xg_weights[1::2] = 4.0
        xg_weights[0] = xg_weights[-1] = 1.0
        xg_weights *= hx / 3.0
        px = np.ones_like(xg_nodes)
        yg = make_grid(pw.breakpoints, n)
        py = np.asarray(pw.values)[yg.piece_index]

    sin2 = xg_weights @ np.sin(xg_nodes) ** 2
    cos2 = xg_weights @ np.cos(xg_nodes) ** 2
    p_sin2 = xg_weights @ (px * np.sin(xg_nodes) ** 2)
    f0 = phi(yg.nodes)
    f1 = phi(yg.nodes, 1)
    f2 = phi(yg.nodes, 2)
    # profile integrals over (0, ell); evenness doubles them uniformly, so
    # the factor 2 cancels in the quotient
    I_bend = yg.integrate((f2 - f0) ** 2)
    I_cross = yg.integrate(f0 * f2)
    I_grad = yg.integrate(f1 ** 2)
    I_p = yg.integrate(py * f0 ** 2)
    num = I_bend * sin2 + 2.0 * (1.0 - sig) * (I_cross * sin2 + I_grad * cos2)
    # I_p is int p(y) phi^2 for y-densities and plain int phi^2 otherwise
    den = I_p * (p_sin2 if isinstance(p, SymmetricXWeight) else sin2)
    bound = num / den
    return float(bound), bool(bound <= mu * (1.0 + 1e-8))


# ---------------------------------------------------------------------------
# random admissible weights and the class-minimum check


def sample_pbar_weight(alpha: float, beta: float, ell: float, rng,
                       max_tries: int = 500) -> EvenPiecewiseWeight:
    """Random mass-normalized single-crossing piecewise-constant density.

    Levels below 1 up to a random crossing in (0.1 ell, 0.9 ell), above 1
    beyond it; the last level is solved from the mass constraint and the
    draw is rejected if it falls outside [1, beta].
    """
    for _ in range(max_tries):
        k = int(rng.integers(2, 7))
        j = int(rng.integers(1, k))
        cross = rng.uniform(0.1 * ell, 0.9 * ell)
        lower = np.sort(rng.uniform(0.0, cross, j - 1))
        upper = np.sort(rng.uniform(cross, ell, k - j - 1))
        bp = np.concatenate([[0.0], lower, [cross], upper, [ell]])
        if np.any(np.diff(bp) < 1e-3 * ell):
            continue
        vals = np.empty(k)
        vals[:j] = rng.uniform(alpha, 1.0, j)
        vals[j:k - 1] = rng.uniform(1.0, beta, k - j - 1)
        widths = np.diff(bp)
        rest = float(vals[:k - 1] @ widths[:k - 1])
        last = (ell - rest) / widths[-1]
        if not 1.0 <= last <= beta:
            continue
        vals[-1] = last
        return EvenPiecewiseWeight(breakpoints=tuple(bp), values=tuple(vals))
    raise RuntimeError(
        f"could not sample an admissible density for alpha={alpha}, beta={beta}"
    )


def nested_pair(alpha: float, beta: float, ell: float, rng,
                max_tries: int = 500):
    """Pair (p1, p2) of admissible densities with p1 below p2 up to a
    crossing point and above beyond it (p1 is a stripe-ward convex pull of
    p2, which preserves mass)."""
    pbar = mass_normalized_stripe(alpha, beta, ell).as_piecewise()
    for _ in range(max_tries):
        p2 = sample_pbar_weight(alpha, beta, ell, rng)
        t = float(rng.uniform(0.1, 0.9))
        bp = np.unique(np.concatenate([pbar.breakpoints, p2.breakpoints]))
        mids = 0.5 * (bp[:-1] + bp[1:])
        v1 = t * np.asarray(pbar(mids)) + (1.0 - t) * np.asarray(p2(mids))
        p1 = EvenPiecewiseWeight(breakpoints=tuple(bp), values=tuple(v1))
        if p1.single_crossing(tol=1e-9) and p1.is_mass_normalized(rtol=1e-9):
            return p1, p2
    raise RuntimeError("could not build a nested admissible pair")


def _crossing_hypothesis(p1, p2, tol: float = 1e-12) -> bool:
    """Is there a z with p1 <= p2 on [0, z] and p1 >= p2 on [z, ell]?"""
    a, b = p1.as_piecewise(), p2.as_piecewise()
    bp = np.unique(np.concatenate([a.breakpoints, b.breakpoints]))
    mids = 0.5 * (bp[:-1] + bp[1:])
    d = np.asarray(a(mids)) - np.asarray(b(mids))
    for j in range(len(d) + 1):
        if np.all(d[:j] <= tol) and np.all(d[j:] >= -tol):
            return True
    return False


def regime_beta_cap(params: PlateParams) -> float:
    """The beta threshold below which the ordering theorems are proven:
    min(1/mu_{1,1}, 16(1-sigma^2))."""
    mu = unweighted_first(1, params).lam
    return min(1.0 / mu, 16.0 * (1.0 - params.sigma ** 2))


def pattern_monotonicity_check(p1, p2, params: PlateParams, n: int = 1024,
                               tol_rel: float = 1e-9) -> dict:
    """Ordering check: crossing-nested densities give ordered eigenvalues."""
    if not _crossing_hypothesis(p1, p2):
        raise ValueError("densities are not crossing-nested (p1<=p2 then p1>=p2)")
    l1 = inverse_power_first(p1, 1, params, tol=1e-10, n=n).lam
    l2 = inverse_power_first(p2, 1, params, tol=1e-10, n=n).lam
    beta_max = max(max(p1.as_piecewise().values), max(p2.as_piecewise().values))
    return {
        "lam1": l1,
        "lam2": l2,
        "ok": l1 <= l2 * (1.0 + tol_rel),
        "in_regime": beta_max < regime_beta_cap(params),
    }


def verify_class_minimum(alpha: float, beta: float, params: PlateParams,
                         n_samples: int = 200, seed: int = 0, n: int = 1024,
                         tol_rel: float = 1e-9) -> dict:
    """Sampled check that the extreme stripe minimizes the first eigenvalue
    over the admissible single-crossing class.

    The reference stripe eigenvalue uses the same discretization as the
    samples so that quadrature bias cancels in the comparison.
    """
    rng = np.random.default_rng(seed)
    pbar = mass_normalized_stripe(alpha, beta, params.ell)
    lam_bar = inverse_power_first(pbar.as_piecewise(), 1, params, tol=1e-10, n=n).lam
    margins = []
    violations = []
    for _ in range(n_samples):
        p = sample_pbar_weight(alpha, beta, params.ell, rng)
        lam = inverse_power_first(p, 1, params, tol=1e-10, n=n).lam
        margin = (lam - lam_bar) / lam_bar
        margins.append(margin)
        if margin < -tol_rel:
            violations.append((p, lam))
    return {
        "lam_bar": lam_bar,
        "margins": margins,
        "min_margin": min(margins),
        "violations": violations,
        "n_samples": n_samples,
        "in_regime": beta < regime_beta_cap(params),
    }


# ---------------------------------------------------------------------------
# sweeps and the reference table


def sweep_beta(m: int, alpha: float, betas, params: PlateParams) -> SweepResult:
    """First even eigenvalue of the extreme stripe as beta grows."""
    betas = list(betas)
    if any(b <= 1.0 for b in betas) or any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("betas must be increasing and > 1")
    lams = [first_even_eigenvalue(m, params, mass_normalized_stripe(alpha, b, params.ell)).lam
            for b in betas]
    lower = float(m - 1) ** 4
    violations = [(b, l) for b, l in zip(betas, lams) if l < lower]
    decreasing = all(b < a for a, b in zip(lams, lams[1:]))
    return SweepResult(axis="beta", points=betas, lams=lams, monotone=decreasing,
                       direction="decreasing", bound_violations=violations)


def sweep_m(w, params: PlateParams, m_max: int = 10) -> SweepResult:
    """First even eigenvalue across x-modes 1..m_max for one density."""
    lams = [profile_first_eigenvalue(w, m, params) for m in range(1, m_max + 1)]
    increasing = all(b > a for a, b in zip(lams, lams[1:]))
    return SweepResult(axis="m", points=list(range(1, m_max + 1)), lams=lams,
                       monotone=increasing, direction="increasing")


TABLE1_WEIGHTS = (("1", None), ("0.5/1.5", (0.5, 1.5)), ("0.5/20", (0.5, 20.0)))


def table1(params: PlateParams, m_max: int = 10, cross_check: bool = False,
           fe_n: int = 512) -> dict:
    """The 3 x m_max grid of first even eigenvalues for the homogeneous
    density and the two extreme stripes; optional FE cross-check."""
    from .fem import fd_first_eigen

    rows = {}
    checks = {}
    for label, ab in TABLE1_WEIGHTS:
        if ab is None:
            w = unit_weight(params.ell)
            lams = [unweighted_first(m, params).lam for m in range(1, m_max + 1)]
        else:
            w = mass_normalized_stripe(ab[0], ab[1], params.ell)
            lams = [first_even_eigenvalue(m, params, w).lam for m in range(1, m_max + 1)]
        rows[label] = lams
        if cross_check:
            fe = [fd_first_eigen(w, m, params, n=fe_n)[0] for m in range(1, m_max + 1)]
            checks[label] = [abs(a - b) / a for a, b in zip(lams, fe)]
    return {"m": list(range(1, m_max + 1)), "rows": rows, "fe_rel_gap": checks}


# ---------------------------------------------------------------------------
# sublevel-set reconstruction


def sublevel_mask(u2: np.ndarray, fraction: float):
    """Threshold u^2 samples so that the sublevel cell count matches the
    target area fraction; returns (mask, threshold)."""
    flat = np.sort(u2.ravel())
    k = int(round(fraction * flat.size))
    k = min(max(k, 1), flat.size)
    t = float(flat[k - 1])
    return u2 <= t, t


def sublevel_report(pbar: TwoMaterialWeight, params: PlateParams,
                    grid=(256, 128), fraction: float | None = None) -> SublevelReport:
    """Compare the measure-matched sublevel set of the squared first mode
    with the equal-area horizontal stripe.

    The best stripe (central band vs outer bands, whichever fits the set
    better) is used for the comparison; a y-only squared mode would give a
    symmetric difference of exactly zero.
    """
    nx, ny = grid
    sp = first_even_eigenvalue(1, params, pbar)
    phi = mode_function(sp, params, pbar)
    if fraction is None:
        fraction = (pbar.beta - 1.0) / (pbar.beta - pbar.alpha)
    x = (np.arange(nx) + 0.5) * math.pi / nx
    y = (np.arange(ny) + 0.5) * 2.0 * params.ell / ny - params.ell
    u2 = np.outer(np.sin(x) ** 2, phi(y) ** 2)
    mask, t = sublevel_mask(u2, fraction)
    area_fraction = mask.mean()
    central = np.abs(y)[None, :] <= fraction * params.ell
    central = np.broadcast_to(central, mask.shape)
    outer = ~central
    sd_central = np.mean(mask ^ central)
    sd_outer = np.mean(mask ^ outer)
    if sd_central <= sd_outer:
        band, sd = "central", sd_central
    else:
        band, sd = "outer", sd_outer
    return SublevelReport(
        threshold=t, fraction=fraction, mask=mask,
        area_fraction=float(area_fraction), sym_diff_fraction=float(sd),
        stripe_band=band, exceeds_one_percent=bool(sd > 0.01),
    )
