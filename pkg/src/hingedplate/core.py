"""Domain types, weight algebra and scalar predicates for the hinged-plate problem.

The plate occupies (0, pi) x (-ell, ell); it is hinged on the short edges and
free on the long ones.  Density weights are even piecewise-constant functions
of y with unit average, so that comparisons against the homogeneous plate are
fair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MASS_RTOL = 1e-12
C0_INT_TOL = 1e-6


class PlateError(Exception):
    """Base class for solver errors."""


class DegenerateCaseError(PlateError):
    """Secular basis is degenerate (lambda sits on a case boundary)."""


class NoEigenvalueError(PlateError):
    """No sign change found in the scanned bracket."""


class NonSimpleRootError(PlateError):
    """Secular matrix null space is not one-dimensional."""


@dataclass(frozen=True)
class PlateParams:
    """Half-width and Poisson ratio of the plate."""

    ell: float
    sigma: float

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError(f"half-width must be positive, got {self.ell}")
        if not 0.0 < self.sigma < 0.5:
            raise ValueError(f"Poisson ratio must lie in (0, 1/2), got {self.sigma}")


def make_plate(ell: float, sigma: float) -> PlateParams:
    return PlateParams(float(ell), float(sigma))


def mass_normalized_interface(alpha: float, beta: float, ell: float) -> float:
    """Interface position making the two-material stripe mass-normalized.

    Returns ell*(beta-1)/(beta-alpha); the stripe with this interface has
    average density one.
    """
    if not (alpha < 1.0 < beta):
        raise ValueError(f"need alpha < 1 < beta, got alpha={alpha}, beta={beta}")
    return ell * (beta - 1.0) / (beta - alpha)


@dataclass(frozen=True)
class TwoMaterialWeight:
    """Even stripe weight: alpha on (-z, z), beta on the outer bands."""

    alpha: float
    beta: float
    z: float
    ell: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0 <= self.beta):
            raise ValueError(f"need 0 < alpha <= 1 <= beta, got ({self.alpha}, {self.beta})")
        if self.alpha == self.beta and self.alpha != 1.0:
            raise ValueError("equal densities are only allowed at the unweighted value 1")
        if not 0.0 < self.z < self.ell:
            raise ValueError(f"interface must lie in (0, ell), got z={self.z}")

    @property
    def is_unweighted(self) -> bool:
        return self.alpha == 1.0 and self.beta == 1.0

    def mass(self) -> float:
        """Integral of the density over (0, ell)."""
        return self.alpha * self.z + self.beta * (self.ell - self.z)

    def is_mass_normalized(self, rtol: float = MASS_RTOL) -> bool:
        return abs(self.mass() - self.ell) <= rtol * self.ell

    def as_piecewise(self) -> "EvenPiecewiseWeight":
        return EvenPiecewiseWeight(
            breakpoints=(0.0, self.z, self.ell), values=(self.alpha, self.beta)
        )

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(np.abs(y) > self.ell * (1 + 1e-12)):
            raise ValueError("evaluation point outside [-ell, ell]")
        out = np.where(np.abs(y) < self.z, self.alpha, self.beta)
        return out if out.ndim else float(out)


def mass_normalized_stripe(alpha: float, beta: float, ell: float) -> TwoMaterialWeight:
    return TwoMaterialWeight(alpha, beta, mass_normalized_interface(alpha, beta, ell), ell)


def unit_weight(ell: float) -> TwoMaterialWeight:
    """The homogeneous density p = 1, represented as a degenerate stripe."""
    return TwoMaterialWeight(1.0, 1.0, 0.5 * ell, ell)


@dataclass(frozen=True)
class EvenPiecewiseWeight:
    """Even piecewise-constant density given on [0, ell] and mirrored.

    breakpoints: 0 = y0 < y1 < ... < yk = ell
    values:      v1 ... vk, with vi the density on (y_{i-1}, y_i)
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or len(b) < 2 or len(v) != len(b) - 1:
            raise ValueError("need k+1 breakpoints and k values")
        if b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing and start at 0")
        if np.any(v <= 0):
            raise ValueError("densities must be positive")
        object.__setattr__(self, "breakpoints", tuple(b))
        object.__setattr__(self, "values", tuple(v))

    @property
    def ell(self) -> float:
        return self.breakpoints[-1]

    def mass(self) -> float:
        b = np.asarray(self.breakpoints)
        v = np.asarray(self.values)
        return float(np.sum(v * np.diff(b)))

    def is_mass_normalized(self, rtol: float = MASS_RTOL) -> bool:
        return abs(self.mass() - self.ell) <= rtol * self.ell

    def within_envelope(self, alpha: float, beta: float, tol: float = 1e-12) -> bool:
        v = np.asarray(self.values)
        return bool(np.all(v >= alpha - tol) and np.all(v <= beta + tol))

    def single_crossing(self, tol: float = 1e-12) -> bool:
        """Membership in the single-crossing class: densities <= 1 up to some
        index and >= 1 beyond it."""
        v = np.asarray(self.values)
        for j in range(len(v) + 1):
            if np.all(v[:j] <= 1.0 + tol) and np.all(v[j:] >= 1.0 - tol):
                return True
        return False

    def as_piecewise(self) -> "EvenPiecewiseWeight":
        return self

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        t = np.abs(y)
        if np.any(t > self.ell * (1 + 1e-12)):
            raise ValueError("evaluation point outside [-ell, ell]")
        # at a breakpoint the outer interval wins (right limit in |y|)
        inner = np.asarray(self.breakpoints[1:-1])
        idx = np.searchsorted(inner, t, side="right")
        out = np.asarray(self.values)[idx]
        return out if out.ndim else float(out)


def weight_eval(w, y):
    """Density of `w` at y; even in y, outer value at breakpoints."""
    return w(y)


def check_c0(params: PlateParams, tol: float = C0_INT_TOL):
    """Solve tanh(sqrt(2) s ell) = (sigma/(2-sigma))^2 sqrt(2) s ell for s > 0.

    Returns (s, ok) where ok means s is farther than `tol` from any integer;
    the spectrum enumeration of the unweighted problem is complete only in
    that case.  The condition is reported, never enforced.
    """
    c = (params.sigma / (2.0 - params.sigma)) ** 2
    # in x = sqrt(2) s ell: tanh(x) - c x > 0 near 0 (slope 1 - c), < 0 at x = 1/c
    lo, hi = 0.0, 1.0 / c
    f = lambda x: math.tanh(x) - c * x
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    x = 0.5 * (lo + hi)
    s = x / (math.sqrt(2.0) * params.ell)
    ok = abs(s - round(s)) > tol
    return s, ok


def nu11_exists(m: int, params: PlateParams) -> bool:
    """Existence test for the first odd-type eigenvalue below m^4:
    ell*m*sqrt(2)*coth(ell*m*sqrt(2)) > ((2-sigma)/sigma)^2."""
    if m < 1:
        raise ValueError("mode index must be >= 1")
    x = params.ell * m * math.sqrt(2.0)
    return x / math.tanh(x) > ((2.0 - params.sigma) / params.sigma) ** 2


@dataclass(frozen=True)
class SpectralPoint:
    """One eigenvalue of the y-profile problem at x-mode m."""

    m: int
    lam: float
    case_tag: str
    coeffs: tuple
    parity: str = "even"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"eigenvalue must be positive, got {self.lam}")


class ModeFunction:
    """Evaluable y-profile with derivatives up to order 3.

    The 2D mode is phi(y) * sin(m x).  `profile` maps (t, order) -> values;
    for even modes it is defined on [0, ell] and mirrored, otherwise it covers
    the whole interval.
    """

    def __init__(self, params: PlateParams, m: int, origin: str, profile, even: bool = True):
        self.params = params
        self.m = m
        self.origin = origin
        self._profile = profile
        self.even = even

    def __call__(self, y, order: int = 0):
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        if self.even:
            v = self._profile(np.abs(y), order)
            if order % 2 == 1:
                v = v * np.sign(y)
        else:
            v = self._profile(y, order)
        return float(v[0]) if scalar else v

    def scaled(self, factor: float) -> "ModeFunction":
        prof = self._profile
        return ModeFunction(
            self.params, self.m, self.origin,
            lambda t, order, _p=prof, _f=factor: _f * _p(t, order),
            even=self.even,
        )
