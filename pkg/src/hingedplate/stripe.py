"""Semi-analytic even-branch spectrum for two-material stripe densities.

On each constant piece of the density the profile equation
phi'''' - 2 m^2 phi'' + m^4 phi = lambda p phi has an explicit basis of
hyperbolic/trigonometric functions; the eigenvalues are the zeros of the
determinant of the linear system collecting the two free-edge conditions at
y = ell and the four matching conditions at the interface.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateCaseError,
    ModeFunction,
    NoEigenvalueError,
    NonSimpleRootError,
    PlateParams,
    SpectralPoint,
    TwoMaterialWeight,
)
from .quad import make_grid

CASE_BAND = 1e-9
SCAN_POINTS = 2000
BISECT_RTOL = 1e-10


@dataclass(frozen=True)
class BranchRoots:
    """Characteristic roots of the piecewise profile equation."""

    eta_alpha: float
    eta_beta: float
    om_alpha: float
    om_beta: float
    case_tag: str


def classify_case(lam: float, m: int, w: TwoMaterialWeight, tol: float = CASE_BAND) -> str:
    """Classify lambda against the two case boundaries m^4 = lambda*beta and
    m^4 = lambda*alpha (relative tolerance band `tol`)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    m4 = float(m) ** 4
    band = tol * m4
    if abs(lam * w.beta - m4) <= band:
        return "b"
    if abs(lam * w.alpha - m4) <= band:
        return "d"
    if lam * w.beta < m4:
        return "a"
    if lam * w.alpha > m4:
        return "e"
    return "c"


def branch_roots(lam: float, m: int, w: TwoMaterialWeight) -> BranchRoots:
    m2 = float(m) ** 2
    sa = np.sqrt(lam * w.alpha)
    sb = np.sqrt(lam * w.beta)
    return BranchRoots(
        eta_alpha=float(np.sqrt(m2 + sa)),
        eta_beta=float(np.sqrt(m2 + sb)),
        om_alpha=float(np.sqrt(abs(m2 - sa))),
        om_beta=float(np.sqrt(abs(m2 - sb))),
        case_tag=classify_case(lam, m, w),
    )


# ---------------------------------------------------------------------------
# basis functions
#
# Hyperbolic columns are rescaled by exp(-k*ell): cosh(k y) e^{-k ell} =
# (e^{k(y-ell)} + e^{-k(y+ell)})/2 stays bounded for any k*ell, and column
# scaling by a positive constant does not move the determinant's zeros.


def _cosh_s(k, y, ell):
    return 0.5 * (np.exp(k * (y - ell)) + np.exp(-k * (y + ell)))


def _sinh_s(k, y, ell):
    return 0.5 * (np.exp(k * (y - ell)) - np.exp(-k * (y + ell)))


def _hyp_cosh(k, ell, stabilize=True):
    if stabilize:
        return lambda n, y: k ** n * (_cosh_s if n % 2 == 0 else _sinh_s)(k, y, ell)
    return lambda n, y: k ** n * (np.cosh if n % 2 == 0 else np.sinh)(k * y)


def _hyp_sinh(k, ell, stabilize=True):
    if stabilize:
        return lambda n, y: k ** n * (_sinh_s if n % 2 == 0 else _cosh_s)(k, y, ell)
    return lambda n, y: k ** n * (np.sinh if n % 2 == 0 else np.cosh)(k * y)


def _trig_cos(k):
    def d(n, y):
        r = n % 4
        v = np.cos(k * y) if r in (0, 2) else np.sin(k * y)
        s = 1.0 if r in (0, 3) else -1.0
        return s * k ** n * v if r else k ** n * v

    return d


def _trig_sin(k):
    def d(n, y):
        r = n % 4
        v = np.sin(k * y) if r in (0, 2) else np.cos(k * y)
        s = -1.0 if r in (2, 3) else 1.0
        return s * k ** n * v

    return d


def _basis(lam, m, w, params, stabilize=True):
    """Case-appropriate basis columns: 4 for the outer piece, 2 for the inner.

    `lam` may be an array; all entries must share one case tag.
    """
    arr = np.asarray(lam, dtype=float)
    case = classify_case(float(arr.flat[0]), m, w)
    if case in ("b", "d"):
        raise DegenerateCaseError(
            f"lambda = {float(arr.flat[0])} lies on the case-{case} boundary"
        )
    m2 = float(m) ** 2
    ell = params.ell
    sa = np.sqrt(arr * w.alpha)
    sb = np.sqrt(arr * w.beta)
    eta_b = np.sqrt(m2 + sb)
    eta_a = np.sqrt(m2 + sa)
    om_b = np.sqrt(np.abs(m2 - sb))
    om_a = np.sqrt(np.abs(m2 - sa))
    if case == "a":
        outer = [
            _hyp_cosh(eta_b, ell, stabilize),
            _hyp_sinh(eta_b, ell, stabilize),
            _hyp_cosh(om_b, ell, stabilize),
            _hyp_sinh(om_b, ell, stabilize),
        ]
    else:
        outer = [
            _hyp_cosh(eta_b, ell, stabilize),
            _hyp_sinh(eta_b, ell, stabilize),
            _trig_cos(om_b),
            _trig_sin(om_b),
        ]
    inner = [_hyp_cosh(eta_a, ell, stabilize)]
    if case == "e":
        inner.append(_trig_cos(om_a))
    else:
        inner.append(_hyp_cosh(om_a, ell, stabilize))
    return outer, inner, case


def _matrix_batch(lam, m, params, w, stabilize=True, scale_rows=True):
    """Stack of secular matrices, shape (N, 6, 6), for a batch of lambdas
    sharing one case tag."""
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    outer, inner, _ = _basis(arr, m, w, params, stabilize)
    sig = params.sigma
    m2 = float(m) ** 2
    ell, z = params.ell, w.z
    M = np.zeros((arr.size, 6, 6))
    for j, col in enumerate(outer):
        M[:, 0, j] = col(2, ell) - sig * m2 * col(0, ell)
        M[:, 1, j] = col(3, ell) - (2.0 - sig) * m2 * col(1, ell)
        for n in range(4):
            M[:, 2 + n, j] = col(n, z)
    for j, col in enumerate(inner):
        for n in range(4):
            M[:, 2 + n, 4 + j] = -col(n, z)
    if scale_rows:
        s = np.max(np.abs(M), axis=2, keepdims=True)
        s[s == 0.0] = 1.0
        M = M / s
    return M


def secular_matrix(lam: float, m: int, params: PlateParams, w: TwoMaterialWeight,
                   stabilize: bool = True, scale_rows: bool = True) -> np.ndarray:
    """6x6 secular matrix: rows are the two free-edge conditions at ell and
    the four interface matching conditions; columns (a1,b1,c1,d1,a2,c2)."""
    if w.is_unweighted:
        raise DegenerateCaseError("unweighted density: use unweighted_first")
    return _matrix_batch(lam, m, params, w, stabilize, scale_rows)[0]


def secular_det(lam, m: int, params: PlateParams, w: TwoMaterialWeight):
    """Determinant of the scaled secular matrix (batch-capable in lambda)."""
    M = _matrix_batch(lam, m, params, w)
    d = np.linalg.det(M)
    return float(d[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else d


def _bisect(f, a, b, fa, fb, rtol=BISECT_RTOL):
    for _ in range(200):
        mid = 0.5 * (a + b)
        if b - a <= rtol * abs(mid):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fa < 0.0) != (fm < 0.0):
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def _scan_roots(m, params, w, lo, hi, npts=SCAN_POINTS):
    """Sign-change scan of the secular determinant on (lo, hi), refined by
    bisection.  The interval must lie inside a single case region."""
    if hi <= lo:
        return []
    grid = np.linspace(lo, hi, npts)
    dets = secular_det(grid, m, params, w)
    sgn = np.sign(dets)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    f = lambda x: secular_det(x, m, params, w)
    return [_bisect(f, grid[i], grid[i + 1], dets[i], dets[i + 1]) for i in idx]


def _null_vector(M: np.ndarray) -> np.ndarray:
    """Null direction of a (nearly) singular matrix: pin the column of
    largest norm to 1 and least-squares-solve for the rest."""
    norms = np.linalg.norm(M, axis=0)
    j = int(np.argmax(norms))
    others = [k for k in range(M.shape[1]) if k != j]
    sol, _, rank, sv = np.linalg.lstsq(M[:, others], -M[:, j], rcond=None)
    if sv[-1] < 1e-8 * sv[0]:
        raise NonSimpleRootError("secular matrix null space is not one-dimensional")
    x = np.empty(M.shape[1])
    x[j] = 1.0
    x[others] = sol
    x /= np.linalg.norm(x)
    res = np.linalg.norm(M @ x) / np.linalg.norm(M)
    if res > 1e-8:
        raise NonSimpleRootError(f"null-vector residual {res:.2e} exceeds 1e-8")
    return x


def _spectral_point(lam, m, params, w) -> SpectralPoint:
    case = classify_case(lam, m, w)
    M = _matrix_batch(lam, m, params, w)[0]
    x = _null_vector(M)
    return SpectralPoint(m=m, lam=float(lam), case_tag=case, coeffs=tuple(x))


def _case_intervals(m, w, lam_max, params):
    """Case-a / case-c / case-e scan intervals below lam_max, keeping clear
    of the degenerate bands around m^4/beta and m^4/alpha."""
    m4 = float(m) ** 4
    gap = 2.0 * CASE_BAND * m4
    lo = 0.5 * (1.0 - params.sigma ** 2) * m4 / w.beta
    cuts = [lo, m4 / w.beta, m4 / w.alpha, lam_max]
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        a2, b2 = a + gap, min(b, lam_max) - gap
        if b2 > a2:
            out.append((a2, b2))
        if b >= lam_max:
            break
    return out


def first_even_eigenvalue(m: int, params: PlateParams, w: TwoMaterialWeight) -> SpectralPoint:
    """Smallest even-branch eigenvalue of the stripe problem at x-mode m.

    The root is expected in (m^4/beta, m^4); the interval below m^4/beta is
    scanned anyway and a root there is reported as unexpected.
    """
    if w.is_unweighted:
        return unweighted_first(m, params)
    m4 = float(m) ** 4
    intervals = _case_intervals(m, w, m4 * (1.0 - 2.0 * CASE_BAND), params)
    roots_a = _scan_roots(m, params, w, *intervals[0])
    if roots_a:
        warnings.warn(
            f"unexpected even-branch root {roots_a[0]} below m^4/beta at m={m}",
            stacklevel=2,
        )
        return _spectral_point(roots_a[0], m, params, w)
    if len(intervals) < 2:
        raise NoEigenvalueError(f"empty scan interval for m={m}")
    roots_c = _scan_roots(m, params, w, *intervals[1])
    if not roots_c:
        lo, hi = intervals[1]
        raise NoEigenvalueError(
            f"no sign change of the secular determinant in ({lo}, {hi}) "
            f"for m={m}, alpha={w.alpha}, beta={w.beta}, ell={params.ell}"
        )
    return _spectral_point(roots_c[0], m, params, w)


def even_eigenvalues_below(m: int, params: PlateParams, w: TwoMaterialWeight,
                           lam_max: float) -> list:
    """All even-branch eigenvalues below lam_max, increasing.  Checks the
    second-eigenvalue bound lambda_2 > m^4/alpha when two roots are found."""
    if lam_max <= float(m) ** 4 / w.alpha:
        raise ValueError("lam_max must exceed m^4/alpha")
    roots = []
    for lo, hi in _case_intervals(m, w, lam_max, params):
        roots.extend(_scan_roots(m, params, w, lo, hi))
    roots.sort()
    if len(roots) >= 2 and roots[1] <= float(m) ** 4 / w.alpha:
        raise NoEigenvalueError(
            f"second even root {roots[1]} violates the m^4/alpha bound"
        )
    return [_spectral_point(r, m, params, w) for r in roots]


def mode_function(sp: SpectralPoint, params: PlateParams, w: TwoMaterialWeight) -> ModeFunction:
    """Eigenfunction profile for a stripe spectral point, normalized to
    int p phi^2 = 1 over (-ell, ell) with phi(0) > 0."""
    if sp.case_tag == "unweighted":
        return _unweighted_mode(sp, params)
    outer, inner, case = _basis(sp.lam, m=sp.m, w=w, params=params)
    co = np.asarray(sp.coeffs)
    z = w.z

    def profile(t, order):
        t = np.asarray(t, dtype=float)
        is_in = t < z
        out = np.zeros_like(t)
        for j, col in enumerate(inner):
            out += np.where(is_in, co[4 + j] * col(order, t), 0.0)
        for j, col in enumerate(outer):
            out += np.where(is_in, 0.0, co[j] * col(order, t))
        return out

    phi = ModeFunction(params, sp.m, f"stripe-case-{case}", profile, even=True)
    return _normalize(phi, w, params)


def _normalize(phi: ModeFunction, w, params: PlateParams) -> ModeFunction:
    pw = w.as_piecewise()
    grid = make_grid(pw.breakpoints, 2000)
    pv = np.asarray(pw.values)[grid.piece_index]
    vals = phi(grid.nodes)
    nrm2 = 2.0 * grid.integrate(pv * vals ** 2)
    s = 1.0 / np.sqrt(nrm2)
    if phi(0.0) < 0.0:
        s = -s
    return phi.scaled(s)


# ---------------------------------------------------------------------------
# unweighted path (alpha = beta = 1): two-coefficient even ansatz


def _unweighted_matrix(lam, m, params, stabilize=True):
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    m2 = float(m) ** 2
    sl = np.sqrt(arr)
    eta = np.sqrt(m2 + sl)
    om = np.sqrt(m2 - sl)
    cols = [_hyp_cosh(eta, params.ell, stabilize), _hyp_cosh(om, params.ell, stabilize)]
    sig = params.sigma
    M = np.zeros((arr.size, 2, 2))
    for j, col in enumerate(cols):
        M[:, 0, j] = col(2, params.ell) - sig * m2 * col(0, params.ell)
        M[:, 1, j] = col(3, params.ell) - (2.0 - sig) * m2 * col(1, params.ell)
    s = np.max(np.abs(M), axis=2, keepdims=True)
    s[s == 0.0] = 1.0
    return M / s


def unweighted_det(lam, m: int, params: PlateParams):
    d = np.linalg.det(_unweighted_matrix(lam, m, params))
    return float(d[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else d


def unweighted_first(m: int, params: PlateParams) -> SpectralPoint:
    """First eigenvalue mu_{m,1} of the homogeneous problem, bracketed in
    ((1-sigma^2) m^4, m^4)."""
    if m < 1:
        raise ValueError("mode index must be >= 1")
    m4 = float(m) ** 4
    lo = (1.0 - params.sigma ** 2) * m4 * (1.0 + 1e-12)
    hi = m4 * (1.0 - 1e-12)
    grid = np.linspace(lo, hi, SCAN_POINTS)
    dets = unweighted_det(grid, m, params)
    sgn = np.sign(dets)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if len(idx) == 0:
        raise NoEigenvalueError(f"no unweighted root found in ({lo}, {hi}) for m={m}")
    i = idx[0]
    f = lambda x: unweighted_det(x, m, params)
    lam = _bisect(f, grid[i], grid[i + 1], dets[i], dets[i + 1])
    M = _unweighted_matrix(lam, m, params)[0]
    a, c = M[0, 1], -M[0, 0]
    nrm = np.hypot(a, c)
    coeffs = (a / nrm, 0.0, c / nrm, 0.0, 0.0, 0.0)
    return SpectralPoint(m=m, lam=float(lam), case_tag="unweighted", coeffs=coeffs)


def _unweighted_mode(sp: SpectralPoint, params: PlateParams) -> ModeFunction:
    from .core import unit_weight

    m2 = float(sp.m) ** 2
    sl = np.sqrt(sp.lam)
    cols = [
        _hyp_cosh(np.sqrt(m2 + sl), params.ell),
        _hyp_cosh(np.sqrt(m2 - sl), params.ell),
    ]
    a, c = sp.coeffs[0], sp.coeffs[2]

    def profile(t, order):
        t = np.asarray(t, dtype=float)
        return a * cols[0](order, t) + c * cols[1](order, t)

    phi = ModeFunction(params, sp.m, "unweighted", profile, even=True)
    return _normalize(phi, unit_weight(params.ell), params)


def closed_form_unweighted_mode(m: int, params: PlateParams, mu: float) -> ModeFunction:
    """The explicit first-mode profile of the homogeneous plate:
    phi(y) = [sqrt(mu) - (1-sigma)m^2] cosh(y eta)/cosh(ell eta)
           + [sqrt(mu) + (1-sigma)m^2] cosh(y omega)/cosh(ell omega),
    with eta = sqrt(m^2 + sqrt(mu)), omega = sqrt(m^2 - sqrt(mu)).
    Unnormalized (scale-free uses only)."""
    m2 = float(m) ** 2
    smu = np.sqrt(mu)
    eta = np.sqrt(m2 + smu)
    om = np.sqrt(m2 - smu)
    ca = (smu - (1.0 - params.sigma) * m2) / np.cosh(eta * params.ell)
    cb = (smu + (1.0 - params.sigma) * m2) / np.cosh(om * params.ell)

    def profile(t, order):
        t = np.asarray(t, dtype=float)
        fa = (np.cosh if order % 2 == 0 else np.sinh)(eta * t)
        fb = (np.cosh if order % 2 == 0 else np.sinh)(om * t)
        return ca * eta ** order * fa + cb * om ** order * fb

    return ModeFunction(params, m, "closed-form", profile, even=True)
