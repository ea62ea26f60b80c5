"""Conforming cubic-Hermite discretization of the weak profile eigenproblem.

Independent oracle for the secular and resolvent solvers.  The bilinear form
int (phi'' psi'' + 2 m^2 (1-sigma) phi' psi' - sigma m^2 (phi'' psi + phi psi'')
     + m^4 phi psi) dy
is assembled element-exactly (4-point Gauss, exact for these polynomial
integrands); the free-edge conditions are natural for this form, so nothing
is imposed at the endpoints.

Numerical note: for narrow plates the first eigenvalue sits many orders of
magnitude below the bending scale 1/h^3 of the stiffness entries, so the
plain quadratic form x'Kx loses it to cancellation.  The Rayleigh quotient
is therefore evaluated in the algebraically identical sum-of-squares form
int (phi'' - sigma m^2 phi)^2 + 2 m^2 (1-sigma) phi'^2 + (1-sigma^2) m^4 phi^2
at the Gauss points, which is cancellation-free; and the mesh is capped so
the Cholesky factorization of K stays well inside double precision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .core import PlateError, PlateParams
from .quad import symmetric_breakpoints

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


def _shape_values(h: float):
    """Hermite shape functions and derivatives at the Gauss points of one
    element of length h; arrays of shape (4 points, 4 functions)."""
    xi = 0.5 * (_GAUSS_X + 1.0)
    one = np.ones_like(xi)
    N = np.stack([
        1.0 - 3.0 * xi ** 2 + 2.0 * xi ** 3,
        h * (xi - 2.0 * xi ** 2 + xi ** 3),
        3.0 * xi ** 2 - 2.0 * xi ** 3,
        h * (xi ** 3 - xi ** 2),
    ], axis=1)
    dN = np.stack([
        (-6.0 * xi + 6.0 * xi ** 2) / h,
        one - 4.0 * xi + 3.0 * xi ** 2,
        (6.0 * xi - 6.0 * xi ** 2) / h,
        3.0 * xi ** 2 - 2.0 * xi,
    ], axis=1)
    d2N = np.stack([
        (-6.0 + 12.0 * xi) / h ** 2,
        (-4.0 + 6.0 * xi) / h,
        (6.0 - 12.0 * xi) / h ** 2,
        (6.0 * xi - 2.0) / h,
    ], axis=1)
    return N, dN, d2N


def _hermite_matrices(h: float):
    """Element matrices on [0, h] for the four bilinear blocks:
    (N''_i, N''_j), (N'_i, N'_j), (N_i, N_j), (N''_i, N_j)."""
    N, dN, d2N = _shape_values(h)
    w = 0.5 * h * _GAUSS_W
    d2d2 = (d2N * w[:, None]).T @ d2N
    d1d1 = (dN * w[:, None]).T @ dN
    d0d0 = (N * w[:, None]).T @ N
    d2d0 = (d2N * w[:, None]).T @ N
    return d2d2, d1d1, d0d0, d2d0


@dataclass
class DiscreteForms:
    """Assembled stiffness/mass pair with banded stiffness for factoring."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    K_band: np.ndarray  # upper banded form, bandwidth 3
    nodes: np.ndarray
    parity: str | None
    m: int
    sigma: float
    elem_dofs: np.ndarray    # (nel, 4) global dof per element, -1 = removed
    elem_h: np.ndarray       # element lengths
    elem_dens: np.ndarray    # density per element


def _mesh(pw, n: int, parity):
    if parity == "even":
        bp = np.asarray(pw.breakpoints)
    else:
        bp = symmetric_breakpoints(pw)
    total = bp[-1] - bp[0]
    nodes = [np.array([bp[0]])]
    dens = []
    for i in range(len(bp) - 1):
        length = bp[i + 1] - bp[i]
        ni = max(1, round(n * length / total))
        nodes.append(np.linspace(bp[i], bp[i + 1], ni + 1)[1:])
        mid = 0.5 * (bp[i] + bp[i + 1])
        dens.extend([float(pw(mid))] * ni)
    return np.concatenate(nodes), np.asarray(dens)


def assemble_forms(p, m: int, params: PlateParams, n: int,
                   parity: str | None = None) -> DiscreteForms:
    """Assemble the discrete scalar product K and weighted mass M.

    parity='even' meshes [0, ell] only and removes the slope dof at y = 0,
    which restricts the discrete space to even profiles.
    """
    if n < 8:
        raise ValueError("need at least 8 elements")
    pw = p.as_piecewise()
    if abs(pw.ell - params.ell) > 1e-12 * params.ell:
        raise ValueError("density and plate have different half-widths")
    nodes, dens = _mesh(pw, n, parity)
    nel = len(nodes) - 1
    sig, m2 = params.sigma, float(m) ** 2
    rows, cols, kv, mv = [], [], [], []
    hseen = {}
    elem_h = np.diff(nodes)
    for e in range(nel):
        key = round(elem_h[e], 14)
        if key not in hseen:
            d2d2, d1d1, d0d0, d2d0 = _hermite_matrices(elem_h[e])
            hseen[key] = (
                d2d2 + 2.0 * m2 * (1.0 - sig) * d1d1
                - sig * m2 * (d2d0 + d2d0.T) + m2 ** 2 * d0d0,
                d0d0,
            )
        Ke, Me0 = hseen[key]
        dofs = [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
        for a in range(4):
            for b in range(4):
                rows.append(dofs[a])
                cols.append(dofs[b])
                kv.append(Ke[a, b])
                mv.append(dens[e] * Me0[a, b])
    ndof = 2 * (nel + 1)
    K = sp.coo_matrix((kv, (rows, cols)), shape=(ndof, ndof)).tocsr()
    M = sp.coo_matrix((mv, (rows, cols)), shape=(ndof, ndof)).tocsr()
    elem_dofs = np.array([[2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
                          for e in range(nel)])
    if parity == "even":
        keep = np.ones(ndof, dtype=bool)
        keep[1] = False  # slope at y = 0 must vanish for an even profile
        K = K[keep][:, keep]
        M = M[keep][:, keep]
        remap = np.cumsum(keep) - 1
        elem_dofs = np.where(keep[elem_dofs], remap[elem_dofs], -1)
    return DiscreteForms(
        K=K.tocsr(), M=M.tocsr(), K_band=_to_band(K.tocoo(), 3),
        nodes=nodes, parity=parity, m=m, sigma=params.sigma,
        elem_dofs=elem_dofs, elem_h=elem_h, elem_dens=dens,
    )


def _to_band(coo: sp.coo_matrix, bw: int) -> np.ndarray:
    ab = np.zeros((bw + 1, coo.shape[0]))
    r, c, d = coo.row, coo.col, coo.data
    mask = (c >= r) & (c - r <= bw)
    np.add.at(ab, (bw + r[mask] - c[mask], c[mask]), d[mask])
    return ab


def rayleigh(forms: DiscreteForms, x: np.ndarray) -> float:
    """Cancellation-free Rayleigh quotient of a dof vector.

    Evaluates phi, phi', phi'' at the element Gauss points and sums the
    pointwise-nonnegative split of the energy; exact quadrature makes this
    algebraically equal to (x'Kx)/(x'Mx).
    """
    m2 = float(forms.m) ** 2
    sig = forms.sigma
    xe = np.where(forms.elem_dofs >= 0, x[np.maximum(forms.elem_dofs, 0)], 0.0)
    num = 0.0
    den = 0.0
    hseen = {}
    for key in np.unique(np.round(forms.elem_h, 14)):
        hseen[key] = _shape_values(key)
    for e in range(len(forms.elem_h)):
        N, dN, d2N = hseen[round(forms.elem_h[e], 14)]
        w = 0.5 * forms.elem_h[e] * _GAUSS_W
        v0 = N @ xe[e]
        v1 = dN @ xe[e]
        v2 = d2N @ xe[e]
        num += w @ ((v2 - sig * m2 * v0) ** 2
                    + 2.0 * m2 * (1.0 - sig) * v1 ** 2
                    + (1.0 - sig ** 2) * m2 ** 2 * v0 ** 2)
        den += forms.elem_dens[e] * (w @ v0 ** 2)
    return num / den


def _rayleigh_vec(forms: DiscreteForms, x: np.ndarray) -> float:
    """Vectorized version of `rayleigh` (uniform-ish meshes)."""
    m2 = float(forms.m) ** 2
    sig = forms.sigma
    xe = np.where(forms.elem_dofs >= 0, x[np.maximum(forms.elem_dofs, 0)], 0.0)
    keys = np.round(forms.elem_h, 14)
    num = 0.0
    den = 0.0
    for key in np.unique(keys):
        sel = keys == key
        N, dN, d2N = _shape_values(key)
        w = 0.5 * key * _GAUSS_W
        sub = xe[sel]                     # (ne, 4)
        v0 = sub @ N.T                    # (ne, 4 points)
        v1 = sub @ dN.T
        v2 = sub @ d2N.T
        num += np.sum(((v2 - sig * m2 * v0) ** 2
                       + 2.0 * m2 * (1.0 - sig) * v1 ** 2
                       + (1.0 - sig ** 2) * m2 ** 2 * v0 ** 2) @ w)
        den += np.sum((v0 ** 2 @ w) * np.asarray(forms.elem_dens)[sel])
    return num / den


def smallest_eig(forms: DiscreteForms, tol: float = 1e-12,
                 deflate=None, max_iter: int = 5000):
    """Smallest generalized eigenvalue of K x = lambda M x by inverse power
    iteration on the banded Cholesky factorization of K.

    `deflate` is an optional list of already-found eigenvectors; iterates are
    kept M-orthogonal to them, yielding the next eigenvalue up.
    """
    try:
        cb = sla.cholesky_banded(forms.K_band, lower=False)
    except np.linalg.LinAlgError as exc:
        raise PlateError("stiffness matrix is not positive definite") from exc
    ndof = forms.K.shape[0]
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(ndof)
    deflate = deflate or []

    def project(v):
        for d in deflate:
            v = v - (d @ (forms.M @ v)) * d
        return v

    x = project(x)
    x /= np.sqrt(x @ (forms.M @ x))
    lam = np.inf
    for _ in range(max_iter):
        y = sla.cho_solve_banded((cb, False), forms.M @ x)
        y = project(y)
        y /= np.sqrt(y @ (forms.M @ y))
        lam_new = _rayleigh_vec(forms, y)
        done = abs(lam_new - lam) < tol * abs(lam_new)
        x, lam = y, lam_new
        if done:
            break
    else:
        raise PlateError("inverse power iteration on discrete forms did not converge")
    if x[0] < 0:
        x = -x
    return float(lam), x


def smallest_eigs(forms: DiscreteForms, k: int = 2, tol: float = 1e-12):
    """First k generalized eigenvalues, via M-orthogonal deflation."""
    out, vecs = [], []
    for _ in range(k):
        lam, v = smallest_eig(forms, tol=tol, deflate=vecs)
        out.append(lam)
        vecs.append(v)
    return out, vecs


_COND_CAP = 3e12


def safe_element_count(p, m: int, params: PlateParams, n: int) -> int:
    """Cap the element count so cond(K) ~ c/(lambda h^4) stays moderate.

    Narrow plates put the first eigenvalue far below the bending scale of
    the stiffness entries; meshes finer than the cap would break the
    Cholesky factorization without improving accuracy.
    """
    beta = max(p.as_piecewise().values)
    lam_lb = (1.0 - params.sigma ** 2) * float(m) ** 4 / beta
    h_min = (2.7 / (_COND_CAP * lam_lb)) ** 0.25
    n_cap = max(8, int(2.0 * params.ell / h_min))
    return min(n, n_cap)


def fd_first_eigen(p, m: int, params: PlateParams, n: int = 2000):
    """First eigenvalue with Richardson extrapolation from meshes (n1, 2 n1),
    n1 = conditioning-capped n/2.

    Returns (extrapolated, lam_n1, lam_2n1); the discretization converges at
    fourth order, so the extrapolant is (16 lam_2n - lam_n)/15.
    """
    n1 = max(8, safe_element_count(p, m, params, n) // 2)
    lam_1, _ = smallest_eig(assemble_forms(p, m, params, n1))
    lam_2, _ = smallest_eig(assemble_forms(p, m, params, 2 * n1))
    return (16.0 * lam_2 - lam_1) / 15.0, lam_1, lam_2
