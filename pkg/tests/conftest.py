import math

import numpy as np
import pytest

from hingedplate import PlateParams, make_plate

NARROW_ELL = math.pi / 150


@pytest.fixture(scope="session")
def narrow_plate() -> PlateParams:
    """The narrow-plate configuration used by most reference values."""
    return make_plate(NARROW_ELL, 0.2)


@pytest.fixture(scope="session")
def wide_plate() -> PlateParams:
    return make_plate(0.5, 0.2)


def fd4_residual(solver, fv, f_exact, m, ell, knots=()):
    """Strong-form residual of a resolvent solution, evaluated on grid nodes.

    w'''' is built by a fourth-order central difference of the analytic
    second-derivative samples; points are restricted to even grid indices
    (quadrature panel boundaries) inside the widest knot-free interval, so
    neither the kernel kink nor kinks of f spoil the stencil.
    """
    nodes, first = np.unique(solver.grid.nodes, return_index=True)
    h = nodes[1] - nodes[0]
    inner = np.sort(np.asarray([k for k in knots if -ell < k < ell]))
    edges = np.concatenate([[-ell], inner, [ell]])
    gaps = np.diff(edges)
    g = int(np.argmax(gaps))
    s_target = min(0.1 / m, gaps[g] / 8.0, 0.1 * ell)
    stride = max(2, 2 * round(s_target / (2.0 * h)))
    s = stride * h
    w2 = solver.solve_samples(fv, 2)[first]
    w0 = solver.solve_samples(fv, 0)[first]
    lo, hi = edges[g] + 2.5 * s, edges[g + 1] - 2.5 * s
    idx = np.arange(0, len(nodes), 2)
    idx = idx[(nodes[idx] >= lo) & (nodes[idx] <= hi)
              & (idx >= 2 * stride) & (idx < len(nodes) - 2 * stride)]
    coef = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    w4 = sum(c * w2[idx + k * stride]
             for c, k in zip(coef, (-2, -1, 0, 1, 2))) / s ** 2
    res = w4 - 2.0 * m ** 2 * w2[idx] + m ** 4 * w0[idx] - f_exact(nodes[idx])
    return np.max(np.abs(res)) / np.max(np.abs(fv))
