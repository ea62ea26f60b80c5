import numpy as np
import pytest

from hingedplate import mass_normalized_stripe
from hingedplate.quad import grid_weight_values, make_grid, symmetric_breakpoints


def test_simpson_exact_on_cubics():
    g = make_grid((0.0, 1.0), 10)
    for k in range(4):
        exact = 1.0 / (k + 1)
        assert g.integrate(g.nodes ** k) == pytest.approx(exact, rel=1e-14)


def test_piecewise_grid_respects_breakpoints():
    g = make_grid((0.0, 0.3, 1.0), 20)
    # the interface node is duplicated so one-sided data can be carried
    assert np.sum(np.isclose(g.nodes, 0.3)) == 2
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    assert np.all(np.diff(g.nodes) >= 0)
    # discontinuous piecewise-cubic integrand, one-sided at the interface
    f = np.where(g.piece_index == 0, g.nodes ** 3, (1.0 - g.nodes) ** 3)
    exact = 0.3 ** 4 / 4.0 + 0.7 ** 4 / 4.0
    assert g.integrate(f) == pytest.approx(exact, rel=1e-14)


def test_integrate_convergence_smooth():
    exact = np.sin(1.0)
    errs = []
    for n in (8, 16):
        g = make_grid((0.0, 1.0), n)
        errs.append(abs(g.integrate(np.cos(g.nodes)) - exact))
    assert errs[1] < errs[0] / 10.0  # fourth-order composite rule


def test_grid_weight_values_one_sided():
    w = mass_normalized_stripe(0.5, 1.5, 1.0)
    bp = symmetric_breakpoints(w)
    g = make_grid(bp, 40)
    pv = grid_weight_values(w, g)
    # mass normalization reproduced by the quadrature
    assert g.integrate(pv) == pytest.approx(2.0 * 1.0, rel=1e-14)
    # duplicated interface nodes carry the left and right density
    at_z = np.isclose(g.nodes, w.z)
    assert sorted(pv[at_z]) == [0.5, 1.5]


def test_symmetric_breakpoints_mirror():
    w = mass_normalized_stripe(0.5, 20.0, 0.5)
    bp = symmetric_breakpoints(w)
    np.testing.assert_allclose(bp, [-0.5, -w.z, 0.0, w.z, 0.5])
