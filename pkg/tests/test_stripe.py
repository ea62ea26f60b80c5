import warnings

import numpy as np
import pytest

from hingedplate import (
    DegenerateCaseError,
    classify_case,
    even_eigenvalues_below,
    first_even_eigenvalue,
    mass_normalized_stripe,
    mode_function,
    secular_det,
    unweighted_first,
)
from hingedplate.quad import grid_weight_values, make_grid, symmetric_breakpoints
from hingedplate.stripe import closed_form_unweighted_mode

# first eigenvalue of the homogeneous narrow plate at m = 1; value pinned by
# agreement of the determinant, resolvent-iteration, and finite-element
# solvers to ~1e-10
MU11_NARROW = 0.9600093550736986


def test_unweighted_interval(narrow_plate):
    for m in (1, 2, 3, 5):
        sp = unweighted_first(m, narrow_plate)
        lo = (1.0 - narrow_plate.sigma ** 2) * m ** 4
        assert lo < sp.lam < m ** 4


def test_unweighted_reference_value(narrow_plate):
    sp = unweighted_first(1, narrow_plate)
    assert sp.lam == pytest.approx(MU11_NARROW, rel=1e-10)


def test_closed_form_mode_satisfies_free_edges(narrow_plate, wide_plate):
    for params in (narrow_plate, wide_plate):
        sig, ell = params.sigma, params.ell
        for m in (1, 3):
            mu = unweighted_first(m, params).lam
            phi = closed_form_unweighted_mode(m, params, mu)
            scale = max(abs(phi(ell, 2)), m ** 2 * abs(phi(ell)))
            bc1 = phi(ell, 2) - sig * m ** 2 * phi(ell)
            bc2 = phi(ell, 3) - (2.0 - sig) * m ** 2 * phi(ell, 1)
            assert abs(bc1) < 1e-9 * scale
            assert abs(bc2) < 1e-9 * scale * m


def test_case_classification():
    w = mass_normalized_stripe(0.5, 1.5, 0.5)
    m4 = 1.0
    assert classify_case(0.5 * m4 / 1.5, 1, w) == "a"
    assert classify_case(0.5 * (m4 / 1.5 + m4 / 0.5), 1, w) == "c"
    assert classify_case(3.0 * m4 / 0.5, 1, w) == "e"
    assert classify_case(m4 / 1.5, 1, w) in "bd"


def test_secular_rejects_degenerate_band(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    with pytest.raises(DegenerateCaseError):
        secular_det(1.0 / 1.5, 1, narrow_plate, w)


def test_no_root_below_lower_bound(narrow_plate):
    # f(lambda) keeps one sign on the all-hyperbolic interval
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    lam = np.linspace(0.05, 1.0 / 1.5 * 0.999, 200)
    det = secular_det(lam, 1, narrow_plate, w)
    assert np.all(det != 0.0)
    assert np.all(np.sign(det) == np.sign(det[0]))


def test_first_eigenvalue_bracketed_by_sign_change(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    sp = first_even_eigenvalue(1, narrow_plate, w)
    assert 1.0 / 1.5 < sp.lam < 1.0
    d_lo = secular_det(sp.lam * (1.0 - 1e-6), 1, narrow_plate, w)
    d_hi = secular_det(sp.lam * (1.0 + 1e-6), 1, narrow_plate, w)
    assert d_lo * d_hi < 0.0


def test_first_eigenvalues_against_reference(narrow_plate):
    # six-figure values for the two reference stripes at m = 1
    w1 = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    w2 = mass_normalized_stripe(0.5, 20.0, narrow_plate.ell)
    assert first_even_eigenvalue(1, narrow_plate, w1).lam == pytest.approx(0.959999, rel=1e-4)
    assert first_even_eigenvalue(1, narrow_plate, w2).lam == pytest.approx(0.959982, rel=1e-4)


def test_second_even_root_above_upper_band(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    lam_max = 40.0 / narrow_plate.ell ** 4
    pts = even_eigenvalues_below(1, narrow_plate, w, lam_max)
    assert len(pts) >= 2
    assert pts[0].lam < pts[1].lam
    assert pts[1].lam > 1.0 / 0.5


def test_mode_function_interface_continuity(narrow_plate):
    w = mass_normalized_stripe(0.5, 20.0, narrow_plate.ell)
    sp = first_even_eigenvalue(1, narrow_plate, w)
    phi = mode_function(sp, narrow_plate, w)
    z = w.z
    eps = 1e-9 * narrow_plate.ell
    for order in range(4):
        left = phi(z - eps, order)
        right = phi(z + eps, order)
        scale = max(abs(left), abs(right), 1e-30)
        assert abs(left - right) < 1e-5 * scale


def test_mode_function_normalized_and_positive(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    sp = first_even_eigenvalue(1, narrow_plate, w)
    phi = mode_function(sp, narrow_plate, w)
    g = make_grid(symmetric_breakpoints(w), 800)
    pv = grid_weight_values(w, g)
    assert g.integrate(pv * phi(g.nodes) ** 2) == pytest.approx(1.0, rel=1e-6)
    assert phi(0.0) > 0.0
    assert np.min(phi(np.linspace(-w.ell, w.ell, 501))) > 0.0


def test_case_a_root_is_reported(narrow_plate):
    # for beta close to 1 the first root drops below m^4/beta and the solver
    # reports it instead of failing
    w = mass_normalized_stripe(0.9, 1.04, narrow_plate.ell)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        sp = first_even_eigenvalue(1, narrow_plate, w)
    assert sp.lam < 1.0 / 1.04
    assert sp.case_tag == "a"
    assert any("case a" in str(r.message) or "below" in str(r.message) for r in rec)
