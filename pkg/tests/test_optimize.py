import math

import numpy as np
import pytest

from hingedplate import (
    EvenPiecewiseWeight,
    first_even_eigenvalue,
    mass_normalized_stripe,
    nested_pair,
    pattern_monotonicity_check,
    plate_first_eigenvalue,
    profile_first_eigenvalue,
    rayleigh_bound_u1,
    regime_beta_cap,
    sample_pbar_weight,
    sublevel_report,
    sweep_beta,
    sweep_m,
    unweighted_first,
    x_stripe,
)
from hingedplate.optimize import SymmetricXWeight, _crossing_hypothesis, sublevel_mask


def test_x_stripe_mass_and_symmetry():
    w = x_stripe(0.5, 1.5)
    assert w.mass() == pytest.approx(math.pi, rel=1e-14)
    assert w.is_mass_normalized()
    assert w.single_crossing()
    x = np.linspace(0.0, math.pi, 41)
    np.testing.assert_allclose(w(x), w(math.pi - x))
    # the denser block sits around the center
    assert w(math.pi / 2.0) == 1.5
    assert w(0.01) == 0.5


def test_symmetric_x_weight_validation():
    with pytest.raises(ValueError):
        SymmetricXWeight(breakpoints=(0.0, 1.0), values=(1.0,))  # wrong end
    with pytest.raises(ValueError):
        SymmetricXWeight(breakpoints=(0.0, math.pi / 2.0), values=(-1.0,))
    with pytest.raises(ValueError):
        x_stripe(1.5, 2.0)


def test_sampled_weights_are_admissible():
    rng = np.random.default_rng(7)
    alpha, beta, ell = 0.5, 1.5, 0.5
    for _ in range(20):
        p = sample_pbar_weight(alpha, beta, ell, rng)
        assert p.breakpoints[0] == 0.0 and p.breakpoints[-1] == ell
        assert 2 <= len(p.values) <= 6
        assert p.is_mass_normalized(rtol=1e-9)
        assert p.single_crossing(tol=1e-12)
        assert p.within_envelope(alpha, beta)


def test_nested_pair_is_crossing_nested():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p1, p2 = nested_pair(0.5, 1.5, 0.5, rng)
        assert _crossing_hypothesis(p1, p2)
        assert p1.is_mass_normalized(rtol=1e-9)
        assert p2.is_mass_normalized(rtol=1e-9)
        assert p1.single_crossing(tol=1e-9)


def test_rayleigh_bound_y_density(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    bound, ok = rayleigh_bound_u1(w.as_piecewise(), narrow_plate)
    assert ok
    lam = first_even_eigenvalue(1, narrow_plate, w).lam
    assert bound >= lam * (1.0 - 1e-9)
    assert bound <= unweighted_first(1, narrow_plate).lam * (1.0 + 1e-8)


def test_rayleigh_bound_x_density(narrow_plate):
    bound, ok = rayleigh_bound_u1(x_stripe(0.5, 1.5), narrow_plate)
    assert ok
    assert bound <= unweighted_first(1, narrow_plate).lam * (1.0 + 1e-8)


def test_rayleigh_bound_rejects_inadmissible(narrow_plate):
    bad = SymmetricXWeight(breakpoints=(0.0, 0.5, math.pi / 2.0),
                           values=(2.0, 0.5))
    with pytest.raises(ValueError):
        rayleigh_bound_u1(bad, narrow_plate)
    not_norm = EvenPiecewiseWeight(breakpoints=(0.0, narrow_plate.ell),
                                   values=(2.0,))
    with pytest.raises(ValueError):
        rayleigh_bound_u1(not_norm, narrow_plate)


def test_profile_routing_consistency(narrow_plate):
    # the stripe path (determinant) and the generic path (resolvent
    # iteration on the piecewise form) agree on the same density
    w = mass_normalized_stripe(0.5, 20.0, narrow_plate.ell)
    a = profile_first_eigenvalue(w, 1, narrow_plate)
    b = profile_first_eigenvalue(w.as_piecewise(), 1, narrow_plate, n=2048)
    assert b == pytest.approx(a, rel=1e-8)


def test_plate_minimum_at_first_mode(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    lam, m_star = plate_first_eigenvalue(w, narrow_plate, m_max=3)
    assert m_star == 1
    assert lam == pytest.approx(first_even_eigenvalue(1, narrow_plate, w).lam)
    with pytest.raises(ValueError):
        plate_first_eigenvalue(w, narrow_plate, m_max=1)


def test_sweep_beta_decreasing(narrow_plate):
    res = sweep_beta(1, 0.5, (1.2, 1.5, 2.0, 5.0, 20.0), narrow_plate)
    assert res.monotone and res.direction == "decreasing"
    assert res.bound_violations == []
    with pytest.raises(ValueError):
        sweep_beta(1, 0.5, (1.5, 1.2), narrow_plate)


def test_sweep_m_increasing(narrow_plate):
    res = sweep_m(mass_normalized_stripe(0.5, 1.5, narrow_plate.ell),
                  narrow_plate, m_max=4)
    assert res.monotone and res.direction == "increasing"
    assert all(l >= (m - 1) ** 4 for m, l in zip(res.points, res.lams))


def test_regime_beta_cap(narrow_plate):
    cap = regime_beta_cap(narrow_plate)
    mu = unweighted_first(1, narrow_plate).lam
    assert cap == pytest.approx(1.0 / mu, rel=1e-12)
    assert cap < 16.0 * (1.0 - narrow_plate.sigma ** 2)


def test_pattern_monotonicity_on_nested_pair(narrow_plate):
    rng = np.random.default_rng(11)
    p1, p2 = nested_pair(0.96, 1.04, narrow_plate.ell, rng)
    res = pattern_monotonicity_check(p1, p2, narrow_plate, n=1024)
    assert res["ok"]
    assert res["in_regime"]
    with pytest.raises(ValueError):
        pattern_monotonicity_check(p2, p1, narrow_plate, n=1024)


def test_sublevel_mask_matches_fraction():
    rng = np.random.default_rng(0)
    u2 = rng.random((40, 30))
    mask, t = sublevel_mask(u2, 0.25)
    assert mask.mean() == pytest.approx(0.25, abs=1.0 / u2.size)
    assert np.all(u2[mask] <= t)


def test_sublevel_trivial_y_only_profile():
    # a squared mode depending on y alone reproduces the central band exactly
    ny = 64
    y = (np.arange(ny) + 0.5) * 2.0 / ny - 1.0
    u2 = np.broadcast_to(y ** 2, (16, ny))
    mask, _ = sublevel_mask(u2, 0.5)
    central = np.broadcast_to(np.abs(y) <= 0.5, mask.shape)
    assert np.array_equal(mask, central)


def test_sublevel_report_fields(narrow_plate):
    w = mass_normalized_stripe(0.5, 1.5, narrow_plate.ell)
    rep = sublevel_report(w, narrow_plate, grid=(64, 48))
    assert rep.fraction == pytest.approx((1.5 - 1.0) / (1.5 - 0.5))
    assert rep.area_fraction == pytest.approx(rep.fraction, abs=2.0 / (64 * 48))
    assert rep.stripe_band in ("central", "outer")
    assert 0.0 <= rep.sym_diff_fraction <= 1.0
    assert rep.exceeds_one_percent == (rep.sym_diff_fraction > 0.01)
