import numpy as np
import pytest

from hingedplate import (
    assemble_forms,
    fd_first_eigen,
    first_even_eigenvalue,
    mass_normalized_stripe,
    smallest_eig,
    smallest_eigs,
    unit_weight,
    unweighted_first,
)
from hingedplate.fem import rayleigh, safe_element_count


def test_constant_vector_energy(wide_plate):
    # on constants only the m^4 mass-type term survives
    w = unit_weight(wide_plate.ell)
    two_ell = 2.0 * wide_plate.ell
    for m in (1, 2):
        forms = assemble_forms(w, m, wide_plate, 16)
        x = np.zeros(forms.K.shape[0])
        x[0::2] = 1.0  # values 1, slopes 0
        assert x @ (forms.K @ x) == pytest.approx(two_ell * m ** 4, rel=1e-12)
        assert x @ (forms.M @ x) == pytest.approx(two_ell, rel=1e-12)


def test_mass_term_scaling_between_modes(wide_plate):
    w = unit_weight(wide_plate.ell)
    k1 = assemble_forms(w, 1, wide_plate, 16).K
    k2 = assemble_forms(w, 2, wide_plate, 16).K
    x = np.zeros(k1.shape[0])
    x[0::2] = 1.0
    diff = x @ ((k2 - k1) @ x)
    assert diff == pytest.approx(2.0 * wide_plate.ell * (2 ** 4 - 1 ** 4), rel=1e-12)


def test_stiffness_symmetry_and_band(wide_plate):
    forms = assemble_forms(unit_weight(wide_plate.ell), 1, wide_plate, 16)
    K = forms.K.toarray()
    np.testing.assert_allclose(K, K.T, atol=1e-12 * np.max(np.abs(K)))
    # banded storage reproduces the dense upper triangle
    n = K.shape[0]
    for r in range(n):
        for c in range(r, min(r + 4, n)):
            assert forms.K_band[3 + r - c, c] == pytest.approx(K[r, c], abs=1e-13)


def test_rayleigh_equals_matrix_quotient(wide_plate):
    w = mass_normalized_stripe(0.5, 1.5, wide_plate.ell)
    forms = assemble_forms(w, 2, wide_plate, 24)
    rng = np.random.default_rng(0)
    for _ in range(3):
        x = rng.standard_normal(forms.K.shape[0])
        naive = (x @ (forms.K @ x)) / (x @ (forms.M @ x))
        assert rayleigh(forms, x) == pytest.approx(naive, rel=1e-9)


def test_smallest_eig_matches_determinant(wide_plate):
    exact = unweighted_first(1, wide_plate).lam
    lam, vec = smallest_eig(assemble_forms(unit_weight(wide_plate.ell), 1,
                                           wide_plate, 200))
    assert lam == pytest.approx(exact, rel=1e-8)
    # conforming elements approximate from above
    assert lam > exact * (1.0 - 1e-10)
    assert vec[0] > 0


def test_narrow_plate_is_not_lost_to_roundoff(narrow_plate):
    # the first eigenvalue sits ~7 orders below the bending scale here
    exact = unweighted_first(1, narrow_plate).lam
    n = safe_element_count(unit_weight(narrow_plate.ell), 1, narrow_plate, 2000)
    lam, _ = smallest_eig(assemble_forms(unit_weight(narrow_plate.ell), 1,
                                         narrow_plate, n))
    assert lam == pytest.approx(exact, rel=1e-8)


def test_extrapolation_beats_single_mesh(wide_plate):
    w = mass_normalized_stripe(0.5, 1.5, wide_plate.ell)
    exact = first_even_eigenvalue(1, wide_plate, w).lam
    ext, lam1, lam2 = fd_first_eigen(w, 1, wide_plate, 64)
    assert abs(ext - exact) < abs(lam1 - exact)
    assert abs(lam2 - exact) < abs(lam1 - exact)
    assert ext == pytest.approx(exact, rel=1e-6)


def test_even_parity_matches_full_domain(wide_plate):
    w = mass_normalized_stripe(0.5, 20.0, wide_plate.ell)
    full, _ = smallest_eig(assemble_forms(w, 1, wide_plate, 128))
    half, _ = smallest_eig(assemble_forms(w, 1, wide_plate, 64, parity="even"))
    assert half == pytest.approx(full, rel=1e-6)


def test_second_eigenvalue_by_deflation(wide_plate):
    forms = assemble_forms(unit_weight(wide_plate.ell), 1, wide_plate, 96)
    lams, vecs = smallest_eigs(forms, k=2)
    assert lams[1] > lams[0]
    # deflated vector is M-orthogonal to the first
    assert abs(vecs[0] @ (forms.M @ vecs[1])) < 1e-8


def test_assembly_validation(wide_plate):
    with pytest.raises(ValueError):
        assemble_forms(unit_weight(wide_plate.ell), 1, wide_plate, 4)
    with pytest.raises(ValueError):
        assemble_forms(unit_weight(0.3), 1, wide_plate, 16)
