"""Weighted eigenvalues of a partially hinged rectangular plate.

The plate occupies (0, pi) x (-ell, ell), hinged on the short edges and free
on the long ones; densities are even piecewise-constant weights with unit
average.  Three independent solvers (secular determinant, Green-kernel
resolvent iteration, cubic-Hermite finite elements) cross-validate the first
even eigenvalues, and an experiment layer checks the optimization and
comparison results built on them.
"""

from .core import (
    DegenerateCaseError,
    EvenPiecewiseWeight,
    ModeFunction,
    NoEigenvalueError,
    NonSimpleRootError,
    PlateError,
    PlateParams,
    SpectralPoint,
    TwoMaterialWeight,
    check_c0,
    make_plate,
    mass_normalized_interface,
    mass_normalized_stripe,
    nu11_exists,
    unit_weight,
    weight_eval,
)
from .fem import assemble_forms, fd_first_eigen, smallest_eig, smallest_eigs
from .greens import (
    BoundaryData,
    GreenSolver,
    HomogeneousCoeffs,
    boundary_data,
    homogeneous_coefficients,
    inverse_power_first,
    kernel_qm,
    particular_solution,
    ppp_check,
    sign_lemma_report,
    solve_Lm,
)
from .optimize import (
    SublevelReport,
    SweepResult,
    SymmetricXWeight,
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
    table1,
    verify_class_minimum,
    x_stripe,
)
from .stripe import (
    BranchRoots,
    branch_roots,
    classify_case,
    even_eigenvalues_below,
    first_even_eigenvalue,
    mode_function,
    secular_det,
    secular_matrix,
    unweighted_first,
)

__version__ = "0.1.0"
