"""Exponent bounds and exact counters for integer points on plane curves in
lopsided boxes, with equal-sums-of-two-powers experiments."""

from .arith import (
    PlaneLattice,
    ResiduePairSet,
    XiSumResult,
    crt_lattices,
    gauss_reduce,
    iter_lattice_points,
    lattice_points_in_box,
    odd_squarefree_kernel,
    power_residue_pairs,
    xi_sum,
)
from .bounds import (
    BoundReport,
    BoxProfile,
    OptimizationConstants,
    PerturbedProfile,
    bound_box_product,
    bound_lopsided,
    bound_thin_box,
    f_of_A,
    g_eval,
    make_profile,
    optimization_constants,
    paucity_exponents,
    perturb,
    perturbation_gap,
)
from .counters import (
    CountResult,
    SolutionQuadruple,
    classify_trivial,
    count_curve_bruteforce,
    count_sums_naive,
    count_sums_pipeline,
    curve_points,
    fit_exponent,
)
from .detlab import (
    DeterminantRecord,
    ExponentSet,
    ModPFiber,
    auxiliary_form,
    build_exponent_set,
    build_mjk,
    boundary_band_count,
    determinant_delta,
    fiber,
    modp_curve_points,
    sum_compare,
    vanishing_demo,
)
from .forms import (
    BinaryForm,
    TernaryForm,
    compute_T,
    divides,
    equal_sums_binary_form,
    parse_form,
    substitute_lattice_basis,
)

__version__ = "0.1.0"
