"""Hoelder continuous retractions onto common fixed points of uniformly
Lipschitzian semigroup actions, computed through invariant means."""

from .actions import (
    LipschitzAction,
    PointSet,
    check_homomorphism,
    contraction_action,
    cyclic_linear_action,
    dist_perturbation_map,
    estimate_uniform_lipschitz,
    involution_action,
    twisted_involution_action,
)
from .analysis import (
    HolderEstimate,
    check_holder,
    decay_rate_fit,
    goebel_kirk_threshold,
    hilbert_modulus,
    holder_constant,
    holder_exponent,
    lifschitz_threshold,
    min_iterations,
)
from .geometry import Ball, Box, Ellipsoid, diameter, inner, project, sample
from .retraction import (
    RetractionTrace,
    averaged_map,
    build_retraction,
    iterate_retraction,
    residual,
    verify_retraction,
)
from .semigroups import (
    FiniteSemigroup,
    Infeasible,
    Mean,
    Naturals,
    folner_mean,
    invariance_defect,
    left_translation,
    solve_left_invariant_mean,
    validate_table,
)

__version__ = "0.1.0"
