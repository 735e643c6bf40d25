# renorm/__init__.py
from .darboux import darboux, darboux_lipschitz, quadratic_split
from .lipschitz import empirical_lipschitz, interior_norm, random_periodic_pairs
from .period_two import floquet_spectrum, period_two_polynomial, period_two_rational, period_two_rational_symbol
from .polynomial import (
    BranchResult,
    assemble_renormalized,
    block_from_resolvent,
    branch_targets,
    coeff_distance,
    dual_delta_check,
    enumerate_branches,
    half_line_moments,
    iterate_polynomial_renorm,
    merged_branches,
    renormalized_coeffs,
)
from .rational import (
    contraction_ratios,
    iterate_renorm,
    lambda_sequence,
    moment_pushforward,
    odd_basis_coefficients,
    pi_star,
    resolvent_identity_residual,
    spectral_measure,
    window_moments,
)
from .residuals import completeness_scan, renorm_residuals
from .resolvents import MINUS, PLUS, half_line_resolvent, half_line_resolvents
