# transfer/__init__.py
from .measures import (
    DiscreteMeasure,
    MomentVector,
    invariant_moments,
    measure_moments,
    moment_coefficients,
    preimages,
    pushforward,
)
from .ruelle import preimage_measure, preimage_tree, ruelle_eigen, split_weights, transfer_matrix, weighted_ruelle_eigen
from .sampling import (
    backward_orbit_sample,
    batch_estimate,
    polynomial_preimages,
    sample_histogram,
    seed_point,
    weighted_orbit_sample,
)
