# covering/__init__.py
from .branching import BranchingData, equivalent, parse_permutation, sigma_infinity, validate
from .maps import (
    ExpandingPolynomial,
    RationalCovering,
    SignVector,
    covering_from_dict,
    fiber_power_sums,
)
