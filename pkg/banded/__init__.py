# banded/__init__.py
from .exceptions import (
    BranchInvalidError,
    InvalidInputError,
    NoRealSolutionError,
    NonConvergenceError,
    NonRealBranchError,
    NotPositiveDefiniteError,
    SingularSystemError,
    SpectralRenormError,
    UnsupportedError,
)
from .window import HALF_LINE, WHOLE_LINE, BandedWindow, JacobiCoeffs
from .operations import (
    band_add,
    band_adjoint,
    band_identity,
    band_mul,
    band_polynomial,
    band_scale,
    band_shift,
    cholesky_upper,
    eigenvalues,
    interior_rows,
    interleave,
    max_abs_difference,
    max_asymmetry,
    pad_bandwidth,
    periodic_closure,
    reflect,
    resolvent_columns,
    resolvent_entry,
    similarity_forward,
    trim_bandwidth,
    truncate,
)
from .serialization import window_from_json, window_to_json
