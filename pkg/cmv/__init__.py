# cmv/__init__.py
from .operator import (
    CmvWindow,
    VerblunskySeq,
    build_cmv,
    cmv_factors,
    five_diagonal_check,
    five_diagonal_formulas,
    unitary_defect,
    verblunsky_from_cmv,
    z_matrix,
)
from .schur_flow import lax_generator, rk4_step, schur_flow_step, spectral_drift
