import logging

import numpy as np
from scipy.linalg import eigvalsh

from banded.exceptions import InvalidInputError, NoRealSolutionError
from banded.operations import periodic_closure
from banded.window import WHOLE_LINE, BandedWindow, JacobiCoeffs


def period_two_polynomial(xi1, lam, p0):
    """
    Period-two Jacobi matrix with J² − λI = (ξ₁/2)(S² + S⁻²).

    The couplings satisfy p₀p₁ = ξ₁/2 and the diagonal alternates ±t with t² = λ − p₀² − p₁².
    """
    if xi1 <= 0 or p0 <= 0:
        raise InvalidInputError("xi1 and p0 must be positive.")
    p1 = xi1 / (2.0 * p0)
    t2 = lam - p0 ** 2 - p1 ** 2
    if t2 < 0:
        raise NoRealSolutionError(f"λ={lam} is below p0² + p1² = {p0 ** 2 + p1 ** 2}.")
    t = float(np.sqrt(t2))
    return JacobiCoeffs.periodic([p0, p1], [t, -t])


def period_two_rational_symbol(xi2, cov, free_param):
    """
    Entries of the period-two five-diagonal solution of τV² − c = (ξ₂/2)(S² + S⁻²)V.

    Returns:
        dict: `diag` (λ₀⁽⁰⁾, λ₁⁽⁰⁾), `first` (λ₀⁽¹⁾, λ₁⁽¹⁾) on the (j, j+1) couplings and
        `second` (λ₀⁽²⁾, 0) on the (j, j+2) couplings, indexed by the parity of j.
    """
    if xi2 <= 0:
        raise InvalidInputError("xi2 must be positive.")
    u = float(free_param)
    second = xi2 / (2.0 * cov.tau)
    product = -xi2 * u / (2.0 * cov.tau)
    squares = cov.c / cov.tau - u * u
    plus, minus = squares + 2.0 * product, squares - 2.0 * product
    if plus < 0 or minus < 0:
        raise NoRealSolutionError(
            f"No real couplings for free parameter {u}: need c/τ − u² ≥ 2|ξ₂u/(2τ)|."
        )
    a = 0.5 * (np.sqrt(plus) + np.sqrt(minus))
    b = 0.5 * (np.sqrt(plus) - np.sqrt(minus))
    logging.debug(f"[renorm_period_two] rational symbol u={u} a={a} b={b} second={second}")
    return {"diag": (u, -u), "first": (float(a), float(b)), "second": (second, 0.0)}


def period_two_rational(xi2, cov, free_param, n=400, offset=0):
    """Whole-line window of the period-two five-diagonal solution (n even, offset even)."""
    if n % 2 or offset % 2:
        raise InvalidInputError("Period-two windows need even size and even offset.")
    symbol = period_two_rational_symbol(xi2, cov, free_param)
    parity = np.arange(n) % 2
    diag = np.where(parity == 0, symbol["diag"][0], symbol["diag"][1])
    first = np.where(parity[:-1] == 0, symbol["first"][0], symbol["first"][1])
    second = np.where(parity[:-2] == 0, symbol["second"][0], symbol["second"][1])
    return BandedWindow.from_diagonals(
        n,
        {-2: second, -1: first, 0: diag, 1: first, 2: second},
        offset,
        WHOLE_LINE,
        2,
        2,
    )


def floquet_spectrum(window, period):
    """Eigenvalues of the periodic closure of `window`: exact points of the periodic operator's spectrum."""
    return np.sort(eigvalsh(periodic_closure(window, period)))
