import logging

import numpy as np

from banded.exceptions import InvalidInputError
from banded.operations import band_adjoint, band_add, band_mul, band_scale, cholesky_upper, interior_rows
from banded.window import BandedWindow
from .lipschitz import interior_norm

ZERO_DIAGONAL_TOL = 1e-13


def darboux(J, rho, return_factor=False):
    """
    Darboux transform attached to T(z) = ρ(z² − 1) + 1.

    Φ is the upper bidiagonal factor with Φ*Φ = (J − T(0))/ρ, T(0) = 1 − ρ; the transform is
    ρΦΦ* + T(0). On a finite window Φ*Φ and ΦΦ* are similar, so the output is isospectral to J.

    Raises:
        InvalidInputError: ρ ≤ 2.
        NotPositiveDefiniteError: the spectrum of J reaches below 1 − ρ.
    """
    if rho <= 2:
        raise InvalidInputError(f"The Darboux transform needs rho > 2, got {rho}.")
    shift = 1.0 - rho
    phi = cholesky_upper(band_scale(J, 1.0 / rho, -shift / rho))
    out = band_scale(band_mul(phi, band_adjoint(phi)), rho, shift)
    logging.debug(f"[renorm_darboux] rho={rho} n={J.n} min pivot={float(np.min(phi.diagonal(0))):.3g}")
    if return_factor:
        return out, phi
    return out


def quadratic_split(J):
    """
    Even/odd split of a zero-diagonal Jacobi window.

    Reordering the sites as (even, odd) gives [[0, Φ*], [Φ, 0]] with Φ(i, j) = J(2i+1, 2j);
    the residual is the largest entry of the two diagonal blocks.

    Returns:
        dict: `Phi` (BandedWindow over the half-size index set) and `residual`.
    """
    if J.offset % 2 or J.n % 2:
        raise InvalidInputError("The quadratic split needs an even offset and an even window size.")
    diagonal = J.diagonal(0)
    if diagonal.size and float(np.max(np.abs(diagonal))) > ZERO_DIAGONAL_TOL:
        raise InvalidInputError(f"Main diagonal is not zero (max {float(np.max(np.abs(diagonal))):.3g}).")
    dense = J.to_dense()
    even = np.arange(0, J.n, 2)
    odd = np.arange(1, J.n, 2)
    residual = float(max(np.max(np.abs(dense[np.ix_(even, even)])), np.max(np.abs(dense[np.ix_(odd, odd)]))))
    phi = BandedWindow.from_dense(
        dense[np.ix_(odd, even)],
        bandwidth=1,
        offset=J.offset // 2,
        side=J.side,
        exact_margin_top=(J.exact_margin_top + 1) // 2,
        exact_margin_bottom=(J.exact_margin_bottom + 1) // 2,
    )
    return {"Phi": phi, "residual": residual}


def darboux_lipschitz(rho_values, pairs, margin=20):
    """
    Measured ‖D(J₁) − D(J₂)‖/‖J₁ − J₂‖ for each ρ next to the shape 2ρ/(ρ − 2).

    Args:
        rho_values: ρ > 2 values.
        pairs: aligned window pairs (J₁, J₂) with spectra above 1 − ρ.

    Returns:
        list[dict]: per ρ the `max_ratio`, the per-pair ratios and `shape`.
    """
    results = []
    for rho in rho_values:
        ratios = []
        for first, second in pairs:
            rows = interior_rows(first, margin)
            denominator = interior_norm(band_add(first, second, 1.0, -1.0), rows)
            if denominator == 0:
                ratios.append(0.0)
                continue
            numerator = interior_norm(band_add(darboux(first, rho), darboux(second, rho), 1.0, -1.0), rows)
            ratios.append(numerator / denominator)
        shape = 2.0 * rho / (rho - 2.0)
        results.append({"rho": float(rho), "max_ratio": float(max(ratios, default=0.0)), "per_pair": ratios, "shape": shape})
        logging.info(f"[renorm_darboux] rho={rho}: max ratio {max(ratios, default=0.0):.4g} (2ρ/(ρ−2) = {shape:.4g})")
    return results
