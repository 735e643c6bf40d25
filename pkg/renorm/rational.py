import logging
import time

import numpy as np
from scipy.linalg import eigh, qr, solve_triangular

from banded.exceptions import InvalidInputError
from banded.operations import (
    band_adjoint,
    band_mul,
    band_scale,
    cholesky_upper,
    interleave,
    resolvent_entry,
    similarity_forward,
    trim_bandwidth,
    truncate,
)
from banded.window import HALF_LINE, BandedWindow
from transfer.measures import DiscreteMeasure, MomentVector, moment_coefficients

MIN_ITERATION_WINDOW = 16


def _symmetrized(a):
    sym = 0.5 * (a.to_dense() + a.to_dense().conj().T)
    return BandedWindow.from_dense(sym, a.bandwidth, a.offset, a.side, a.exact_margin_top, a.exact_margin_bottom)


def factor_shifted_square(a, cov):
    """Upper Cholesky factor Φ of a² + 4τc."""
    return cholesky_upper(band_scale(band_mul(a, a), 1.0, cov.shift))


def pi_star(a, cov):
    """
    Transform of a half-line self-adjoint window under the double covering π(v) = τv − c/v.

    With Φ*Φ = A² + 4τc and A* = ΦAΦ⁻¹ the output is (1/2τ)·[[A, Φ*], [Φ, A*]] interleaved on
    the even/odd sites, so the cyclic vector stays at index 0.
    """
    if a.side != HALF_LINE or a.offset != 0:
        raise InvalidInputError("pi_star expects a half-line window starting at index 0.")
    phi = factor_shifted_square(a, cov)
    a_star = _symmetrized(similarity_forward(phi, a))
    out = interleave([[a, band_adjoint(phi)], [phi, a_star]], scale=1.0 / (2.0 * cov.tau))
    return trim_bandwidth(out)


def lambda_sequence(p, cov):
    """
    Diagonal of the Cholesky factor of J² + 4τc for a zero-diagonal Jacobi matrix, by recursion.

    Args:
        p: couplings p_1, p_2, ... (p_k joins sites k-1 and k); the last site has no coupling below.

    Returns:
        np.ndarray: λ_0 .. λ_{len(p)}.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(~np.isfinite(p)) or np.any(p < 0):
        raise InvalidInputError("Couplings must be finite and non-negative.")
    padded = np.concatenate([[0.0], p, [0.0]])
    sites = p.size + 1
    lam2 = np.zeros(sites)
    for n in range(sites):
        value = cov.shift + padded[n + 1] ** 2 + padded[n] ** 2
        if n >= 2:
            value -= padded[n] ** 2 * padded[n - 1] ** 2 / lam2[n - 2]
        if not np.isfinite(value) or value <= 0:
            raise InvalidInputError(f"λ-recursion breaks down at n={n} (λ² = {value!r}).")
        lam2[n] = value
    return np.sqrt(lam2)


def iterate_renorm(a0, cov, steps, window):
    """
    Iterate A_{n+1} = π*(A_n), keeping the leading window x window block after every doubling.

    Returns:
        list[BandedWindow]: A_0, A_1, ..., A_steps.
    """
    if window < MIN_ITERATION_WINDOW:
        raise InvalidInputError(f"Iteration window must be at least {MIN_ITERATION_WINDOW}.")
    start_time = time.time()
    current = a0 if a0.n <= window else truncate(a0, 0, window)
    snapshots = [current]
    for step in range(steps):
        doubled = pi_star(current, cov)
        current = truncate(doubled, 0, min(window, doubled.n))
        snapshots.append(current)
        logging.debug(f"[renorm_rational] step {step + 1}: n={current.n} w={current.bandwidth} margin={current.exact_margin_bottom}")
    elapsed_time = time.time() - start_time
    logging.info(f"[renorm_rational] Finished {steps} renormalization steps in {elapsed_time:.2f} seconds.")
    return snapshots


def moment_pushforward(m, cov):
    """Moments of 𝓛*ν from the moments of ν: m_k(μ) = (1/d) Σ_j [s_k]_j m_j(ν)."""
    matrix = moment_coefficients(cov, m.K)
    values = matrix @ m.values
    values[0] = 1.0
    return MomentVector(values)


def spectral_measure(a):
    """Spectral measure of a finite self-adjoint window at its first site."""
    values, vectors = eigh(a.to_dense())
    weights = np.abs(vectors[0, :]) ** 2
    return DiscreteMeasure(np.real(values), weights / weights.sum())


def window_moments(a, K):
    """⟨0|a^k|0⟩ for k = 0..K (first site of the window)."""
    dense = a.to_dense()
    left = np.zeros(a.n, dtype=dense.dtype)
    left[0] = 1.0
    right = left.copy()
    values = [1.0]
    for k in range(1, K + 1):
        # m_k = <a^{floor(k/2)} e0, a^{ceil(k/2)} e0>
        if k % 2:
            right = dense @ right
        else:
            left = dense @ left
        values.append(float(np.real(np.vdot(left, right))))
    return MomentVector(values)


def resolvent_identity_residual(a, cov, z):
    """
    |⟨0|(π*(a) − z)⁻¹|0⟩ − ∫ (x − 2τz) dν(x) / (2(τz² − xz − c))| with ν the spectral measure of a.

    The identity is exact in finite dimensions.
    """
    if np.imag(z) == 0:
        raise InvalidInputError("The resolvent identity is evaluated off the real axis.")
    lhs = resolvent_entry(pi_star(a, cov), z, 0, 0)
    nu = spectral_measure(a)
    x = nu.support
    integrand = (x - 2 * cov.tau * z) / (2 * (cov.tau * z * z - x * z - cov.c))
    rhs = np.sum(nu.weights * integrand)
    return float(abs(lhs - rhs))


def odd_basis_coefficients(a, cov):
    """
    Coefficient matrix [c^k_j] of the odd orthonormal functions y(v) Σ_j c^k_j e_j(π(v)).

    The functions are orthonormalized against the spectral measure of `a` weighted by x² + 4τc,
    using their values at the atoms (QR, positive diagonal). The result is upper triangular and
    inverts the Cholesky factor of a² + 4τc.
    """
    values, vectors = eigh(a.to_dense())
    signs = np.sign(vectors[0, :])
    if np.any(signs == 0):
        raise InvalidInputError("The first site is not a cyclic vector of the window.")
    radial = np.sqrt(values ** 2 + cov.shift)
    evaluations = (signs * radial)[:, None] * vectors.T
    _, r = qr(evaluations, mode="economic")
    r = r * np.sign(np.diag(r))[:, None]
    return solve_triangular(r, np.eye(a.n), lower=False)


def contraction_ratios(errors, floor=1e-12, plateau_factor=1e2):
    """
    Ratios e_{n+1}/e_n over the geometric phase of an error sequence.

    The phase ends at the first error at or below `floor`, or within `plateau_factor` of the last
    error: a finite window stops the decay at a plateau and ratios taken there are close to 1.
    """
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        return []
    cutoff = max(floor, plateau_factor * errors[-1])
    ratios = []
    for before, after in zip(errors[:-1], errors[1:]):
        if after <= cutoff:
            break
        ratios.append(after / before)
    return ratios
