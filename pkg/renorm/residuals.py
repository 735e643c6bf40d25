import logging
import time

import numpy as np
from scipy.optimize import least_squares

from banded.exceptions import InvalidInputError, SingularSystemError, UnsupportedError
from banded.operations import band_identity, band_mul, band_polynomial, band_scale, band_add, resolvent_columns
from banded.window import WHOLE_LINE, BandedWindow, JacobiCoeffs
from .polynomial import enumerate_branches

SOLUTION_THRESHOLD = 1e-6
CLUSTER_TOL = 1e-5


def _reduced_window(J, jt, d):
    if J.offset % d or J.n % d:
        raise InvalidInputError(f"Window offset and size must be multiples of d={d}.")
    if isinstance(jt, BandedWindow):
        return jt
    return jt.window(J.offset // d, J.n // d, WHOLE_LINE)


def _interior_blocks(J, d):
    n = J.n
    return np.array([k for k in range(n // d) if n // 4 <= k * d < n - n // 4])


def _t01_difference(J, Jt, T, z, blocks):
    # (J − z)⁻¹ restricted to multiples of d against (T′(z)/d)(J̃ − T(z))⁻¹
    d = T.degree
    columns = resolvent_columns(J, z, [J.offset + k * d for k in blocks])
    reduced = resolvent_columns(Jt, T(z), [Jt.offset + k for k in blocks])
    return columns[blocks * d, :] - (T.derivative(z) / d) * reduced[blocks, :]


def renorm_residuals(J, jt, T, z):
    """
    Max-norm residuals of the renormalization equation and its two equivalent forms.

    With V|k⟩ = |kd⟩, on blocks whose row kd lies in the middle half of the window:
      eq_t01: V*(z − J)⁻¹V − (T′(z)/d)(T(z) − J̃)⁻¹
      eq_re1: V*T(J) − J̃V*
      eq_re2: V*[(T(z) − T(J))/(z − J)]V − (T′(z)/d)·I

    Args:
        J (BandedWindow): candidate window, offset and size multiples of d.
        jt: the reduced operator, as JacobiCoeffs or an aligned BandedWindow.
        z: complex point off the real axis.
    """
    if np.imag(z) == 0:
        raise InvalidInputError("Residuals are evaluated off the real axis.")
    d = T.degree
    Jt = _reduced_window(J, jt, d)
    blocks = _interior_blocks(J, d)
    if blocks.size == 0:
        raise InvalidInputError("Window is too small to contain interior blocks.")
    rows = blocks * d

    t01 = float(np.max(np.abs(_t01_difference(J, Jt, T, z, blocks))))

    ascending = list(reversed(T.coeffs))
    image = band_polynomial(ascending, J).to_dense()
    reduced = Jt.to_dense()
    expected = np.zeros_like(image)
    all_blocks = np.arange(J.n // d)
    expected[np.ix_(rows, all_blocks * d)] = reduced[np.ix_(blocks, all_blocks)]
    re1 = float(np.max(np.abs(image[rows, :] - expected[rows, :])))

    # (T(z) − T(J))/(z − J) = Σ_j h_j(z) J^j with h_j(z) = Σ_{i>j} t_i z^{i−1−j}
    quotient = band_scale(band_identity(J.n, J.offset, J.side), 0.0 * z)
    power = band_identity(J.n, J.offset, J.side)
    for j in range(d):
        h = sum(ascending[i] * z ** (i - 1 - j) for i in range(j + 1, d + 1))
        quotient = band_add(quotient, power, 1.0, h)
        power = band_mul(power, J)
    compressed = quotient.to_dense()[np.ix_(rows, rows)]
    re2 = float(np.max(np.abs(compressed - (T.derivative(z) / d) * np.eye(blocks.size))))

    logging.debug(f"[renorm_residuals] z={z!r}: t01={t01:.3g} re1={re1:.3g} re2={re2:.3g}")
    return {"eq_t01": t01, "eq_re1": re1, "eq_re2": re2}


def _candidate(p_tilde, T, q0, a):
    # d = 2 period-two candidate: block (q0, a, q1) with q0 + q1 fixed by the trace of T
    q1 = -T.coeffs[1] - q0
    return JacobiCoeffs.periodic([p_tilde / a, a], [q0, q1])


def completeness_scan(p_tilde, T, grid=21, n=128, z_probes=(3j, 1 + 2j), threshold=SOLUTION_THRESHOLD,
                      q_range=(-1.0, 1.0), a_range=(0.1, 3.0)):
    """
    Brute-force search for period-two solutions of the renormalization equation, d = 2.

    The free reduced operator with coupling p̃ is fixed. Candidates are blocks (q₀, a) with the
    inter-block coupling p̃/a; the eq_t01 residual at `z_probes` is evaluated on a grid, every
    grid local minimum is refined by least squares, and the refined points below `threshold`
    are clustered and compared with the constructed branches.

    Returns:
        dict: `solutions` and `branches` as (q₀, a) pairs, `unmatched` solutions and the
        grid minimum count.
    """
    if T.degree != 2:
        raise UnsupportedError("The completeness scan is implemented for d = 2.")
    start_time = time.time()
    jt = JacobiCoeffs.constant(p_tilde)
    Jt = jt.window(0, n // 2, WHOLE_LINE)
    probe_window = jt.window(0, n, WHOLE_LINE)
    blocks = _interior_blocks(probe_window, 2)

    def residual_vector(params):
        q0, a = params
        if a <= 0:
            return np.full(2 * len(z_probes) * blocks.size ** 2, 1e3)
        J = _candidate(p_tilde, T, q0, a).window(0, n, WHOLE_LINE)
        parts = []
        for z in z_probes:
            try:
                diff = _t01_difference(J, Jt, T, z, blocks).ravel()
            except SingularSystemError:
                diff = np.full(blocks.size ** 2, 1e3 + 0j)
            parts.extend([diff.real, diff.imag])
        return np.concatenate(parts)

    q_values = np.linspace(q_range[0], q_range[1], grid)
    a_values = np.linspace(a_range[0], a_range[1], grid)
    surface = np.array([[np.max(np.abs(residual_vector((q0, a)))) for a in a_values] for q0 in q_values])

    minima = []
    for i in range(grid):
        for j in range(grid):
            neighbourhood = surface[max(0, i - 1): i + 2, max(0, j - 1): j + 2]
            if surface[i, j] <= np.min(neighbourhood):
                minima.append((q_values[i], a_values[j]))
    logging.info(f"[renorm_residuals] Completeness scan: {len(minima)} grid minima on a {grid}x{grid} grid.")

    solutions = []
    for x0 in minima:
        fit = least_squares(
            residual_vector,
            np.array(x0),
            bounds=([q_range[0] - 1.0, 1e-6], [q_range[1] + 1.0, np.inf]),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        value = float(np.max(np.abs(fit.fun)))
        logging.debug(f"[renorm_residuals] refined {x0} -> {tuple(fit.x)} residual {value:.3g}")
        if value < threshold and not any(np.max(np.abs(fit.x - s)) < CLUSTER_TOL for s in solutions):
            solutions.append(fit.x)

    branches = []
    for result in enumerate_branches(jt, T, (0, n // 2)):
        if result.is_valid:
            branches.append(np.array([result.coeffs.q_at(0), result.coeffs.p_at(1)]))
    unmatched = [s for s in solutions if not any(np.max(np.abs(s - b)) < CLUSTER_TOL for b in branches)]

    elapsed_time = time.time() - start_time
    logging.info(
        f"[renorm_residuals] Completeness scan found {len(solutions)} solutions, {len(unmatched)} unmatched, in {elapsed_time:.2f} seconds."
    )
    return {
        "solutions": [tuple(float(v) for v in s) for s in solutions],
        "branches": [tuple(float(v) for v in b) for b in branches],
        "unmatched": [tuple(float(v) for v in s) for s in unmatched],
        "grid_minima": len(minima),
    }
