import logging
import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from banded.exceptions import InvalidInputError, NonConvergenceError
from .operator import build_cmv, unitary_defect, verblunsky_from_cmv

MAX_DT = 1e-2
VALIDITY_GAP = 1e-8
PROJECTIONS = ("skew", "upper_half")


def lax_generator(matrix, projection="skew"):
    """
    Generator B of the Lax equation 𝔄̇ = [B, 𝔄] built from the Hermitian M = 𝔄 + 𝔄*.

    `skew`: strict_upper(M) − strict_lower(M), anti-Hermitian.
    `upper_half`: strict_upper(M) + diag(M)/2.
    """
    total = matrix + matrix.conj().T
    upper = np.triu(total, 1)
    if projection == "skew":
        return upper - np.tril(total, -1)
    elif projection == "upper_half":
        return upper + 0.5 * np.diag(np.diag(total))
    else:
        raise InvalidInputError(f"Unknown projection '{projection}', expected one of {PROJECTIONS}.")


def _lax_rhs(matrix, projection):
    generator = lax_generator(matrix, projection)
    return generator @ matrix - matrix @ generator


def rk4_step(matrix, fun, dt, *args):
    """One classical Runge–Kutta step of dM/dt = fun(M, *args)."""
    dt2 = dt / 2.0
    k1 = fun(matrix, *args)
    k2 = fun(matrix + k1 * dt2, *args)
    k3 = fun(matrix + k2 * dt2, *args)
    k4 = fun(matrix + k3 * dt, *args)
    return matrix + (k1 + 2 * k2 + 2 * k3 + k4) / 6.0 * dt


def spectral_drift(reference, values):
    """Largest distance between two eigenvalue sets under the optimal one-to-one matching."""
    cost = np.abs(np.subtract.outer(reference, values))
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def _checked_coefficients(matrix, first, last, t):
    """Verblunsky coefficients of the evolved window, rejecting any |a_k| ≥ 1 − VALIDITY_GAP."""
    try:
        current = verblunsky_from_cmv(matrix, first, last)
    except InvalidInputError as e:
        raise NonConvergenceError(f"The flow left the window at t={t:.6g}: {e}") from e
    largest = float(np.max(np.abs(current.a)))
    if largest >= 1.0 - VALIDITY_GAP:
        raise NonConvergenceError(f"|a_k| reached {largest!r} at t={t:.6g}; the flow left the window.")
    return current


def schur_flow_step(seq, dt, n_steps, projection="skew", record_every=None):
    """
    Integrate the Schur flow 𝔄̇ = [P(𝔄 + 𝔄*), 𝔄] with RK4 on the closed CMV window of `seq`.

    Verblunsky coefficients are re-extracted and checked after every step and kept at recorded steps;
    the last coefficient sits behind the closure and stays fixed.

    Returns:
        list[dict]: one entry per recorded step with `t`, `seq`, `unitary_defect` and
        `spectral_drift` (against the spectrum at t = 0), starting with t = 0.

    Raises:
        NonConvergenceError: some |a_k| reaches 1 − 1e−8, the window no longer describes a CMV matrix.
    """
    if dt <= 0 or dt > MAX_DT:
        raise InvalidInputError(f"Time step must lie in (0, {MAX_DT}], got {dt}.")
    if projection not in PROJECTIONS:
        raise InvalidInputError(f"Unknown projection '{projection}', expected one of {PROJECTIONS}.")
    record_every = record_every or n_steps
    start_time = time.time()
    matrix = build_cmv(seq).window.to_dense()
    reference = np.linalg.eigvals(matrix)
    last = seq.a[-1]
    trajectory = [{"t": 0.0, "seq": seq, "unitary_defect": unitary_defect(matrix), "spectral_drift": 0.0}]
    for step in range(1, n_steps + 1):
        matrix = rk4_step(matrix, _lax_rhs, dt, projection)
        current = _checked_coefficients(matrix, seq.first, last, step * dt)
        if step % record_every and step != n_steps:
            continue
        trajectory.append({
            "t": step * dt,
            "seq": current,
            "unitary_defect": unitary_defect(matrix),
            "spectral_drift": spectral_drift(reference, np.linalg.eigvals(matrix)),
        })
    elapsed_time = time.time() - start_time
    final = trajectory[-1]
    logging.info(
        f"[cmv_schur_flow][{projection}] {n_steps} steps of dt={dt} in {elapsed_time:.2f} seconds: "
        f"drift {final['spectral_drift']:.3g}, unitary defect {final['unitary_defect']:.3g}."
    )
    return trajectory
