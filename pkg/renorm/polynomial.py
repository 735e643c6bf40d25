import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial

from banded.exceptions import (
    BranchInvalidError,
    InvalidInputError,
    NonConvergenceError,
    UnsupportedError,
)
from banded.operations import interior_rows, max_abs_difference, reflect
from banded.window import HALF_LINE, WHOLE_LINE, BandedWindow, JacobiCoeffs
from covering.maps import SignVector
from .rational import window_moments
from .resolvents import MINUS, PLUS, half_line_resolvent, half_line_resolvents

MERGE_TOL = 1e-6
ROOT_GAP_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class BranchResult:
    """Outcome of one δ-branch: the periodic coefficients and their window, or the reason it failed."""
    delta: SignVector
    coeffs: Optional[JacobiCoeffs] = None
    window: Optional[BandedWindow] = None
    error: Optional[BranchInvalidError] = None

    @property
    def is_valid(self):
        return self.error is None


def _second_derivatives(T):
    crit = T.critical_points
    second = T.derivative.deriv()(crit)
    scale = max(1.0, float(np.max(np.abs(second)))) if second.size else 1.0
    degenerate = np.nonzero(np.abs(second) <= 1e-12 * scale)[0]
    if degenerate.size:
        raise UnsupportedError(f"Degenerate critical point c={crit[degenerate[0]]!r} (T''(c) = 0).")
    return second


def _target_value(jt, t, s, sign):
    if sign < 0:
        return -1.0 / half_line_resolvent(jt, t, s, MINUS)
    return -jt.p_at(s + 1) ** 2 * half_line_resolvent(jt, t, s + 1, PLUS)


def _interpolate(T, values):
    # T^{(s)}(z) = (z − q)T′(z)/d + Σ_c T′(z)/((z − c)T″(c)) · T^{(s)}(c)
    d = T.degree
    derivative = T.derivative
    second = _second_derivatives(T)
    target = Polynomial([-T.q, 1.0]) * derivative / d
    for c, t2, value in zip(T.critical_points, second, values):
        quotient = derivative // Polynomial([-c, 1.0])
        target = target + quotient * (value / t2)
    coef = np.zeros(d + 1)
    coef[: min(d + 1, target.coef.size)] = target.coef[: d + 1]
    coef[d] = 1.0
    return Polynomial(coef)


def _check_signs(T, values, s):
    # roots of T^{(s)} interlace the critical points iff T^{(s)}(c) and T(c) share their sign
    for index, (t, value) in enumerate(zip(T.critical_values, values)):
        if not np.isfinite(value) or np.sign(value) != np.sign(t):
            raise BranchInvalidError(
                f"T^(s)(c) = {value!r} has the wrong sign against T(c) = {t!r}", s=s, critical_index=index
            )


def branch_targets(jt, T, delta, s):
    """
    The monic polynomial T^{(s)} for block s of the δ-branch.

    Its values at the critical points are −1/r̃₋(T(c), s) where δ_c = −1 and
    −p̃²_{s+1} r̃₊(T(c), s+1) where δ_c = +1; the interpolation keeps T^{(s)} monic with the
    same z^{d−1} coefficient as T.
    """
    delta.check_length(T)
    values = []
    for index, (t, sign) in enumerate(zip(T.critical_values, delta)):
        try:
            values.append(_target_value(jt, t, s, sign))
        except NonConvergenceError as e:
            raise BranchInvalidError(f"critical value {t!r} is not outside the spectrum: {e}", s=s, critical_index=index) from e
    return _interpolate(T, values)


def _lanczos(nodes, weights):
    # Lanczos on diag(nodes) from the start vector √w, with full reorthogonalization
    d = nodes.size
    basis = np.zeros((d, d))
    basis[:, 0] = np.sqrt(weights)
    alpha = np.zeros(d)
    beta = np.zeros(max(d - 1, 0))
    for k in range(d):
        u = nodes * basis[:, k]
        alpha[k] = basis[:, k] @ u
        u = u - alpha[k] * basis[:, k]
        if k > 0:
            u = u - beta[k - 1] * basis[:, k - 1]
        u = u - basis[:, : k + 1] @ (basis[:, : k + 1].T @ u)
        if k < d - 1:
            norm = float(np.linalg.norm(u))
            if norm <= ROOT_GAP_TOL:
                raise BranchInvalidError("Lanczos breakdown: the block measure has fewer than d atoms")
            beta[k] = norm
            basis[:, k + 1] = u / norm
    return alpha, beta


def block_from_resolvent(Ts, T, s=None):
    """
    d×d Jacobi block with ⟨0|(z − J^{(s)})⁻¹|0⟩ = (T′(z)/d)/T^{(s)}(z).

    The spectral measure of the block sits on the roots x_j of T^{(s)} with weights
    w_j = (T′(x_j)/d)/T^{(s)}′(x_j); the block is the Lanczos tridiagonalization of that measure.

    Raises:
        BranchInvalidError: complex or repeated roots, or a non-positive weight.
    """
    d = T.degree
    if Ts.degree() != d:
        raise InvalidInputError(f"T^(s) has degree {Ts.degree()}, expected {d}.")
    roots = Ts.roots()
    scale = max(1.0, float(np.max(np.abs(roots))))
    if np.any(np.abs(np.imag(roots)) > 1e-9 * scale):
        raise BranchInvalidError("T^(s) has complex roots", s=s)
    nodes = np.sort(np.real(roots))
    if d > 1 and np.min(np.diff(nodes)) <= ROOT_GAP_TOL * scale:
        raise BranchInvalidError("T^(s) has a repeated root", s=s)
    weights = (T.derivative(nodes) / d) / Ts.deriv()(nodes)
    if np.any(weights <= 0):
        raise BranchInvalidError(f"non-positive block weight {float(np.min(weights))!r}", s=s)
    total = float(np.sum(weights))
    if abs(total - 1.0) > 1e3 * WEIGHT_SUM_TOL:
        logging.warning(f"[renorm_polynomial] Block weights at s={s} sum to {total!r}.")
    alpha, beta = _lanczos(nodes, weights / total)
    return JacobiCoeffs(beta, alpha, first=0)


def _target_table(jt, T, delta):
    # rows s = 0..period-1, one column per critical point
    period = jt.period
    table = np.zeros((period, T.degree - 1))
    for index, (t, sign) in enumerate(zip(T.critical_values, delta)):
        try:
            if sign < 0:
                table[:, index] = -1.0 / half_line_resolvents(jt, t, MINUS)
            else:
                couplings = jt.p_at(np.arange(1, period + 1))
                table[:, index] = -couplings ** 2 * np.roll(half_line_resolvents(jt, t, PLUS), -1)
        except NonConvergenceError as e:
            raise BranchInvalidError(f"critical value {t!r} is not outside the spectrum: {e}", critical_index=index) from e
    return table


def renormalized_coeffs(jt, T, delta):
    """
    Periodic coefficients of J(J̃, δ), period d·period(J̃).

    Block s occupies sites sd .. sd+d−1; the coupling into the next block is
    p_{(s+1)d} = p̃_{s+1}/(p_{sd+1} ⋯ p_{sd+d−1}).
    """
    if not jt.is_periodic:
        raise InvalidInputError("The renormalized operator is built from periodic data.")
    delta.check_length(T)
    T.check_regime()
    d, period = T.degree, jt.period
    table = _target_table(jt, T, delta)
    q = np.zeros(d * period)
    p = np.zeros(d * period)
    for s in range(period):
        _check_signs(T, table[s], s)
        block = block_from_resolvent(_interpolate(T, table[s]), T, s=s)
        q[s * d: (s + 1) * d] = block.q
        p[s * d + 1: (s + 1) * d] = block.p
        p[((s + 1) * d) % (d * period)] = jt.p_at(s + 1) / np.prod(block.p)
    coeffs = JacobiCoeffs.periodic(p, q)
    if coeffs.period != d * period:
        raise InvalidInputError(f"Renormalized period {coeffs.period} differs from {d * period}.")
    return coeffs


def assemble_renormalized(jt, T, delta, s_range):
    """Two-sided window of J(J̃, δ) over the blocks s_range[0] .. s_range[1]-1."""
    s0, s1 = s_range
    if s1 <= s0:
        raise InvalidInputError(f"Empty block range {s_range}.")
    coeffs = renormalized_coeffs(jt, T, delta)
    d = T.degree
    return coeffs.window(s0 * d, (s1 - s0) * d, WHOLE_LINE)


def coeff_distance(a, b):
    """Max-norm distance of two periodic coefficient sets, compared over a common period."""
    period = int(np.lcm(a.period, b.period))
    k = np.arange(period)
    return float(max(np.max(np.abs(a.p_at(k) - b.p_at(k))), np.max(np.abs(a.q_at(k) - b.q_at(k)))))


def merged_branches(results, tol=MERGE_TOL):
    """Pairs of valid branches closer than `tol`."""
    valid = [r for r in results if r.is_valid]
    merged = []
    for i in range(len(valid)):
        for j in range(i + 1, len(valid)):
            distance = coeff_distance(valid[i].coeffs, valid[j].coeffs)
            if distance <= tol:
                merged.append((valid[i].delta.label(), valid[j].delta.label(), distance))
    return merged


def enumerate_branches(jt, T, s_range, max_workers=None, merge_tol=MERGE_TOL):
    """
    Run every δ ∈ {±1}^{d−1} and collect the branches.

    Branches are independent and run on a thread pool; results come back in the order of
    `SignVector.all_for`. Invalid branches carry their error, merged branches are logged.
    """
    start_time = time.time()

    def run(delta):
        try:
            coeffs = renormalized_coeffs(jt, T, delta)
            d = T.degree
            window = coeffs.window(s_range[0] * d, (s_range[1] - s_range[0]) * d, WHOLE_LINE)
            return BranchResult(delta, coeffs, window)
        except BranchInvalidError as e:
            logging.info(f"[renorm_polynomial][{delta.label()}] Branch invalid: {e}")
            return BranchResult(delta, error=e)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        results = list(executor.map(run, SignVector.all_for(T.degree)))

    for first, second, distance in merged_branches(results, merge_tol):
        logging.warning(f"[renorm_polynomial] Branches {first} and {second} merge (distance {distance:.3g}).")
    elapsed_time = time.time() - start_time
    valid = sum(r.is_valid for r in results)
    logging.info(f"[renorm_polynomial] Enumerated {len(results)} branches ({valid} valid) in {elapsed_time:.2f} seconds.")
    return results


def dual_delta_check(jt, T, delta, n=400):
    """
    Interior residual of S^{d−1} U J(J̃, δ) U S^{1−d} = J(U J̃ U, −δ), U|l⟩ = |1−l⟩.

    The left side is the window of J(d − l, d − m); the right side is built from the reflected
    coefficients with every sign flipped.
    """
    d = T.degree
    forward = renormalized_coeffs(jt, T, delta)
    dual = renormalized_coeffs(jt.reflected(), T, delta.negated())
    conjugated = reflect(forward.window(d - n + 1, n, WHOLE_LINE), d)
    expected = dual.window(0, n, WHOLE_LINE)
    residual = max_abs_difference(conjugated, expected, interior_rows(expected, margin=2))
    logging.debug(f"[renorm_polynomial][{delta.label()}] duality residual {residual:.3g}")
    return residual


def half_line_moments(coeffs, K, side=PLUS):
    """
    Moments of the spectral measure of J₊ at |0⟩ (sites ≥ 0) or of J₋ at |−1⟩ (sites ≤ −1).

    A window of K//2 + 2 sites reproduces ⟨v|J^k|v⟩ exactly for k ≤ K.
    """
    m = K // 2 + 2
    if side == PLUS:
        return window_moments(coeffs.window(0, m, HALF_LINE), K)
    return window_moments(reflect(coeffs.window(-m, m, WHOLE_LINE), -1), K)


def iterate_polynomial_renorm(jt, T, delta, steps, K=8):
    """
    J_{n+1} = J(J_n, δ) starting from J_0 = J̃.

    Returns:
        tuple: (final coefficients, list of per-step dicts with `step`, `period`, `plus` and
        `minus` half-line moment vectors).
    """
    start_time = time.time()
    current = jt
    history = []
    for step in range(1, steps + 1):
        current = renormalized_coeffs(current, T, delta)
        plus = half_line_moments(current, K, PLUS)
        minus = half_line_moments(current, K, MINUS)
        history.append({"step": step, "period": current.period, "plus": plus, "minus": minus})
        logging.debug(f"[renorm_polynomial][{delta.label()}] step {step}: period={current.period} m2+={plus[min(2, K)]!r}")
    elapsed_time = time.time() - start_time
    logging.info(f"[renorm_polynomial] Finished {steps} polynomial renormalization steps in {elapsed_time:.2f} seconds.")
    return current, history
