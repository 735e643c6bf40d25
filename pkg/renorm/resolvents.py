import logging

import numpy as np

from banded.exceptions import InvalidInputError, NonConvergenceError

MINUS = -1
PLUS = 1

# relative gap between the two fixed-point multipliers below which z is treated as spectral
NEUTRAL_TOL = 1e-12


def _side(side):
    if side in (MINUS, "-", "minus"):
        return MINUS
    if side in (PLUS, "+", "plus"):
        return PLUS
    raise InvalidInputError(f"Unknown half-line side '{side}'.")


def _step_matrix(p2, q, z):
    # r ↦ 1 / (q − z − p² r) as a Möbius matrix
    return np.array([[0.0, 1.0], [-p2, q - z]], dtype=np.result_type(z, float))


def _attracting_fixed_point(g, z):
    a, b, c, e = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    if c == 0:
        return b / (e - a)
    disc = np.sqrt((e - a) ** 2 + 4 * b * c + 0j)
    roots = [(a - e + disc) / (2 * c), (a - e - disc) / (2 * c)]
    multipliers = [abs(c * r + e) for r in roots]
    if abs(multipliers[0] - multipliers[1]) <= NEUTRAL_TOL * max(multipliers):
        raise NonConvergenceError(f"z={z!r} lies in the spectrum; the continued fraction does not converge.")
    root = roots[int(np.argmax(multipliers))]
    return root.real if np.isrealobj(z) else root


def _period_product(jt, z, s, side):
    g = np.eye(2, dtype=np.result_type(z, float))
    period = jt.period
    if side == MINUS:
        sites = range(s, s - period, -1)
        couplings = [jt.p_at(k) for k in sites]
    else:
        sites = range(s, s + period)
        couplings = [jt.p_at(k + 1) for k in sites]
    for k, p in zip(sites, couplings):
        g = g @ _step_matrix(p * p, jt.q_at(k), z)
        g = g / np.max(np.abs(g))
    return g


def half_line_resolvent(jt, z, s, side=MINUS):
    """
    ⟨s|(J̃± − z)⁻¹|s⟩ for the restriction of J̃ to sites ≤ s (minus) or ≥ s (plus).

    r₋(z, s) = 1/(q_s − z − p_s² r₋(z, s−1)) and r₊(z, s) = 1/(q_s − z − p_{s+1}² r₊(z, s+1)).
    Periodic data is solved as the fixed point of the Möbius map over one period, taking the
    attracting root (the branch with r ~ −1/z at infinity). Finite data runs the recursion from
    the far end of the data.
    """
    side = _side(side)
    if jt.is_periodic:
        return _attracting_fixed_point(_period_product(jt, z, s, side), z)
    if side == MINUS:
        r = 0.0
        for k in range(jt.first, s + 1):
            coupling = jt.p_at(k) ** 2 if k > jt.first else 0.0
            r = 1.0 / (jt.q_at(k) - z - coupling * r)
    else:
        r = 0.0
        for k in range(jt.last, s - 1, -1):
            coupling = jt.p_at(k + 1) ** 2 if k < jt.last else 0.0
            r = 1.0 / (jt.q_at(k) - z - coupling * r)
    return r


def half_line_resolvents(jt, z, side=MINUS):
    """
    r±(z, s) for s = 0..period−1 of periodic data.

    One fixed point is solved, the others follow by running the recursion in its stable
    direction (forward for the minus side, backward for the plus side).
    """
    side = _side(side)
    if not jt.is_periodic:
        raise InvalidInputError("Resolvents over a period need periodic data.")
    period = jt.period
    values = np.zeros(period, dtype=np.result_type(z, float))
    if side == MINUS:
        r = _attracting_fixed_point(_period_product(jt, z, period - 1, side), z)
        for s in range(period):
            r = 1.0 / (jt.q_at(s) - z - jt.p_at(s) ** 2 * r)
            values[s] = r
    else:
        r = _attracting_fixed_point(_period_product(jt, z, 0, side), z)
        for s in range(period - 1, -1, -1):
            r = 1.0 / (jt.q_at(s) - z - jt.p_at(s + 1) ** 2 * r)
            values[s] = r
    logging.debug(f"[renorm_resolvents] period={period} side={side} z={z!r}")
    return values
