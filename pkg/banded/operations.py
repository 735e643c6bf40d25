import logging

import numpy as np
from scipy.linalg import LinAlgError, eig_banded, get_lapack_funcs, solve_banded, solve_triangular

from .exceptions import InvalidInputError, NotPositiveDefiniteError, SingularSystemError
from .window import HALF_LINE, WHOLE_LINE, BandedWindow


def _check_aligned(a, b):
    if a.n != b.n or a.offset != b.offset:
        raise InvalidInputError(
            f"Window mismatch: ({a.offset}, {a.n}) vs ({b.offset}, {b.n})."
        )


def _grown_margin(own, other, reach):
    return max(own, other + reach if other > 0 else 0)


def _side_of(*windows):
    return HALF_LINE if all(w.side == HALF_LINE for w in windows) else WHOLE_LINE


def pad_bandwidth(a, w):
    """Same window with storage widened to bandwidth `w`."""
    if w <= a.bandwidth:
        return a
    extra = w - a.bandwidth
    entries = np.pad(a.entries, ((0, 0), (extra, extra)))
    return BandedWindow(entries, a.offset, a.side, a.exact_margin_top, a.exact_margin_bottom)


def trim_bandwidth(a, tol=0.0):
    """Drop outer diagonals whose entries are all within `tol` of zero."""
    w = a.bandwidth
    keep = 0
    for k in range(w, 0, -1):
        if np.any(np.abs(a.entries[:, w + k]) > tol) or np.any(np.abs(a.entries[:, w - k]) > tol):
            keep = k
            break
    entries = a.entries[:, w - keep: w + keep + 1]
    return BandedWindow(entries, a.offset, a.side, a.exact_margin_top, a.exact_margin_bottom)


def band_identity(n, offset=0, side=WHOLE_LINE):
    return BandedWindow(np.ones((n, 1)), offset, side)


def band_shift(n, power=1, offset=0, side=WHOLE_LINE):
    """S^power with ones on the `power`-th superdiagonal (negative powers land below the diagonal)."""
    top = -power if (power < 0 and side == WHOLE_LINE) else 0
    bottom = power if power > 0 else 0
    return BandedWindow.from_diagonals(n, {power: 1.0}, offset, side, top, bottom)


def band_add(a, b, alpha=1.0, beta=1.0):
    """alpha*a + beta*b on aligned windows."""
    _check_aligned(a, b)
    w = max(a.bandwidth, b.bandwidth)
    a, b = pad_bandwidth(a, w), pad_bandwidth(b, w)
    return BandedWindow(
        alpha * a.entries + beta * b.entries,
        a.offset,
        _side_of(a, b),
        max(a.exact_margin_top, b.exact_margin_top),
        max(a.exact_margin_bottom, b.exact_margin_bottom),
    )


def band_scale(a, alpha, shift=0.0):
    """alpha*a + shift*I."""
    entries = (alpha * a.entries).astype(np.result_type(a.entries, alpha, shift))
    entries[:, a.bandwidth] += shift
    return BandedWindow(entries, a.offset, a.side, a.exact_margin_top, a.exact_margin_bottom)


def band_adjoint(a):
    """Conjugate transpose within the window."""
    n, w = a.n, a.bandwidth
    entries = np.zeros_like(a.entries)
    for k in range(-w, w + 1):
        rows = np.arange(max(0, -k), n - max(0, k))
        entries[rows, w + k] = np.conj(a.entries[rows + k, w - k])
    return BandedWindow(entries, a.offset, a.side, a.exact_margin_top, a.exact_margin_bottom)


def band_mul(a, b):
    """
    Product of two aligned windows, computed diagonal by diagonal.

    The result has bandwidth w_a + w_b (capped at n - 1). Rows of the product that read an inexact
    row of `b` through the band of `a` join the margin, so margins grow by w_a. Once the product
    band covers the window the product is taken densely.
    """
    _check_aligned(a, b)
    n, wa, wb = a.n, a.bandwidth, b.bandwidth
    wc = wa + wb
    cap = max(n - 1, 0)
    if 2 * wc + 1 >= n:
        product = BandedWindow.from_dense(a.to_dense() @ b.to_dense(), min(wc, cap)).entries
    else:
        dtype = np.result_type(a.entries, b.entries)
        product = np.zeros((n, 2 * wc + 1), dtype=dtype)
        padded = np.zeros((n + 2 * wa, 2 * wb + 1), dtype=b.entries.dtype)
        padded[wa: wa + n] = b.entries
        for m in range(-wa, wa + 1):
            left = a.entries[:, wa + m][:, None]
            product[:, wc + m - wb: wc + m + wb + 1] += left * padded[wa + m: wa + m + n]
    return BandedWindow(
        product,
        a.offset,
        _side_of(a, b),
        _grown_margin(a.exact_margin_top, b.exact_margin_top, wa),
        _grown_margin(a.exact_margin_bottom, b.exact_margin_bottom, wa),
    )


def band_polynomial(coeffs, a):
    """
    Evaluate a polynomial at a window by Horner's rule.

    Args:
        coeffs: ascending coefficients t_0, t_1, ..., t_d.
        a (BandedWindow): the argument.
    """
    coeffs = list(coeffs)
    result = band_scale(band_identity(a.n, a.offset, a.side), coeffs[-1])
    for t in reversed(coeffs[:-1]):
        result = band_scale(band_mul(result, a), 1.0, t)
    return result


def cholesky_upper(a):
    """
    Upper Cholesky factor Φ with positive diagonal and Φ*Φ = a on the window.

    The LAPACK band factorization runs forward over the rows without pivoting, so on a half-line
    window every row of Φ matches the factor of the infinite operator wherever `a` is exact.

    Raises:
        NotPositiveDefiniteError: with the global index of the failing row.
    """
    if not np.all(np.isfinite(a.entries)):
        raise NotPositiveDefiniteError(a.offset, "Matrix contains non-finite entries.")
    n, w = a.n, a.bandwidth
    ab = a.to_band_storage(upper_only=True)
    (pbtrf,) = get_lapack_funcs(("pbtrf",), (ab,))
    factor, info = pbtrf(ab, lower=0)
    if info > 0:
        row = a.offset + info - 1
        logging.debug(f"[banded_operations] Cholesky failed at row {row}")
        raise NotPositiveDefiniteError(row)
    if info < 0:
        raise InvalidInputError(f"Illegal argument {-info} passed to the band Cholesky.")
    entries = np.zeros((n, 2 * w + 1), dtype=factor.dtype)
    for k in range(0, w + 1):
        rows = np.arange(0, n - k)
        entries[rows, w + k] = factor[w - k, rows + k]
    top = 0 if (a.side == HALF_LINE and a.exact_margin_top == 0) else n
    return BandedWindow(entries, a.offset, a.side, top, a.exact_margin_bottom)


def similarity_forward(phi, a):
    """
    A* = Φ A Φ⁻¹ from the upper factor Φ, solving A*Φ = ΦA by a triangular solve.

    The result keeps the bandwidth of `a`; this is exact when Φ*Φ commutes with `a`
    (Φ from a² + const). The bottom margin grows by twice the bandwidth of `a`.
    """
    _check_aligned(phi, a)
    diag = phi.diagonal(0)
    small = np.nonzero(np.abs(diag) <= np.finfo(float).tiny)[0]
    if small.size:
        raise SingularSystemError(f"Zero pivot on the factor diagonal at row {phi.offset + int(small[0])}.")
    w, wp = a.bandwidth, phi.bandwidth
    right = band_mul(phi, a).to_dense().conj().T
    # Φ^H X = (ΦA)^H gives X = (A*)^H
    if 2 * wp + 1 < phi.n:
        lower = band_adjoint(phi).to_band_storage()[wp:]
        adjoint = solve_banded((wp, 0), lower, right, check_finite=False)
    else:
        adjoint = solve_triangular(phi.to_dense(), right, trans="C", lower=False)
    conjugated = adjoint.conj().T
    return BandedWindow.from_dense(
        conjugated,
        bandwidth=w,
        offset=a.offset,
        side=a.side,
        exact_margin_top=max(phi.exact_margin_top, a.exact_margin_top),
        exact_margin_bottom=max(phi.exact_margin_bottom, a.exact_margin_bottom) + 2 * w,
    )


def resolvent_columns(a, z, cols):
    """Columns `cols` (global indices) of (a - z)⁻¹ as an (n, len(cols)) array."""
    n, w = a.n, a.bandwidth
    shifted = band_scale(a, 1.0, -z)
    ab = shifted.to_band_storage()
    rhs = np.zeros((n, len(cols)), dtype=np.result_type(ab, complex))
    for position, j in enumerate(cols):
        rhs[a.local(j), position] = 1.0
    try:
        solution = solve_banded((w, w), ab.astype(rhs.dtype), rhs)
    except LinAlgError as e:
        raise SingularSystemError(f"Resolvent system is singular at z={z}: {e}") from e
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError(f"Resolvent system is singular at z={z}.")
    return solution


def resolvent_entry(a, z, i, j):
    """⟨i|(a - z)⁻¹|j⟩ by a banded factorization of a - z."""
    column = resolvent_columns(a, z, [j])
    return complex(column[a.local(i), 0])


def eigenvalues(a):
    """All eigenvalues of a self-adjoint window, ascending."""
    if a.n == 0:
        return np.zeros(0)
    values = eig_banded(a.to_band_storage(upper_only=True), lower=False, eigvals_only=True)
    return np.sort(np.real(values))


def interleave(block, scale=1.0):
    """
    Interleave a 2x2 block of N-windows into one 2N-window:
    entry(2i+r, 2j+s) = scale * block[r][s](i, j).
    """
    windows = [block[r][s] for r in range(2) for s in range(2)]
    first = windows[0]
    for other in windows[1:]:
        _check_aligned(first, other)
    n = first.n
    wmax = max(w.bandwidth for w in windows)
    wout = min(2 * wmax + 1, max(2 * n - 1, 0))
    dtype = np.result_type(*[w.entries for w in windows])
    entries = np.zeros((2 * n, 2 * wout + 1), dtype=dtype)
    for r in range(2):
        for s in range(2):
            part = block[r][s]
            wp = part.bandwidth
            for k in range(-wp, wp + 1):
                rows = np.arange(max(0, -k), n - max(0, k))
                out_k = 2 * k + s - r
                if abs(out_k) > wout:
                    continue
                entries[2 * rows + r, wout + out_k] = scale * part.entries[rows, wp + k]
    top = 2 * max(w.exact_margin_top for w in windows)
    bottom = 2 * max(w.exact_margin_bottom for w in windows)
    return BandedWindow(entries, 2 * first.offset, _side_of(*windows), top, bottom)


def truncate(a, start, n):
    """Sub-window of local rows start .. start+n-1; cut edges join the margins."""
    if start < 0 or n < 1 or start + n > a.n:
        raise InvalidInputError(f"Cannot truncate rows [{start}, {start + n}) of a window of size {a.n}.")
    w = a.bandwidth
    entries = a.entries[start: start + n]
    cut_below = a.n - start - n
    top = max(a.exact_margin_top - start, w if start > 0 else 0)
    bottom = max(a.exact_margin_bottom - cut_below, w if cut_below > 0 else 0)
    side = a.side if start == 0 else WHOLE_LINE
    return BandedWindow(entries, a.offset + start, side, max(top, 0), max(bottom, 0))


def reflect(a, pivot):
    """Window of U A U with U|l⟩ = |pivot - l⟩."""
    return BandedWindow(
        a.entries[::-1, ::-1],
        pivot - a.offset - a.n + 1,
        WHOLE_LINE,
        a.exact_margin_bottom,
        a.exact_margin_top,
    )


def max_abs_difference(a, b, rows=None):
    """Max-norm of a - b over local `rows` (all rows by default)."""
    _check_aligned(a, b)
    w = max(a.bandwidth, b.bandwidth)
    diff = pad_bandwidth(a, w).entries - pad_bandwidth(b, w).entries
    if rows is not None:
        diff = diff[rows]
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def max_asymmetry(a, rows=None):
    return max_abs_difference(a, band_adjoint(a), rows)


def interior_rows(a, margin=None):
    """Local slice of rows at least `margin` rows (default: the exactness margins) away from the edges."""
    if margin is None:
        return a.exact_rows()
    return slice(margin, max(margin, a.n - margin))


def periodic_closure(a, period):
    """
    Dense matrix of the periodic operator on a ring of `a.n` sites.

    Rows are copied from one period of exact rows of `a` and their band entries wrapped modulo n.
    With n a multiple of the period, the eigenvalues of the closure lie exactly on the spectrum
    of the infinite periodic operator.
    """
    n, w = a.n, a.bandwidth
    if n % period != 0:
        raise InvalidInputError("Window size must be a multiple of the period.")
    start = a.exact_margin_top
    if start + period > n - a.exact_margin_bottom:
        raise InvalidInputError("Window has fewer exact rows than one period.")
    closure = np.zeros((n, n), dtype=a.entries.dtype)
    for i in range(n):
        template = start + (i - start) % period
        for k in range(-w, w + 1):
            closure[i, (i + k) % n] += a.entries[template, w + k]
    return closure
