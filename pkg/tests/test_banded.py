import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banded.exceptions import InvalidInputError, NotPositiveDefiniteError
from banded.operations import (
    band_add,
    band_adjoint,
    band_mul,
    band_polynomial,
    band_scale,
    band_shift,
    cholesky_upper,
    eigenvalues,
    interleave,
    max_abs_difference,
    max_asymmetry,
    periodic_closure,
    reflect,
    resolvent_entry,
    similarity_forward,
    truncate,
)
from banded.serialization import window_from_json, window_to_json
from banded.window import HALF_LINE, WHOLE_LINE, BandedWindow, JacobiCoeffs
from conftest import random_banded


def test_storage_is_row_aligned():
    a = BandedWindow.from_diagonals(4, {-1: [1.0, 2.0, 3.0], 0: 5.0, 2: [7.0, 8.0]}, offset=10)
    assert a.bandwidth == 2
    assert a.entry(11, 10) == 1.0
    assert a.entry(10, 12) == 7.0
    assert a.entry(13, 13) == 5.0
    assert a.entry(10, 13) == 0.0
    # cells pointing outside the window stay zero
    assert a.entries[0, 1] == 0.0
    assert a.entries[3, 4] == 0.0


def test_local_index_outside_window():
    a = BandedWindow.zeros(3, 1, offset=5)
    with pytest.raises(InvalidInputError):
        a.local(8)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 12),
    wa=st.integers(0, 3),
    wb=st.integers(0, 3),
    seed=st.integers(0, 2 ** 32 - 1),
)
def test_band_mul_matches_dense_product(n, wa, wb, seed):
    rng = np.random.default_rng(seed)
    a = random_banded(rng, n, wa)
    b = random_banded(rng, n, wb)
    product = band_mul(a, b)
    assert np.allclose(product.to_dense(), a.to_dense() @ b.to_dense(), atol=1e-12)


def test_linear_operations_match_dense(rng):
    a = random_banded(rng, 9, 2, complex_entries=True)
    b = random_banded(rng, 9, 1)
    assert np.allclose(band_add(a, b, 2.0, -3.0).to_dense(), 2.0 * a.to_dense() - 3.0 * b.to_dense())
    assert np.allclose(band_scale(a, 0.5, 2.0).to_dense(), 0.5 * a.to_dense() + 2.0 * np.eye(9))
    assert np.allclose(band_adjoint(a).to_dense(), a.to_dense().conj().T)


def test_band_polynomial_horner(rng):
    a = random_banded(rng, 8, 1, symmetric=True)
    dense = a.to_dense()
    value = band_polynomial([1.0, -2.0, 0.0, 1.0], a).to_dense()
    assert np.allclose(value, np.eye(8) - 2.0 * dense + dense @ dense @ dense, atol=1e-12)


def test_misaligned_windows_are_rejected():
    with pytest.raises(InvalidInputError):
        band_add(BandedWindow.zeros(4, 1, 0), BandedWindow.zeros(4, 1, 1))
    with pytest.raises(InvalidInputError):
        max_abs_difference(BandedWindow.zeros(4), BandedWindow.zeros(5))


def test_band_mul_grows_margins():
    a = JacobiCoeffs.constant(1.0).window(0, 20, WHOLE_LINE)
    square = band_mul(a, a)
    assert square.exact_margin_top == 2
    assert square.exact_margin_bottom == 2
    interior = square.exact_rows()
    assert np.allclose(square.entries[interior, square.bandwidth], 2.0)


def test_cholesky_factor(rng):
    a = random_banded(rng, 30, 2, symmetric=True)
    spd = band_scale(a, 1.0, 40.0)
    phi = cholesky_upper(spd)
    assert np.all(phi.diagonal(0) > 0)
    assert np.allclose(phi.diagonal(-1), 0.0)
    assert max_abs_difference(band_mul(band_adjoint(phi), phi), spd) <= 1e-12


def test_cholesky_reports_failing_row():
    a = BandedWindow.from_diagonals(3, {0: [1.0, -1.0, 1.0]}, offset=7)
    with pytest.raises(NotPositiveDefiniteError) as info:
        cholesky_upper(a)
    assert info.value.row == 8


def test_resolvent_entry_and_eigenvalues(rng):
    a = random_banded(rng, 15, 2, symmetric=True)
    z = 0.3 + 1.1j
    inverse = np.linalg.inv(a.to_dense() - z * np.eye(15))
    assert abs(resolvent_entry(a, z, 3, 7) - inverse[3, 7]) <= 1e-12
    assert np.allclose(eigenvalues(a), np.linalg.eigvalsh(a.to_dense()), atol=1e-12)


def test_reflect_maps_indices_through_pivot(rng):
    a = random_banded(rng, 7, 2, offset=3)
    pivot = 5
    r = reflect(a, pivot)
    assert r.offset == pivot - 9
    for i in range(3, 10):
        for j in range(max(3, i - 2), min(10, i + 3)):
            assert r.entry(pivot - i, pivot - j) == a.entry(i, j)


def test_interleave_places_blocks():
    n = 4
    blocks = [
        [BandedWindow.from_diagonals(n, {0: float(10 * r + s + 1)}, offset=2) for s in range(2)]
        for r in range(2)
    ]
    out = interleave(blocks, scale=2.0)
    assert out.offset == 4
    for r in range(2):
        for s in range(2):
            assert out.entry(4 + 2 * 1 + r, 4 + 2 * 1 + s) == 2.0 * (10 * r + s + 1)


def test_truncate_marks_cut_edges(rng):
    a = random_banded(rng, 12, 2, offset=0, side=HALF_LINE)
    part = truncate(a, 3, 5)
    assert part.offset == 3
    assert part.side == WHOLE_LINE
    assert part.exact_margin_top == 2
    assert part.exact_margin_bottom == 2
    head = truncate(a, 0, 4)
    assert head.side == HALF_LINE
    assert head.exact_margin_top == 0
    with pytest.raises(InvalidInputError):
        truncate(a, 10, 5)


def test_periodic_closure_of_free_operator():
    a = JacobiCoeffs.constant(1.0).window(0, 8, WHOLE_LINE)
    values = np.sort(np.linalg.eigvalsh(periodic_closure(a, 1)))
    expected = np.sort(2.0 * np.cos(2.0 * np.pi * np.arange(8) / 8))
    assert np.allclose(values, expected, atol=1e-12)
    with pytest.raises(InvalidInputError):
        periodic_closure(a, 3)


def test_band_shift_powers():
    up = band_shift(6, 2).to_dense()
    assert np.array_equal(up, np.eye(6, k=2))
    down = band_shift(6, -1)
    assert np.array_equal(down.to_dense(), np.eye(6, k=-1))
    assert down.exact_margin_top == 1


def test_jacobi_coeffs_validation():
    with pytest.raises(InvalidInputError):
        JacobiCoeffs([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        JacobiCoeffs.periodic([0.5, -0.1], [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        JacobiCoeffs.periodic([0.5], [np.nan])


def test_jacobi_windows_and_margins():
    coeffs = JacobiCoeffs.periodic([0.2, 0.3], [0.1, -0.1])
    whole = coeffs.window(-3, 6, WHOLE_LINE)
    assert (whole.exact_margin_top, whole.exact_margin_bottom) == (1, 1)
    assert whole.entry(-3, -3) == pytest.approx(-0.1)
    assert whole.entry(-3, -2) == pytest.approx(0.2)
    half = coeffs.window(0, 6, HALF_LINE)
    assert half.exact_margin_top == 0

    finite = JacobiCoeffs([0.5, 0.7], [1.0, 2.0, 3.0], first=4)
    full = finite.window(4)
    assert full.n == 3
    assert (full.exact_margin_top, full.exact_margin_bottom) == (0, 0)
    assert full.entry(5, 6) == pytest.approx(0.7)


def test_reflected_coefficients():
    coeffs = JacobiCoeffs.periodic([0.1, 0.2, 0.3], [1.0, 2.0, 3.0])
    mirrored = coeffs.reflected()
    for k in range(-4, 5):
        assert mirrored.q_at(k) == coeffs.q_at(1 - k)
        assert mirrored.p_at(k) == coeffs.p_at(2 - k)
    a = coeffs.window(-5, 12, WHOLE_LINE)
    assert max_abs_difference(reflect(a, 1), mirrored.window(-5, 12, WHOLE_LINE)) <= 1e-15


def test_norm_bound():
    assert JacobiCoeffs.constant(1.0).norm_bound() == 2.0
    assert JacobiCoeffs([0.5], [1.0, -2.0]).norm_bound() == 2.5


def test_window_json_round_trip(rng):
    for window in (random_banded(rng, 6, 2, offset=-3), random_banded(rng, 5, 1, complex_entries=True)):
        back = window_from_json(window_to_json(window))
        assert np.array_equal(back.entries, window.entries)
        assert back.offset == window.offset
        assert back.side == window.side


def test_window_json_rejects_malformed():
    with pytest.raises(InvalidInputError):
        window_from_json("{not json")
    with pytest.raises(InvalidInputError):
        window_from_json('{"n": 2, "w": 0, "diags": [[1.0]], "offset": 0, "side": "whole_line"}')


def test_window_json_rejects_non_finite_entries():
    a = BandedWindow.from_diagonals(3, {0: [1.0, np.nan, 2.0]})
    with pytest.raises(InvalidInputError):
        window_to_json(a)


def test_cholesky_of_shifted_square_has_known_diagonal():
    a = JacobiCoeffs(np.ones(199), np.zeros(200)).window(0, 200, HALF_LINE)
    phi = cholesky_upper(band_scale(band_mul(a, a), 1.0, 8.0))
    assert phi.diagonal(0)[:3] == pytest.approx([3.0, np.sqrt(10.0), np.sqrt(89.0 / 9.0)], abs=1e-13)


def test_cholesky_is_truncation_consistent():
    a = JacobiCoeffs(np.ones(99), np.linspace(-0.5, 0.5, 100)).window(0, 100, HALF_LINE)
    shifted = band_scale(band_mul(a, a), 1.0, 8.0)
    long = cholesky_upper(shifted)
    short = cholesky_upper(truncate(shifted, 0, 50))
    assert np.max(np.abs(short.to_dense() - long.to_dense()[:50, :50])) <= 1e-14


def test_similarity_forward_against_dense_oracle():
    a = JacobiCoeffs.constant(1.0).window(0, 60, HALF_LINE)
    phi = cholesky_upper(band_scale(band_mul(a, a), 1.0, 8.0))
    forward = similarity_forward(phi, a)
    factor = phi.to_dense()
    oracle = factor @ a.to_dense() @ np.linalg.inv(factor)
    rows = forward.exact_rows()
    assert np.max(np.abs(forward.to_dense() - oracle)[rows]) <= 1e-12
    assert max_asymmetry(forward, rows) <= 1e-12
    assert np.allclose(eigenvalues(a), np.sort(np.linalg.eigvals(oracle).real), atol=1e-10)


@pytest.mark.parametrize("n", [4, 9, 40])
def test_similarity_forward_on_narrow_and_full_bands(rng, n):
    a = random_banded(rng, n, 2, side=HALF_LINE, symmetric=True)
    phi = cholesky_upper(band_scale(band_mul(a, a), 1.0, 8.0))
    factor = phi.to_dense()
    oracle = factor @ a.to_dense() @ np.linalg.inv(factor)
    forward = similarity_forward(phi, a)
    assert forward.bandwidth == 2
    assert np.max(np.abs(forward.to_dense() - oracle)) <= 1e-11


@pytest.mark.parametrize("n", [16, 128, 512])
def test_cholesky_reconstructs_large_windows(rng, n):
    a = random_banded(rng, n, 3, side=HALF_LINE, symmetric=True)
    spd = band_scale(band_mul(a, a), 1.0, 4.0)
    phi = cholesky_upper(spd)
    assert np.all(phi.diagonal(0) > 0)
    assert max_abs_difference(band_mul(band_adjoint(phi), phi), spd) <= 1e-10 * max(1.0, float(np.max(np.abs(spd.entries))))


def test_half_line_resolvent_limit():
    a = JacobiCoeffs(np.full(1999, 0.5), np.zeros(2000)).window(0, 2000, HALF_LINE)
    assert resolvent_entry(a, 2.0, 0, 0) == pytest.approx(-4.0 + 2.0 * np.sqrt(3.0), abs=1e-10)
    assert resolvent_entry(BandedWindow.zeros(1), 0.5j, 0, 0) == pytest.approx(-1.0 / 0.5j)
