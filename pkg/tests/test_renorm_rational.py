import numpy as np
import pytest

from banded.exceptions import InvalidInputError, NoRealSolutionError
from banded.operations import band_mul, band_scale, cholesky_upper, max_abs_difference, resolvent_entry, truncate
from banded.window import HALF_LINE, WHOLE_LINE, BandedWindow, JacobiCoeffs
from covering.maps import RationalCovering
from renorm.period_two import floquet_spectrum, period_two_polynomial, period_two_rational, period_two_rational_symbol
from renorm.rational import (
    contraction_ratios,
    factor_shifted_square,
    iterate_renorm,
    lambda_sequence,
    moment_pushforward,
    odd_basis_coefficients,
    pi_star,
    resolvent_identity_residual,
    spectral_measure,
    window_moments,
)
from transfer.measures import MomentVector, invariant_moments, measure_moments


def random_jacobi(rng, n):
    return JacobiCoeffs(rng.uniform(0.1, 1.0, n - 1), rng.uniform(-1.0, 1.0, n)).window(0, n, HALF_LINE)


def test_pi_star_of_zero_is_block_diagonal():
    out = pi_star(BandedWindow.zeros(3, 1, 0, HALF_LINE), RationalCovering.normalized(2.0))
    assert out.n == 6
    expected = np.kron(np.eye(3), np.array([[0.0, 1.0], [1.0, 0.0]]) / np.sqrt(2.0))
    assert np.allclose(out.to_dense(), expected, atol=1e-15)


@pytest.mark.parametrize("x0", [-1.5, 0.0, 0.7])
def test_pi_star_of_scalar_has_preimage_spectrum(x0):
    cov = RationalCovering.normalized(2.0)
    out = pi_star(JacobiCoeffs([], [x0]).window(0, 1, HALF_LINE), cov)
    assert np.allclose(np.linalg.eigvalsh(out.to_dense()), cov.preimages(x0), atol=1e-14)


def test_pi_star_initial_coupling():
    a = JacobiCoeffs.constant(1.0).window(0, 40, HALF_LINE)
    out = pi_star(a, RationalCovering.normalized(2.0))
    assert out.entry(1, 0) == pytest.approx(0.75, abs=1e-14)
    assert np.allclose(out.to_dense(), out.to_dense().T, atol=1e-12)


def test_pi_star_needs_half_line_window():
    with pytest.raises(InvalidInputError):
        pi_star(JacobiCoeffs.constant(1.0).window(0, 8, WHOLE_LINE), RationalCovering.normalized(2.0))


def test_lambda_sequence_examples():
    cov = RationalCovering.normalized(2.0)
    assert np.allclose(lambda_sequence(np.zeros(5), cov), np.sqrt(8.0))
    assert lambda_sequence(np.ones(5), cov)[:3] == pytest.approx([3.0, np.sqrt(10.0), np.sqrt(89.0 / 9.0)], abs=1e-14)
    with pytest.raises(InvalidInputError):
        lambda_sequence([1.0, -1.0], cov)


@pytest.mark.parametrize("tau", [1.5, 2.0, 5.0])
def test_lambda_sequence_matches_cholesky(tau):
    cov = RationalCovering.normalized(tau)
    p = np.ones(199)
    jacobi = JacobiCoeffs(p, np.zeros(200)).window(0, 200, HALF_LINE)
    factor = cholesky_upper(band_scale(band_mul(jacobi, jacobi), 1.0, cov.shift))
    assert np.max(np.abs(lambda_sequence(p, cov) - factor.diagonal(0))) <= 1e-12


def test_iteration_converges_to_invariant_moments():
    cov = RationalCovering.normalized(2.0)
    snapshots = iterate_renorm(BandedWindow.zeros(256, 1, 0, HALF_LINE), cov, 30, 256)
    assert len(snapshots) == 31
    final = window_moments(snapshots[-1], 4)
    assert abs(final[1]) <= 1e-14
    assert abs(final[2] - 4.0 / 7.0) <= 1e-8
    assert invariant_moments(cov, 2)[2] == pytest.approx(4.0 / 7.0, abs=1e-15)

    errors = [abs(window_moments(a, 2)[2] - 4.0 / 7.0) for a in snapshots]
    ratios = contraction_ratios(errors, floor=1e-12)
    assert ratios
    assert abs(np.median(ratios) - 1.0 / 8.0) <= 0.05


@pytest.mark.slow
def test_iteration_is_window_consistent():
    cov = RationalCovering.normalized(2.0)
    a0 = JacobiCoeffs.constant(0.5).window(0, 256, HALF_LINE)
    small = iterate_renorm(truncate(a0, 0, 128), cov, 10, 128)[-1]
    large = iterate_renorm(a0, cov, 10, 256)[-1]
    assert max_abs_difference(truncate(small, 0, 32), truncate(large, 0, 32)) <= 1e-10


def test_iteration_window_floor():
    with pytest.raises(InvalidInputError):
        iterate_renorm(BandedWindow.zeros(8, 1, 0, HALF_LINE), RationalCovering.normalized(2.0), 1, 8)


def test_moment_pushforward_low_degrees():
    tau = 3.0
    cov = RationalCovering.normalized(tau)
    pushed = moment_pushforward(MomentVector([1.0, 0.3, 0.5]), cov)
    assert pushed[0] == 1.0
    assert pushed[1] == pytest.approx(0.3 / (2.0 * tau))
    assert pushed[2] == pytest.approx(0.5 / (2.0 * tau ** 2) + (tau - 1.0) / tau)


def test_resolvent_identity_at_zero():
    cov = RationalCovering.normalized(2.0)
    z = 1.0 + 1.0j
    a = BandedWindow.zeros(1, 0, 0, HALF_LINE)
    assert resolvent_identity_residual(a, cov, z) <= 1e-14
    assert resolvent_entry(pi_star(a, cov), z, 0, 0) == pytest.approx(-z / (z * z - 0.5), abs=1e-14)


@pytest.mark.parametrize("tau", [1.5, 2.0, 5.0])
def test_resolvent_identity_on_random_windows(rng, tau):
    cov = RationalCovering.normalized(tau)
    for n in (2, 6, 12):
        a = random_jacobi(rng, n)
        for z in (0.5 + 0.3j, -2.0 + 1.5j, 0.1j):
            assert resolvent_identity_residual(a, cov, z) <= 1e-11
    with pytest.raises(InvalidInputError):
        resolvent_identity_residual(random_jacobi(rng, 4), cov, 0.5)


def test_odd_basis_inverts_factor(rng):
    cov = RationalCovering.normalized(2.0)
    a = random_jacobi(rng, 8)
    phi = factor_shifted_square(a, cov).to_dense()
    coefficients = odd_basis_coefficients(a, cov)
    assert np.allclose(np.triu(coefficients), coefficients)
    assert np.max(np.abs(phi @ coefficients - np.eye(8))) <= 1e-9


def test_window_moments_match_spectral_measure(rng):
    a = random_jacobi(rng, 10)
    assert np.allclose(window_moments(a, 8).values, measure_moments(spectral_measure(a), 8).values, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("tau", [1.5, 2.0, 5.0])
def test_pi_star_moments_are_the_pushforward_moments(rng, tau):
    cov = RationalCovering.normalized(tau)
    for a in (random_jacobi(rng, 40), JacobiCoeffs.constant(0.5).window(0, 64, HALF_LINE)):
        expected = moment_pushforward(window_moments(a, 12), cov).values
        np.testing.assert_allclose(window_moments(pi_star(a, cov), 12).values, expected, rtol=1e-10, atol=1e-10)


def test_pi_star_spectrum_lies_over_the_input_spectrum(rng):
    cov = RationalCovering.normalized(2.0)
    a = random_jacobi(rng, 256)
    values = np.linalg.eigvalsh(pi_star(a, cov).to_dense())
    assert values.size == 512
    base = np.linalg.eigvalsh(a.to_dense())
    # every eigenvalue of a is hit by exactly two eigenvalues of pi_star(a)
    np.testing.assert_allclose(np.sort(cov(values)), np.repeat(base, 2), rtol=0.0, atol=1e-9)


def test_contraction_ratios_skip_floor():
    assert contraction_ratios([1.0, 0.5, 0.25, 1e-20, 1e-21], floor=1e-12) == [0.5, 0.5]


def test_contraction_ratios_stop_at_a_plateau():
    errors = [0.1 / 8.0 ** k for k in range(9)] + [1.43e-10] * 20
    ratios = contraction_ratios(errors, floor=1e-9)
    assert ratios == pytest.approx([0.125] * 7)
    assert contraction_ratios([1e-10] * 5, floor=1e-12) == []


def test_period_two_polynomial_identity():
    xi1, lam = 1.0, 2.0
    J = period_two_polynomial(xi1, lam, 0.6).window(0, 200, WHOLE_LINE)
    square = band_scale(band_mul(J, J), 1.0, -lam)
    expected = BandedWindow.from_diagonals(200, {2: xi1 / 2, -2: xi1 / 2})
    assert max_abs_difference(square, expected, slice(50, 150)) <= 1e-12
    with pytest.raises(NoRealSolutionError):
        period_two_polynomial(1.0, 0.1, 0.6)
    with pytest.raises(InvalidInputError):
        period_two_polynomial(-1.0, 2.0, 0.6)


def test_period_two_rational_family():
    cov = RationalCovering.normalized(2.0)
    symbol = period_two_rational_symbol(1.0, cov, 0.1)
    assert symbol["second"][0] == pytest.approx(1.0 / (2.0 * cov.tau))
    V = period_two_rational(1.0, cov, 0.1, 400)
    lhs = band_scale(band_mul(V, V), cov.tau, -cov.c)
    rhs = band_mul(BandedWindow.from_diagonals(400, {2: 0.5, -2: 0.5}), V)
    assert max_abs_difference(lhs, rhs, slice(100, 300)) <= 1e-12
    spectrum = floquet_spectrum(V, 2)
    assert np.max(np.abs(cov(spectrum))) <= 1.0 + 1e-8
    with pytest.raises(NoRealSolutionError):
        period_two_rational_symbol(1.0, cov, 0.7)
    with pytest.raises(InvalidInputError):
        period_two_rational(1.0, cov, 0.1, 401)
