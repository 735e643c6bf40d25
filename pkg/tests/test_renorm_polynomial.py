import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from banded.exceptions import InvalidInputError, NotPositiveDefiniteError
from banded.operations import band_polynomial, eigenvalues, max_abs_difference
from banded.window import HALF_LINE, WHOLE_LINE, BandedWindow, JacobiCoeffs
from covering.maps import ExpandingPolynomial, SignVector
from renorm.darboux import darboux, darboux_lipschitz, quadratic_split
from renorm.lipschitz import empirical_lipschitz, random_periodic_pairs
from renorm.polynomial import (
    assemble_renormalized,
    block_from_resolvent,
    branch_targets,
    coeff_distance,
    dual_delta_check,
    enumerate_branches,
    half_line_moments,
    iterate_polynomial_renorm,
    merged_branches,
    renormalized_coeffs,
)
from renorm.resolvents import MINUS, PLUS, half_line_resolvent, half_line_resolvents
from renorm.residuals import completeness_scan, renorm_residuals
from transfer.measures import invariant_moments


def interior(n):
    return slice(n // 4, n - n // 4)


@pytest.mark.parametrize("side", [MINUS, PLUS])
def test_free_resolvent_fixed_point(side):
    jt = JacobiCoeffs.constant(0.5)
    assert half_line_resolvent(jt, -2.0, 0, side) == pytest.approx(4.0 - 2.0 * math.sqrt(3.0), abs=1e-13)


def test_resolvents_over_a_period_match_single_solves(rng):
    (jt, _), = random_periodic_pairs(rng, 1, period=3)
    z = 0.4 + 0.8j
    for side in (MINUS, PLUS):
        values = half_line_resolvents(jt, z, side)
        assert np.allclose(values, [half_line_resolvent(jt, z, s, side) for s in range(3)], atol=1e-13)


def test_finite_resolvent_matches_dense():
    jt = JacobiCoeffs([0.5, 0.7, 0.2], [0.1, -0.3, 0.0, 0.4])
    z = 0.3 + 1.0j
    dense = jt.window(0, 4, HALF_LINE).to_dense()
    inverse = np.linalg.inv(dense - z * np.eye(4))
    assert half_line_resolvent(jt, z, 3, MINUS) == pytest.approx(inverse[3, 3], abs=1e-14)
    assert half_line_resolvent(jt, z, 0, PLUS) == pytest.approx(inverse[0, 0], abs=1e-14)


def test_block_from_resolvent_of_the_map_itself():
    T = ExpandingPolynomial((1.0, 0.0, -3.0), 1.0)
    block = block_from_resolvent(T.poly, T)
    assert np.allclose(block.q, 0.0, atol=1e-14)
    assert block.p == pytest.approx([math.sqrt(3.0)], abs=1e-13)
    with pytest.raises(InvalidInputError):
        block_from_resolvent(Polynomial([1.0, 1.0]), T)


def test_branch_targets_are_monic_with_matching_trace(rng):
    T = ExpandingPolynomial((1.0, 0.5, -10.0), 1.0)
    (jt, _), = random_periodic_pairs(rng, 1)
    target = branch_targets(jt, T, SignVector.minus(2), 0)
    assert target.coef[2] == 1.0
    assert target.coef[1] == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(InvalidInputError):
        branch_targets(jt, T, SignVector((-1, -1)), 0)


@pytest.mark.parametrize("coeffs", [(1.0, 0.0, -3.0), (1.0, 0.0, -6.0, 0.0)])
def test_magic_formula(coeffs):
    T = ExpandingPolynomial(coeffs, 2.0)
    d = T.degree
    J = renormalized_coeffs(JacobiCoeffs.constant(1.0), T, SignVector.minus(d)).window(0, d * 100, WHOLE_LINE)
    image = band_polynomial(list(reversed(T.coeffs)), J)
    expected = BandedWindow.from_diagonals(J.n, {d: 1.0, -d: 1.0})
    assert max_abs_difference(image, expected, interior(J.n)) <= 1e-9


def test_renormalized_coeffs_needs_periodic_data():
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    with pytest.raises(InvalidInputError):
        renormalized_coeffs(JacobiCoeffs([0.2], [0.0, 0.1]), T, SignVector.minus(2))


def test_branches_solve_the_renormalization_equation(rng):
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    (jt, _), = random_periodic_pairs(rng, 1)
    results = enumerate_branches(jt, T, (0, 100))
    assert [r.delta.label() for r in results] == ["-", "+"]
    assert all(r.is_valid for r in results)
    assert coeff_distance(results[0].coeffs, results[1].coeffs) > 1e-6
    assert merged_branches(results) == []
    for result in results:
        assert result.coeffs.period == 4
        residuals = renorm_residuals(result.window, jt, T, 1.0 + 2.0j)
        assert max(residuals.values()) <= 1e-8


def test_assembled_window_matches_enumeration(rng):
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    (jt, _), = random_periodic_pairs(rng, 1)
    window = assemble_renormalized(jt, T, SignVector.minus(2), (3, 20))
    assert window.offset == 6 and window.n == 34
    expected = enumerate_branches(jt, T, (3, 20))[0].window
    np.testing.assert_array_equal(window.entries, expected.entries)
    with pytest.raises(InvalidInputError):
        assemble_renormalized(jt, T, SignVector.minus(2), (5, 5))


def test_residuals_detect_a_perturbation(rng):
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    (jt, _), = random_periodic_pairs(rng, 1)
    window = renormalized_coeffs(jt, T, SignVector.minus(2)).window(0, 200, WHOLE_LINE)
    entries = np.array(window.entries)
    entries[100, 2] += 1e-3
    entries[101, 0] += 1e-3
    perturbed = BandedWindow(entries, 0, WHOLE_LINE, 1, 1)
    assert renorm_residuals(perturbed, jt, T, 3.1 + 0.5j)["eq_t01"] >= 1e-4
    with pytest.raises(InvalidInputError):
        renorm_residuals(window, jt, T, 1.0)


def test_duality(rng):
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    for jt, _ in random_periodic_pairs(rng, 3):
        for delta in SignVector.all_for(2):
            assert dual_delta_check(jt, T, delta) <= 1e-8


@pytest.mark.slow
def test_cubic_has_four_distinct_branches(rng):
    T = ExpandingPolynomial((1.0, 0.0, -6.0, 0.0), 2.0)
    (jt, _), = random_periodic_pairs(rng, 1)
    results = enumerate_branches(jt, T, (0, 60))
    assert len(results) == 4
    assert all(r.is_valid for r in results)
    assert merged_branches(results) == []
    for result in results:
        assert max(renorm_residuals(result.window, jt, T, 0.5 + 3.0j).values()) <= 1e-8


@pytest.mark.slow
def test_completeness_scan_finds_only_constructed_branches():
    result = completeness_scan(0.5, ExpandingPolynomial((1.0, 0.0, -10.0)), grid=21)
    assert len(result["branches"]) == 2
    assert result["unmatched"] == []


def test_half_line_moments_of_free_operator():
    free = JacobiCoeffs.constant(1.0)
    for side in (PLUS, MINUS):
        moments = half_line_moments(free, 6, side)
        assert moments.values == pytest.approx([1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 5.0], abs=1e-13)


def test_iteration_multiplies_the_period(rng):
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    (jt, _), = random_periodic_pairs(rng, 1)
    final, history = iterate_polynomial_renorm(jt, T, SignVector.minus(2), 3, K=4)
    assert final.period == 16
    assert [entry["period"] for entry in history] == [4, 8, 16]
    assert all(entry["plus"].is_hankel_psd() for entry in history)


def test_darboux_is_isospectral():
    J = JacobiCoeffs.constant(0.5).window(0, 300, WHOLE_LINE)
    out, phi = darboux(J, 3.0, return_factor=True)
    assert np.max(np.abs(eigenvalues(out) - eigenvalues(J))) <= 1e-10
    assert np.max(np.abs(phi.diagonal(-1))) == 0.0
    with pytest.raises(InvalidInputError):
        darboux(J, 2.0)
    with pytest.raises(NotPositiveDefiniteError):
        darboux(JacobiCoeffs.constant(0.5, -5.0).window(0, 50, WHOLE_LINE), 3.0)


def test_quadratic_split_of_free_operator():
    split = quadratic_split(JacobiCoeffs.constant(1.0).window(0, 20, WHOLE_LINE))
    assert split["residual"] == 0.0
    phi = split["Phi"]
    assert phi.n == 10
    assert np.all(phi.diagonal(0) == 1.0)
    assert np.all(phi.diagonal(1) == 1.0)


def test_quadratic_split_rejects_bad_windows():
    with pytest.raises(InvalidInputError):
        quadratic_split(JacobiCoeffs.constant(1.0, 0.3).window(0, 20, WHOLE_LINE))
    with pytest.raises(InvalidInputError):
        quadratic_split(JacobiCoeffs.constant(1.0).window(0, 21, WHOLE_LINE))


def test_renormalization_contracts_for_large_constant_term(rng):
    T = ExpandingPolynomial((1.0, 0.0, -12.0))
    result = empirical_lipschitz(T, random_periodic_pairs(rng, 4), SignVector.minus(2), blocks=100)
    assert result["invalid"] == 0
    assert 0.0 < result["max_ratio"] < 1.0


def test_identical_pairs_have_zero_ratio(rng):
    (jt, _), = random_periodic_pairs(rng, 1)
    T = ExpandingPolynomial((1.0, 0.0, -12.0))
    assert empirical_lipschitz(T, [(jt, jt)], SignVector.minus(2), blocks=60)["per_pair"] == [0.0]
    window = jt.window(0, 100, WHOLE_LINE)
    (entry,) = darboux_lipschitz([4.0], [(window, window)])
    assert entry["max_ratio"] == 0.0
    assert entry["shape"] == pytest.approx(4.0)


def test_darboux_ratios_are_finite(rng):
    pairs = [(a.window(0, 120, WHOLE_LINE), b.window(0, 120, WHOLE_LINE)) for a, b in random_periodic_pairs(rng, 2)]
    for entry in darboux_lipschitz([3.0, 6.0], pairs):
        assert math.isfinite(entry["max_ratio"])
        assert entry["shape"] == pytest.approx(2.0 * entry["rho"] / (entry["rho"] - 2.0))


@pytest.mark.slow
def test_minus_branch_iteration_reaches_the_balanced_measure(rng):
    T = ExpandingPolynomial((1.0, 0.0, -10.0))
    (jt, _), = random_periodic_pairs(rng, 1)
    _, history = iterate_polynomial_renorm(jt, T, SignVector.minus(2), 10, K=4)
    np.testing.assert_allclose(history[-1]["plus"].values, invariant_moments(T, 4).values, rtol=1e-6, atol=1e-6)
