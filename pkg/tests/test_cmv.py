import numpy as np
import pytest

from banded.exceptions import InvalidInputError, NonConvergenceError
from cmv import schur_flow
from cmv.operator import (
    VerblunskySeq,
    build_cmv,
    cmv_factors,
    five_diagonal_check,
    unitary_defect,
    verblunsky_from_cmv,
    z_matrix,
)
from cmv.schur_flow import lax_generator, schur_flow_step, spectral_drift


def random_sequence(rng, n, max_abs=0.9):
    return VerblunskySeq(rng.uniform(0.0, max_abs, n) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n)))


@pytest.mark.parametrize("a", [[0.5, 1.0], [np.nan], [0.9j, -1.2]])
def test_coefficients_inside_the_disk(a):
    with pytest.raises(InvalidInputError):
        VerblunskySeq(a)


def test_pairs():
    seq = VerblunskySeq.from_pairs([[0.1, 0.2], [-0.3, 0.0]])
    assert seq.a[0] == 0.1 + 0.2j
    assert seq.to_pairs() == [[0.1, 0.2], [-0.3, 0.0]]
    assert seq.rho[1] == pytest.approx(np.sqrt(0.91))


@pytest.mark.parametrize("n, first", [(4, 0), (7, 0), (8, 1)])
def test_window_shape_preconditions(n, first):
    with pytest.raises(InvalidInputError):
        build_cmv(VerblunskySeq(np.zeros(n), first))


def test_factors_are_unitary(rng):
    even, odd = cmv_factors(random_sequence(rng, 12))
    assert unitary_defect(even.to_dense()) <= 1e-14
    assert unitary_defect(odd.to_dense()) <= 1e-14
    assert odd.entry(0, 0) == 1.0


@pytest.mark.parametrize("n", [10, 32, 64])
def test_cmv_is_unitary_and_five_diagonal(rng, n):
    seq = random_sequence(rng, n)
    cmv = build_cmv(seq)
    assert cmv.n == n
    assert cmv.unitary_defect <= 1e-13
    eigenvalues = np.linalg.eigvals(cmv.window.to_dense())
    assert np.max(np.abs(np.abs(eigenvalues) - 1.0)) <= 1e-10
    residuals = five_diagonal_check(cmv, seq)
    for name in ("diag", "first", "second", "outside_band"):
        assert residuals[name] <= 1e-12, name
    assert residuals["third_superdiagonal"] <= 1e-14
    assert residuals["second_superdiagonal_min"] > 0


def test_sum_of_cmv_and_adjoint_is_hermitian(rng):
    cmv = build_cmv(random_sequence(rng, 16))
    total = z_matrix(cmv).to_dense()
    assert np.allclose(total, total.conj().T, atol=1e-15)
    assert z_matrix(cmv.window).exact_margin_top == z_matrix(cmv).exact_margin_top


def test_real_coefficients_give_real_entries(rng):
    seq = VerblunskySeq(rng.uniform(-0.5, 0.5, 10))
    total = z_matrix(build_cmv(seq)).to_dense()
    assert np.max(np.abs(total.imag)) == 0.0
    assert total[5, 5].real == pytest.approx(-2.0 * seq.a[5].real * seq.a[4].real)


def test_coefficients_are_recovered_from_the_matrix(rng):
    seq = random_sequence(rng, 20)
    recovered = verblunsky_from_cmv(build_cmv(seq).window, last_coefficient=seq.a[-1])
    np.testing.assert_allclose(recovered.a, seq.a, rtol=0, atol=1e-12)


def test_skew_generator_is_anti_hermitian(rng):
    matrix = build_cmv(random_sequence(rng, 12)).window.to_dense()
    skew = lax_generator(matrix, "skew")
    assert np.allclose(skew, -skew.conj().T, atol=1e-15)
    half = lax_generator(matrix, "upper_half")
    assert np.allclose(half + half.conj().T, matrix + matrix.conj().T, atol=1e-15)
    with pytest.raises(InvalidInputError):
        lax_generator(matrix, "lower")


def test_spectral_drift_matches_permutations():
    values = np.exp(1j * np.array([0.1, 1.0, 2.5]))
    assert spectral_drift(values, values[::-1]) == 0.0
    assert spectral_drift(values, values * np.exp(1e-3j)) == pytest.approx(abs(1.0 - np.exp(1e-3j)))


def test_schur_flow_preserves_the_spectrum(rng):
    seq = random_sequence(rng, 16, max_abs=0.5)
    trajectory = schur_flow_step(seq, 1e-3, 200, record_every=50)
    assert [entry["t"] for entry in trajectory] == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2])
    assert trajectory[0]["seq"] is seq
    assert max(entry["spectral_drift"] for entry in trajectory) <= 1e-6
    assert max(entry["unitary_defect"] for entry in trajectory) <= 1e-10
    final = trajectory[-1]["seq"]
    assert final.a[-1] == seq.a[-1]
    assert np.max(np.abs(final.a)) < 1.0


def test_schur_flow_arguments(rng):
    seq = random_sequence(rng, 8)
    for dt in (0.0, -1e-3, 0.5):
        with pytest.raises(InvalidInputError):
            schur_flow_step(seq, dt, 10)
    with pytest.raises(InvalidInputError):
        schur_flow_step(seq, 1e-3, 10, projection="lower")
    assert len(schur_flow_step(seq, 1e-3, 3)) == 2


def test_five_diagonal_check_needs_an_interior(rng):
    seq = random_sequence(rng, 8)
    with pytest.raises(InvalidInputError):
        five_diagonal_check(build_cmv(seq), seq)


def test_schur_flow_checks_coefficients_between_recorded_steps(monkeypatch):
    seq = VerblunskySeq(np.full(16, 0.3))
    start = build_cmv(seq).window.to_dense()
    calls = []

    def jump_once(matrix, fun, dt, *args):
        calls.append(dt)
        out = start.copy()
        if len(calls) == 2:
            out[0, 0] = 1.0
        return out

    monkeypatch.setattr(schur_flow, "rk4_step", jump_once)
    with pytest.raises(NonConvergenceError):
        schur_flow_step(seq, 1e-3, 5, record_every=5)
    assert len(calls) == 2
