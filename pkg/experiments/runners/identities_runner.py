import numpy as np

from banded.operations import (
    band_adjoint,
    band_mul,
    band_polynomial,
    band_scale,
    eigenvalues,
    max_abs_difference,
)
from banded.window import HALF_LINE, WHOLE_LINE, BandedWindow, JacobiCoeffs
from cmv.operator import VerblunskySeq, build_cmv, five_diagonal_check
from covering.branching import BranchingData, validate
from covering.maps import ExpandingPolynomial, RationalCovering, SignVector
from renorm.darboux import darboux, quadratic_split
from renorm.lipschitz import random_periodic_pairs
from renorm.period_two import floquet_spectrum, period_two_polynomial, period_two_rational
from renorm.polynomial import dual_delta_check, renormalized_coeffs
from renorm.rational import moment_pushforward, resolvent_identity_residual
from transfer.measures import DiscreteMeasure, measure_moments, pushforward
from .base_runner import BaseRunner

# 51 resolvent-identity inputs over the three τ values
RESOLVENT_SAMPLES_PER_TAU = 17


def _interior(n):
    return slice(n // 4, n - n // 4)


class IdentitiesRunner(BaseRunner):
    """
    Verification suite over the default instance of every module: exact finite-dimensional
    identities (resolvent identity, Magic Formula, δ-duality, Darboux isospectrality, quadratic
    split, period-two closed forms, CMV entry formulas, pushforward duality) and the covering
    validator on the Riemann-sphere example.
    """

    kind = "verify_identities"

    def run(self):
        self.samples = self.parameters.get("samples", 10)
        self.scale = self.parameters.get("tolerance_scale", 1.0)
        self._covering()
        self._resolvent_identity()
        self._magic_formula()
        self._duality()
        self._darboux()
        self._quadratic_split()
        self._period_two()
        self._cmv()
        self._pushforward_duality()

    def _tol(self, value):
        return value * self.scale

    def _covering(self):
        data = BranchingData.from_dict({"d": 2, "points": [[-1.0, 0.0], [1.0, 0.0]], "sigmas": [[2, 1], [2, 1]]})
        result = validate(data)
        self.check_true("identities.covering.sphere", result["genus"] == 0 and result["infinity_orbits"] == [1, 1], result)

    def _resolvent_identity(self):
        probes = [complex(re, im) for re in (-2.0, -0.5, 0.5, 2.0, 0.0) for im in (0.3, 1.5)]
        worst, inputs = 0.0, 0
        for tau in (1.5, 2.0, 5.0):
            cov = RationalCovering.normalized(tau)
            for _ in range(self.parameters.get("resolvent_samples", RESOLVENT_SAMPLES_PER_TAU)):
                n = int(self.rng.integers(2, 13))
                coeffs = JacobiCoeffs(self.rng.uniform(0.1, 1.0, n - 1), self.rng.uniform(-1.0, 1.0, n))
                a = coeffs.window(0, n, HALF_LINE)
                worst = max(worst, max(resolvent_identity_residual(a, cov, z) for z in probes))
                inputs += 1
        self.finding("identities.resolvent_identity.inputs", inputs)
        self.check_max("identities.resolvent_identity", worst, self._tol(1e-11))

    def _magic_formula(self, n=300):
        free = JacobiCoeffs.constant(1.0)
        for coeffs in ((1.0, 0.0, -3.0), (1.0, 0.0, -6.0, 0.0)):
            T = ExpandingPolynomial(coeffs, 2.0)
            d = T.degree
            J = renormalized_coeffs(free, T, SignVector.minus(d)).window(0, d * (n // d), WHOLE_LINE)
            image = band_polynomial(list(reversed(T.coeffs)), J)
            expected = BandedWindow.from_diagonals(J.n, {d: 1.0, -d: 1.0}, J.offset, WHOLE_LINE)
            residual = max_abs_difference(image, expected, _interior(J.n))
            self.check_max(f"identities.magic_formula.d{d}", residual, self._tol(1e-9))

    def _duality(self):
        T = ExpandingPolynomial((1.0, 0.0, -10.0), 1.0)
        worst = 0.0
        for jt, _ in random_periodic_pairs(self.rng, self.samples):
            worst = max(worst, dual_delta_check(jt, T, SignVector.minus(2)))
        self.check_max("identities.duality.d2", worst, self._tol(1e-8))

    def _darboux(self, n=300, rho=3.0):
        J = JacobiCoeffs.constant(0.5).window(0, n, WHOLE_LINE)
        out, phi = darboux(J, rho, return_factor=True)
        drift = float(np.max(np.abs(eigenvalues(out) - eigenvalues(J))))
        self.check_max("identities.darboux.isospectral", drift, self._tol(1e-10))
        self.check_max("identities.darboux.factor_lower", float(np.max(np.abs(phi.diagonal(-1)))), 0.0)

    def _quadratic_split(self, rho=3.0, blocks=150):
        # J built from J̃/ρ with T/ρ = z² − (ρ−1)/ρ satisfies Φ*Φ = (J̃ − T(0))/ρ, T(0) = 1 − ρ
        (jt, _), = random_periodic_pairs(self.rng, 1)
        scaled = JacobiCoeffs.periodic(jt.p / rho, jt.q / rho)
        T = ExpandingPolynomial((1.0, 0.0, -(rho - 1.0) / rho), 1.0 / rho)
        J = renormalized_coeffs(scaled, T, SignVector.minus(2)).window(0, 2 * blocks, WHOLE_LINE)
        split = quadratic_split(J)
        self.check_max("identities.quadratic_split.residual", split["residual"], 1e-13)
        phi = split["Phi"]
        gram = band_mul(band_adjoint(phi), phi)
        expected = band_scale(jt.window(0, blocks, WHOLE_LINE), 1.0 / rho, (rho - 1.0) / rho)
        residual = max_abs_difference(gram, expected, _interior(blocks))
        self.check_max("identities.quadratic_split.gram", residual, self._tol(1e-10))

    def _period_two(self, n=400):
        xi1, lam = 1.0, 2.0
        coeffs = period_two_polynomial(xi1, lam, 0.6)
        J = coeffs.window(0, n, WHOLE_LINE)
        square = band_scale(band_mul(J, J), 1.0, -lam)
        expected = BandedWindow.from_diagonals(n, {2: xi1 / 2, -2: xi1 / 2}, 0, WHOLE_LINE)
        self.check_max("identities.period_two.polynomial", max_abs_difference(square, expected, _interior(n)), self._tol(1e-12))

        cov = RationalCovering.normalized(2.0)
        xi2 = 1.0
        V = period_two_rational(xi2, cov, 0.1, n)
        lhs = band_scale(band_mul(V, V), cov.tau, -cov.c)
        shifts = BandedWindow.from_diagonals(n, {2: xi2 / 2, -2: xi2 / 2}, 0, WHOLE_LINE)
        rhs = band_mul(shifts, V)
        self.check_max("identities.period_two.rational_symbol", max_abs_difference(lhs, rhs, _interior(n)), self._tol(1e-12))
        spectrum = floquet_spectrum(V, 2)
        excess = float(np.max(np.abs(cov(spectrum)) - xi2))
        self.check_max("identities.period_two.rational_spectrum", max(excess, 0.0), self._tol(1e-8))

    def _cmv(self, n=64):
        radius = self.rng.uniform(0.0, 0.9, n)
        phase = self.rng.uniform(0.0, 2 * np.pi, n)
        seq = VerblunskySeq(radius * np.exp(1j * phase))
        cmv = build_cmv(seq)
        self.check_max("identities.cmv.unitary", cmv.unitary_defect, self._tol(1e-13))
        residuals = five_diagonal_check(cmv, seq)
        worst = max(residuals["diag"], residuals["first"], residuals["second"])
        self.check_max("identities.cmv.five_diagonal", worst, self._tol(1e-12))

    def _pushforward_duality(self, K=12):
        cov = RationalCovering.normalized(2.0)
        weights = self.rng.uniform(0.1, 1.0, 6)
        nu = DiscreteMeasure(self.rng.uniform(-1.0, 1.0, 6), weights / weights.sum())
        direct = measure_moments(pushforward(nu, cov), K).values
        via_moments = moment_pushforward(measure_moments(nu, K), cov).values
        residual = float(np.max(np.abs(direct - via_moments) / np.maximum(1.0, np.abs(direct))))
        self.check_max("identities.pushforward_duality", residual, self._tol(1e-12))
        fixed = pushforward(DiscreteMeasure.dirac(cov.fixed_point), cov)
        self.check_true("identities.pushforward_fixed_point", bool(np.any(np.isclose(fixed.support, cov.fixed_point, atol=1e-14))))
