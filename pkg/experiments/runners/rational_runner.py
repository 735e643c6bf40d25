import numpy as np

from banded.operations import cholesky_upper, band_mul, band_scale
from banded.window import HALF_LINE, BandedWindow, JacobiCoeffs
from covering.maps import RationalCovering
from renorm.rational import contraction_ratios, iterate_renorm, lambda_sequence, window_moments
from transfer.measures import invariant_moments
from .base_runner import BaseRunner

MIN_GEOMETRIC_STEPS = 3


class RationalRenormRunner(BaseRunner):
    """
    Iterates the rational renormalization A ↦ π*(A) and follows the spectral moments at |0⟩.

    Checks the moment trajectory against the invariant moments of the transfer operator, the
    geometric contraction rate 1/(2τ²) and the λ-recursion against the band Cholesky factor.
    """

    kind = "renorm_iterate"

    def run(self):
        tau = self.parameters.get("tau", 2.0)
        cov = self.from_config(RationalCovering, tau, self.parameters.get("c", tau - 1.0))
        steps = self.parameters.get("steps", 60)
        window = self.parameters.get("window", 256)
        K = self.parameters.get("K", 8)
        target_tol = self.parameters.get("target_tol", 1e-8)
        ratio_tol = self.parameters.get("ratio_tol", 0.05)

        a0 = self._initial_window(window)
        snapshots = iterate_renorm(a0, cov, steps, window)
        target = invariant_moments(cov, K)
        trajectory = [window_moments(a, K) for a in snapshots]
        self.add_artifact(
            "moment_trajectory",
            ["step"] + [f"m{k}" for k in range(K + 1)],
            [[step] + [float(v) for v in m.values] for step, m in enumerate(trajectory)],
        )

        final = trajectory[-1]
        self.finding("renorm_iterate.m2_target", float(target[2]))
        self.check_max("renorm_iterate.m2_error", abs(final[2] - target[2]), target_tol)
        self.check_max("renorm_iterate.m1_abs", abs(final[1]), 1e-14)
        self.check_max("renorm_iterate.moments_error", float(np.max(np.abs(final.values - target.values))), 1e2 * target_tol)
        self.check_true("renorm_iterate.hankel_psd", all(m.is_hankel_psd() for m in trajectory))

        errors = [abs(m[2] - target[2]) for m in trajectory]
        ratios = contraction_ratios(errors, floor=self.parameters.get("ratio_floor", 1e-9))
        self.finding("renorm_iterate.m2_plateau", errors[-1])
        self.check_min("renorm_iterate.geometric_steps", len(ratios), MIN_GEOMETRIC_STEPS)
        # the degree-2 moment map is affine with slope 1/(2τ²) for every c
        expected_ratio = 1.0 / (2.0 * cov.tau ** 2)
        observed = float(np.median(ratios)) if ratios else float("nan")
        self.finding("renorm_iterate.expected_ratio", expected_ratio)
        self.check_max("renorm_iterate.ratio_deviation", abs(observed - expected_ratio), ratio_tol)

        self._lambda_check(cov)

    def _initial_window(self, window):
        p = self.parameters.get("a0_p")
        if p is None:
            return BandedWindow.zeros(window, 1, 0, HALF_LINE)
        coeffs = self.from_config(JacobiCoeffs, np.asarray(p, dtype=float), np.zeros(len(p) + 1))
        return coeffs.window(0, len(p) + 1, HALF_LINE)

    def _lambda_check(self, cov, n=200):
        # zero-diagonal p ≡ 1 against the Cholesky factor of J² + 4τc
        p = np.ones(n - 1)
        lam = lambda_sequence(p, cov)
        jacobi = JacobiCoeffs(p, np.zeros(n)).window(0, n, HALF_LINE)
        factor = cholesky_upper(band_scale(band_mul(jacobi, jacobi), 1.0, cov.shift))
        self.check_max("renorm_iterate.lambda_vs_cholesky", float(np.max(np.abs(lam - factor.diagonal(0)))), 1e-12)
        self.finding("renorm_iterate.lambda_head", [float(v) for v in lam[:3]])
