import numpy as np

from banded.window import WHOLE_LINE, BandedWindow
from renorm.polynomial import coeff_distance, dual_delta_check, enumerate_branches, iterate_polynomial_renorm
from renorm.rational import contraction_ratios
from renorm.residuals import completeness_scan, renorm_residuals
from renorm.lipschitz import random_periodic_pairs
from transfer.measures import invariant_moments
from .base_runner import BaseRunner

PERTURBATION_PROBE = 3.1 + 0.5j


class PolynomialRenormRunner(BaseRunner):
    """
    Builds every δ-branch J(J̃, δ) of the polynomial renormalization and checks the
    renormalization equation, branch distinctness, δ-duality and the sensitivity of the
    residuals to a perturbed candidate. Optionally runs the d = 2 completeness scan and the
    iteration J_{n+1} = J(J_n, δ) with half-line moment trajectories.
    """

    kind = "renorm_poly"

    def run(self):
        T = self._polynomial([1.0, 0.0, -10.0])
        self.finding("renorm_poly.expanding_margin", T.check_regime())
        jt = self._jacobi(*self._random_period_two())
        delta = self._delta(T)
        d = T.degree
        n = self.parameters.get("window", 400)
        blocks = n // d
        probes = [complex(re, im) for re, im in self.parameters.get("z_probes", [[0.0, 3.0]])]
        tol = self.parameters.get("residual_tol", 1e-8)

        results = enumerate_branches(jt, T, (0, blocks))
        rows = []
        for result in results:
            label = result.delta.label()
            if not result.is_valid:
                self.finding(f"renorm_poly.branch[{label}].invalid", str(result.error))
                continue
            for z in probes:
                residuals = renorm_residuals(result.window, jt, T, z)
                for name, value in sorted(residuals.items()):
                    self.check_max(f"renorm_poly.branch[{label}].{name}@{z}", value, tol)
                rows.append([label, z.real, z.imag, residuals["eq_t01"], residuals["eq_re1"], residuals["eq_re2"]])
        self.add_artifact("branch_residuals", ["delta", "z_re", "z_im", "eq_t01", "eq_re1", "eq_re2"], rows)

        valid = [r for r in results if r.is_valid]
        self.check_true("renorm_poly.branch_count", len(results) == 2 ** (d - 1), len(results))
        if len(valid) > 1:
            distance = min(
                coeff_distance(a.coeffs, b.coeffs) for i, a in enumerate(valid) for b in valid[i + 1:]
            )
            self.check_min("renorm_poly.min_branch_distance", distance, 1e-6)

        chosen = next((r for r in valid if r.delta == delta), None)
        if chosen is not None:
            self._perturbation_check(chosen.window, jt, T)
            self.check_max("renorm_poly.duality", dual_delta_check(jt, T, delta, n), tol)

        if self.parameters.get("scan", False) and d == 2:
            self._scan(T)
        steps = self.parameters.get("iterate_steps", 0)
        if steps:
            self._iterate(jt, T, delta, steps)

    def _random_period_two(self):
        (first, _), = random_periodic_pairs(self.rng, 1)
        return list(first.p), list(first.q)

    def _perturbation_check(self, window, jt, T):
        entries = np.array(window.entries)
        w = window.bandwidth
        row = window.n // 2
        entries[row, w + 1] += self.parameters.get("perturbation", 1e-3)
        entries[row + 1, w - 1] = entries[row, w + 1]
        perturbed = BandedWindow(entries, window.offset, WHOLE_LINE, window.exact_margin_top, window.exact_margin_bottom)
        residual = renorm_residuals(perturbed, jt, T, PERTURBATION_PROBE)["eq_t01"]
        self.check_min("renorm_poly.perturbation_detected", residual, 1e-4)

    def _scan(self, T):
        p_tilde = float(self.parameters.get("jt", {}).get("p", [0.5])[0])
        result = completeness_scan(p_tilde, T, grid=self.parameters.get("scan_grid", 21))
        self.finding("renorm_poly.scan.solutions", result["solutions"])
        self.finding("renorm_poly.scan.branches", result["branches"])
        self.check_true("renorm_poly.scan.no_extra_solutions", not result["unmatched"], len(result["unmatched"]))
        self.check_true("renorm_poly.scan.branches_found", len(result["solutions"]) == len(result["branches"]), len(result["solutions"]))

    def _iterate(self, jt, T, delta, steps):
        K = self.parameters.get("moments_K", 6)
        _, history = iterate_polynomial_renorm(jt, T, delta, steps, K)
        header = ["step", "side"] + [f"m{k}" for k in range(K + 1)]
        rows = []
        for entry in history:
            rows.append([entry["step"], "plus"] + [float(v) for v in entry["plus"].values])
            rows.append([entry["step"], "minus"] + [float(v) for v in entry["minus"].values])
        self.add_artifact("half_line_moments", header, rows)
        if all(s < 0 for s in delta):
            target = invariant_moments(T, K)
            errors = [float(np.max(np.abs(entry["plus"].values - target.values))) for entry in history]
            self.finding("renorm_poly.iterate.plus_vs_balanced", errors[-1])
            ratios = contraction_ratios(errors, floor=1e-13)
            if ratios:
                self.finding("renorm_poly.iterate.observed_rate", float(np.median(ratios)))
            # asserted only when iterate_tol is set
            if "iterate_tol" in self.parameters:
                self.check_max("renorm_poly.iterate.converged", errors[-1], self.parameters["iterate_tol"])
        self.finding("renorm_poly.iterate.final_period", history[-1]["period"])
