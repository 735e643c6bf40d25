import numpy as np

from covering.maps import ExpandingPolynomial, RationalCovering, covering_from_dict
from renorm.lipschitz import random_periodic_pairs
from renorm.polynomial import iterate_polynomial_renorm
from transfer.measures import DiscreteMeasure, invariant_moments, measure_moments, pushforward
from transfer.ruelle import DEFAULT_TV_TOL, preimage_measure, weighted_ruelle_eigen
from transfer.sampling import backward_orbit_sample, batch_estimate, sample_histogram, weighted_orbit_sample
from .base_runner import BaseRunner

SUPPORT_TOL = 1e-12
PUSHFORWARD_LEVELS = 10
SIGMA_BOUND = 4.0
IMPORTANCE_TOL = 1e-2


def _max_moment_error(first, second):
    return float(np.max(np.abs(first.values - second.values)))


class MeasureRunner(BaseRunner):
    """
    Invariant measures of a covering map.

    Samples the balanced measure by random backward orbits and checks the sample moments and the
    support against the exact invariant moments and the first-level set E₁. For polynomial
    coverings it also computes the weighted Ruelle eigen-measures (balanced and Bowen–Ruelle),
    cross-checks them against the exact moments and an importance-sampled oracle, and optionally
    runs the renormalization-versus-eigen-measure comparison.
    """

    kind = "measure"

    def run(self):
        cov = self.from_config(covering_from_dict, self.parameters.get("covering", {"type": "rational", "tau": 2.0}))
        K = self.parameters.get("K", 6)
        target = invariant_moments(cov, K)
        self.finding("measure.invariant_moments", [float(v) for v in target.values])

        self._sampling(cov, K, target)
        self._exact_measure(cov, K, target)
        if isinstance(cov, ExpandingPolynomial) and self.parameters.get("ruelle", True):
            eigen = self._ruelle(cov, K, target)
            steps = self.parameters.get("conjecture_steps", 0)
            if steps:
                self._conjecture(cov, K, steps, target)
            self.finding("measure.ruelle.rho_2", eigen["rho_2"])

    def _beta(self, cov):
        if isinstance(cov, RationalCovering):
            return cov.fixed_point
        return cov.julia_interval()

    def _sampling(self, cov, K, target):
        n_samples = self.parameters.get("n_samples", 10 ** 6)
        n_steps = self.parameters.get("n_steps", 40)
        samples = backward_orbit_sample(cov, n_steps, n_samples, int(self.rng.integers(2 ** 63)))

        rows = []
        for k in range(1, K + 1):
            mean, sigma = batch_estimate(samples ** k)
            bound = max(SIGMA_BOUND * sigma, 1e-12 * max(1.0, abs(target[k])))
            self.check_max(f"measure.sample_moment.m{k}", abs(mean - target[k]), bound)
            rows.append([k, mean, float(target[k]), sigma])
        self.add_artifact("sample_moments", ["k", "sample", "exact", "standard_error"], rows)

        beta = self._beta(cov)
        limit = beta * (1.0 + SUPPORT_TOL)
        outside = int(np.count_nonzero((np.abs(samples) > limit) | (np.abs(cov(samples)) > limit)))
        self.check_true("measure.samples_in_first_level", outside == 0, outside)

        edges, probabilities = sample_histogram(samples, self.parameters.get("bins", 64), -beta, beta)
        self.add_artifact(
            "histogram",
            ["lo", "hi", "probability"],
            [[float(lo), float(hi), float(p)] for lo, hi, p in zip(edges[:-1], edges[1:], probabilities)],
        )

    def _exact_measure(self, cov, K, target):
        measure = DiscreteMeasure.dirac(self._beta(cov) if isinstance(cov, RationalCovering) else 0.0)
        for _ in range(PUSHFORWARD_LEVELS):
            measure = pushforward(measure, cov)
        measure = measure.sorted()
        self.add_artifact("measure", ["support", "weight"], [[float(x), float(w)] for x, w in zip(measure.support, measure.weights)])
        self.finding("measure.pushforward_moment_error", _max_moment_error(measure_moments(measure, K), target))

    def _ruelle(self, T, K, target):
        depth = self.parameters.get("depth")
        tol = self.parameters.get("tv_tol", DEFAULT_TV_TOL)
        eigen = weighted_ruelle_eigen(T, [], depth, tol)
        self.check_max("measure.ruelle.rho_1_vs_degree", abs(eigen["rho_1"] - T.degree), 1e-9)
        balanced_error = _max_moment_error(measure_moments(eigen["sigma_1"], K), target)
        self.check_max("measure.ruelle.balanced_vs_invariant", balanced_error, 1e-3)

        # moments of x/β stay in [-1, 1] whatever the size of T
        beta = T.julia_interval()
        scale = beta ** np.arange(K + 1)
        bowen = measure_moments(eigen["sigma_2"], K).values / scale
        exact = measure_moments(preimage_measure(T, T.derivative, self.parameters.get("oracle_depth")), K).values / scale
        self.check_max("measure.ruelle.bowen_vs_enumeration", float(np.max(np.abs(bowen - exact))), self.parameters.get("oracle_tol", 1e-4))

        samples, weights = weighted_orbit_sample(
            T, T.derivative, self.parameters.get("n_steps", 40), self.parameters.get("n_samples", 10 ** 6) // 4,
            int(self.rng.integers(2 ** 63)),
        )
        worst, rows = 0.0, []
        for k in range(1, K + 1):
            estimate, sigma = batch_estimate((samples / beta) ** k, weights)
            deviation = abs(bowen[k] - estimate)
            worst = max(worst, deviation / max(IMPORTANCE_TOL, SIGMA_BOUND * sigma))
            rows.append([k, float(bowen[k]), float(exact[k]), estimate, sigma])
        self.add_artifact("bowen_ruelle_moments", ["k", "tree", "enumeration", "importance_sampled", "standard_error"], rows)
        # deviation in units of max(IMPORTANCE_TOL, SIGMA_BOUND·σ)
        self.check_max("measure.ruelle.bowen_vs_importance_sampling", worst, 1.0)

        bowen_measure = eigen["sigma_2"].sorted()
        self.add_artifact(
            "bowen_ruelle_measure", ["support", "weight"], [[float(x), float(w)] for x, w in zip(bowen_measure.support, bowen_measure.weights)]
        )
        return eigen

    def _conjecture(self, T, K, steps, target):
        if "jt" in self.parameters:
            jt = self._jacobi(None, None)
        else:
            (jt, _), = random_periodic_pairs(self.rng, 1)
        delta = self._delta(T)

        split = [c for c, sign in zip(T.critical_points, delta) if sign > 0]
        eigen = weighted_ruelle_eigen(T, split, self.parameters.get("depth"), self.parameters.get("tv_tol", DEFAULT_TV_TOL))
        sigma_1 = measure_moments(eigen["sigma_1"], K)
        sigma_2 = measure_moments(eigen["sigma_2"], K)
        _, history = iterate_polynomial_renorm(jt, T, delta, steps, K)

        rows = []
        for entry in history:
            rows.append([
                entry["step"],
                _max_moment_error(entry["plus"], sigma_1),
                _max_moment_error(entry["minus"], sigma_2),
                _max_moment_error(entry["plus"], sigma_2),
                _max_moment_error(entry["minus"], sigma_1),
            ])
        self.add_artifact("conjecture", ["step", "plus_sigma_1", "minus_sigma_2", "plus_sigma_2", "minus_sigma_1"], rows)
        label = delta.label()
        self.finding(f"measure.conjecture[{label}].plus_vs_sigma_1", rows[-1][1])
        self.finding(f"measure.conjecture[{label}].minus_vs_sigma_2", rows[-1][2])
        if all(sign < 0 for sign in delta):
            balanced_error = _max_moment_error(history[-1]["plus"], target)
            self.finding(f"measure.conjecture[{label}].plus_vs_balanced", balanced_error)
            if "conjecture_tol" in self.parameters:
                self.check_max(f"measure.conjecture[{label}].converged", balanced_error, self.parameters["conjecture_tol"])
