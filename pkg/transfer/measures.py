import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh

from banded.exceptions import InvalidInputError, NonRealBranchError
from covering.maps import REAL_ROOT_TOL, fiber_power_sums

MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure on the real line."""
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=np.float64, copy=True).ravel()
        weights = np.array(self.weights, dtype=np.float64, copy=True).ravel()
        if support.shape != weights.shape:
            raise InvalidInputError("Support and weights must have the same length.")
        if np.any(weights < 0):
            raise InvalidInputError("Measure weights must be non-negative.")
        if weights.size and abs(math.fsum(weights) - 1.0) > MASS_TOL:
            raise InvalidInputError(f"Measure weights sum to {math.fsum(weights)!r}, expected 1.")
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def dirac(cls, x):
        return cls([x], [1.0])

    @property
    def size(self):
        return self.support.size

    def sorted(self):
        """Same measure with atoms in ascending order; ties keep their input order."""
        order = np.argsort(self.support, kind="stable")
        return DiscreteMeasure(self.support[order], self.weights[order])

    def integrate(self, f):
        return math.fsum(self.weights * f(self.support))


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Moments m_0..m_K of a measure."""
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if values.size == 0 or abs(values[0] - 1.0) > MASS_TOL:
            raise InvalidInputError("A moment vector starts with m_0 = 1.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def K(self):
        return self.values.size - 1

    def __getitem__(self, k):
        return self.values[k]

    def hankel(self):
        """Largest Hankel matrix [m_{i+j}] the moments determine."""
        size = self.K // 2 + 1
        idx = np.add.outer(np.arange(size), np.arange(size))
        return self.values[idx]

    def hankel_min_eigenvalue(self):
        return float(eigvalsh(self.hankel())[0])

    def is_hankel_psd(self, tol=1e-10):
        """Positive semidefinite Hankel matrix, up to `tol` relative to its largest entry."""
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return self.hankel_min_eigenvalue() >= -tol * scale


def measure_moments(measure, K):
    """m_k = Σ w x^k with compensated summation."""
    values = [math.fsum(measure.weights * measure.support ** k) for k in range(K + 1)]
    values[0] = 1.0
    return MomentVector(values)


def _real_fiber(roots, x):
    scale = max(1.0, float(np.max(np.abs(roots))))
    if np.any(np.abs(np.imag(roots)) > REAL_ROOT_TOL * scale):
        raise NonRealBranchError(f"Preimages of {x!r} are not real.")
    return np.real(roots)


def preimages(cov, x):
    """All preimages of x under the covering, with multiplicity."""
    return cov.preimages(x)


def pushforward(nu, cov):
    """
    𝓛*ν: every atom splits into its d preimages, each with a d-th of its weight.

    Atoms are emitted atom by atom in the order of their preimages, so the output order is a
    deterministic function of the input.
    """
    d = cov.degree
    support = []
    for x in nu.support:
        support.append(_real_fiber(np.atleast_1d(cov.preimages(x)), x))
    support = np.concatenate(support) if support else np.zeros(0)
    weights = np.repeat(nu.weights / d, d)
    if weights.size:
        weights = weights / math.fsum(weights)
    return DiscreteMeasure(support, weights)


def moment_coefficients(cov, K):
    """Matrix M with m(𝓛*ν) = M m(ν): M[k, j] = coefficient of x^j in s_k(x) / d."""
    sums = fiber_power_sums(cov, K)
    matrix = np.zeros((K + 1, K + 1))
    for k, s in enumerate(sums):
        coef = s.coef
        matrix[k, : coef.size] = coef / cov.degree
    return matrix


def invariant_moments(cov, K):
    """
    Moments of the eigen-measure 𝓛*μ = μ.

    Row k of the pushforward matrix is triangular; its self-coefficient is below one in the
    expanding regime, so m_k follows from the lower moments degree by degree.
    """
    matrix = moment_coefficients(cov, K)
    values = np.zeros(K + 1)
    values[0] = 1.0
    for k in range(1, K + 1):
        self_coefficient = matrix[k, k]
        if abs(1.0 - self_coefficient) < 1e-14:
            raise InvalidInputError(f"Degree-{k} moment equation is degenerate.")
        values[k] = math.fsum(matrix[k, :k] * values[:k]) / (1.0 - self_coefficient)
    logging.debug(f"[transfer_measures] Invariant moments up to K={K}: m_2={values[min(2, K)]!r}")
    return MomentVector(values)
