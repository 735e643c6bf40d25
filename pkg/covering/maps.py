import itertools
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial

from banded.exceptions import InvalidInputError

# relative tolerance for deciding that a computed root is real
REAL_ROOT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RationalCovering:
    """Double covering π(v) = τv − c/v; the normalized case c = τ − 1 fixes v = 1."""
    tau: float
    c: float

    def __post_init__(self):
        if not (np.isfinite(self.tau) and np.isfinite(self.c)) or self.tau <= 1 or self.c <= 0:
            raise InvalidInputError(f"Rational covering needs tau > 1 and c > 0, got tau={self.tau}, c={self.c}.")
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "c", float(self.c))

    @classmethod
    def normalized(cls, tau):
        return cls(tau, tau - 1.0)

    @property
    def degree(self):
        return 2

    @property
    def shift(self):
        """The constant 4τc of the factorization A² + 4τc = Φ*Φ."""
        return 4.0 * self.tau * self.c

    @property
    def fixed_point(self):
        """Positive fixed point of π."""
        return float(np.sqrt(self.c / (self.tau - 1.0)))

    def __call__(self, v):
        v = np.asarray(v)
        return self.tau * v - self.c / v

    def preimages(self, x):
        """Both roots of τv² − xv − c = 0, smaller real part first."""
        x = np.asarray(x)
        disc = np.sqrt(x * x + self.shift) if np.isrealobj(x) else np.sqrt(x * x + self.shift + 0j)
        return np.stack([(x - disc) / (2 * self.tau), (x + disc) / (2 * self.tau)], axis=-1)

    def fiber_coefficients(self):
        """Coefficients (ascending in v) of the fibre equation τv² − xv − c as polynomials in x."""
        return [Polynomial([-self.c]), Polynomial([0.0, -1.0]), Polynomial([self.tau])]

    def to_dict(self):
        return {"type": "rational", "tau": self.tau, "c": self.c}


@dataclass(frozen=True, eq=False)
class ExpandingPolynomial:
    """
    Monic real polynomial T(z) = z^d + a_{d-1} z^{d-1} + ... + a_0 acting as a degree-d covering.

    `coeffs` are given highest degree first. `xi` is the spectral radius of the reference interval
    [-ξ, ξ]; the expanding regime asks for |T(c)| > ξ at every critical point. A violation is logged
    and reported through `expanding_margin`, it does not stop the run.
    """
    coeffs: tuple
    xi: float = 1.0

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) < 2:
            raise InvalidInputError("Polynomial covering needs degree >= 1.")
        if coeffs[0] != 1.0:
            raise InvalidInputError(f"Polynomial must be monic, leading coefficient is {coeffs[0]}.")
        if not np.all(np.isfinite(coeffs)) or not np.isfinite(self.xi) or self.xi <= 0:
            raise InvalidInputError("Polynomial coefficients and xi must be finite, xi > 0.")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "xi", float(self.xi))

    @classmethod
    def from_ascending(cls, coeffs, xi=1.0):
        return cls(tuple(reversed(list(coeffs))), xi)

    @cached_property
    def poly(self):
        return Polynomial(list(reversed(self.coeffs)))

    @cached_property
    def derivative(self):
        return self.poly.deriv()

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def q(self):
        """Mean of the roots, −a_{d−1}/d."""
        return -self.coeffs[1] / self.degree

    @cached_property
    def critical_points(self):
        if self.degree < 2:
            return np.zeros(0)
        roots = self.derivative.roots()
        scale = max(1.0, float(np.max(np.abs(roots))))
        if np.any(np.abs(np.imag(roots)) > REAL_ROOT_TOL * scale):
            raise InvalidInputError("Critical points are not all real; the polynomial is not expanding.")
        return np.sort(np.real(roots))

    @cached_property
    def critical_values(self):
        return self.poly(self.critical_points)

    @property
    def expanding_margin(self):
        """min |T(c)| − ξ; positive in the expanding regime."""
        if self.degree < 2:
            return float("inf")
        return float(np.min(np.abs(self.critical_values)) - self.xi)

    @property
    def is_expanding(self):
        return self.expanding_margin > 0

    def check_regime(self):
        margin = self.expanding_margin
        if margin <= 0:
            logging.warning(f"[covering_maps] Polynomial {self.coeffs} is not expanding for xi={self.xi} (margin {margin:.3g}).")
        return margin

    def __call__(self, z):
        return self.poly(z)

    def preimages(self, x):
        """All d roots of T(y) = x with multiplicity, sorted by real part."""
        shifted = list(self.coeffs)
        shifted[-1] -= x
        roots = np.roots(np.asarray(shifted, dtype=np.result_type(x, float)))
        return roots[np.argsort(np.real(roots), kind="stable")]

    def fiber_coefficients(self):
        """Coefficients (ascending in y) of T(y) − x as polynomials in x."""
        ascending = list(reversed(self.coeffs))
        fiber = [Polynomial([a]) for a in ascending]
        fiber[0] = Polynomial([ascending[0], -1.0])
        return fiber

    def julia_interval(self):
        """β such that T⁻¹([−β, β]) ⊂ [−β, β]: the largest |root| of T(x) = ±x."""
        candidates = []
        for sign in (1.0, -1.0):
            fixed = self.poly - Polynomial([0.0, sign])
            roots = fixed.roots()
            real = np.real(roots[np.abs(np.imag(roots)) <= REAL_ROOT_TOL * max(1.0, np.max(np.abs(roots)))])
            candidates.extend(np.abs(real))
        return float(max(candidates)) if candidates else float(self.xi)

    def to_dict(self):
        return {"type": "polynomial", "T_coeffs": list(self.coeffs), "xi": self.xi}


@dataclass(frozen=True)
class SignVector:
    """One sign δ_c = ±1 per critical point, in ascending order of the critical points."""
    delta: tuple

    def __post_init__(self):
        delta = tuple(int(s) for s in self.delta)
        if any(s not in (-1, 1) for s in delta):
            raise InvalidInputError(f"Sign vector entries must be ±1, got {self.delta}.")
        object.__setattr__(self, "delta", delta)

    @classmethod
    def minus(cls, d):
        return cls((-1,) * (d - 1))

    @classmethod
    def all_for(cls, d):
        return [cls(signs) for signs in itertools.product((-1, 1), repeat=d - 1)]

    def negated(self):
        return SignVector(tuple(-s for s in self.delta))

    def check_length(self, polynomial):
        if len(self.delta) != polynomial.degree - 1:
            raise InvalidInputError(
                f"Sign vector has {len(self.delta)} entries, polynomial of degree {polynomial.degree} needs {polynomial.degree - 1}."
            )

    def __len__(self):
        return len(self.delta)

    def __iter__(self):
        return iter(self.delta)

    def label(self):
        return "".join("+" if s > 0 else "-" for s in self.delta) or "()"


def fiber_power_sums(cov, K):
    """
    Power sums s_k(x) = Σ_{cov(y)=x} y^k, k = 0..K, as polynomials in x.

    Newton's identities on the fibre equation with coefficients linear in x; the leading
    coefficient is constant for both covering families.
    """
    fiber = cov.fiber_coefficients()
    d = len(fiber) - 1
    lead = fiber[-1].coef[0]
    monic = [f / lead for f in fiber]
    sums = [Polynomial([float(d)])]
    for k in range(1, K + 1):
        total = Polynomial([0.0])
        for i in range(1, min(k - 1, d) + 1):
            total = total + monic[d - i] * sums[k - i]
        if k <= d:
            total = total + k * monic[d - k]
        sums.append(-total)
    return sums


def covering_from_dict(doc):
    """Build a covering map from its config document."""
    kind = doc.get("type", "rational")
    if kind == "rational":
        tau = float(doc.get("tau", 2.0))
        return RationalCovering(tau, float(doc.get("c", tau - 1.0)))
    elif kind == "polynomial":
        return ExpandingPolynomial(tuple(doc["T_coeffs"]), float(doc.get("xi", 1.0)))
    else:
        raise InvalidInputError(f"Unknown covering type '{kind}'.")
