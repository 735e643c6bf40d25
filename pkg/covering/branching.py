import itertools
import logging
from dataclasses import dataclass

from sympy.combinatorics import Permutation, PermutationGroup

from banded.exceptions import InvalidInputError, UnsupportedError

MAX_EQUIVALENCE_DEGREE = 8


@dataclass(frozen=True, eq=False)
class BranchingData:
    """
    Branching divisor of a d-sheeted covering of the plane: finite branch points with the
    monodromy permutation of the sheets around each of them.

    Permutations are sympy `Permutation` objects on {0..d-1}; the JSON form uses 1-based
    image lists. The product convention is sympy's left-to-right composition, and the
    permutation at infinity is always derived so that σ₁·…·σ_N·σ_∞ = id.
    """
    degree: int
    branch_points: tuple
    sigmas: tuple

    def __post_init__(self):
        if int(self.degree) < 1:
            raise InvalidInputError("Covering degree must be at least 1.")
        if len(self.branch_points) != len(self.sigmas):
            raise InvalidInputError(
                f"Got {len(self.branch_points)} branch points but {len(self.sigmas)} permutations."
            )
        for i, sigma in enumerate(self.sigmas):
            if not isinstance(sigma, Permutation) or sigma.size != self.degree:
                raise InvalidInputError(f"Permutation {i} does not act on {self.degree} sheets.")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "branch_points", tuple(complex(z) for z in self.branch_points))
        object.__setattr__(self, "sigmas", tuple(self.sigmas))

    @classmethod
    def from_dict(cls, doc):
        """Parse {d, points: [[re, im], ...], sigmas: [[1-based images], ...]}."""
        try:
            d = int(doc["d"])
            points = [complex(p[0], p[1]) for p in doc.get("points", [])]
            sigmas = [parse_permutation(images, d) for images in doc.get("sigmas", [])]
        except (KeyError, TypeError, IndexError) as e:
            raise InvalidInputError(f"Malformed branching data: {e}") from e
        return cls(d, tuple(points), tuple(sigmas))

    def to_dict(self):
        return {
            "d": self.degree,
            "points": [[z.real, z.imag] for z in self.branch_points],
            "sigmas": [[image + 1 for image in sigma.array_form] for sigma in self.sigmas],
        }


def parse_permutation(images, d):
    """Permutation from a 1-based image list; anything but a bijection of {1..d} is rejected."""
    images = list(images)
    if len(images) != d or any(not isinstance(v, int) or isinstance(v, bool) for v in images):
        raise InvalidInputError(f"Malformed permutation {images}: expected {d} integer images.")
    if sorted(images) != list(range(1, d + 1)):
        raise InvalidInputError(f"Malformed permutation {images}: not a bijection of 1..{d}.")
    return Permutation([v - 1 for v in images])


def _identity(d):
    return Permutation(list(range(d)))


def sigma_infinity(b):
    """(σ₁·…·σ_N)⁻¹, so that the product relation holds by construction."""
    product = _identity(b.degree)
    for sigma in b.sigmas:
        product = product * sigma
    return ~product


def _cycle_count(sigma):
    return sigma.cycles


def validate(b):
    """
    Connectivity, infinity structure and genus of the covering surface.

    Returns:
        dict: `connected` (transitive monodromy), `infinity_orbits` (cycle lengths of σ_∞,
        descending) and `genus` from Riemann–Hurwitz over all branch points including ∞.
    """
    d = b.degree
    infinity = sigma_infinity(b)
    generators = list(b.sigmas) + [infinity]
    connected = PermutationGroup(generators).is_transitive()

    orbits = []
    for length, count in infinity.cycle_structure.items():
        orbits.extend([length] * count)
    orbits.sort(reverse=True)

    ramification = sum(d - _cycle_count(sigma) for sigma in generators)
    if ramification % 2:
        raise InvalidInputError("Total ramification is odd; permutations are inconsistent.")
    genus = 1 - d + ramification // 2

    logging.debug(f"[covering_branching] d={d} connected={connected} orbits={orbits} genus={genus}")
    return {"connected": bool(connected), "infinity_orbits": orbits, "genus": int(genus)}


def equivalent(b1, b2):
    """True iff one ρ ∈ Σ_d conjugates every σ_i of b1 into the matching σ_i of b2."""
    if b1.degree != b2.degree:
        raise InvalidInputError(f"Degree mismatch: {b1.degree} vs {b2.degree}.")
    if b1.branch_points != b2.branch_points:
        raise InvalidInputError("Equivalence is checked for identical branch points in identical order.")
    d = b1.degree
    if d > MAX_EQUIVALENCE_DEGREE:
        raise UnsupportedError(f"Brute-force equivalence is limited to d <= {MAX_EQUIVALENCE_DEGREE}.")
    for images in itertools.permutations(range(d)):
        rho = Permutation(list(images))
        if all((s1 ^ rho) == s2 for s1, s2 in zip(b1.sigmas, b2.sigmas)):
            return True
    return False
