import logging
from concurrent.futures import ThreadPoolExecutor

from scipy.linalg import svdvals

from banded.exceptions import BranchInvalidError
from banded.operations import band_add, interior_rows
from banded.window import WHOLE_LINE, JacobiCoeffs
from .polynomial import renormalized_coeffs


def interior_norm(a, rows):
    """Largest singular value of the principal block of `a` on the local slice `rows`."""
    dense = a.to_dense()[rows, rows]
    if dense.size == 0:
        return 0.0
    return float(svdvals(dense)[0])


def empirical_lipschitz(T, pairs, delta, blocks=200, margin=10, max_workers=None):
    """
    Ratios ‖J(δ, J̃₁) − J(δ, J̃₂)‖ / ‖J̃₁ − J̃₂‖ for periodic pairs.

    Norms are operator norms of the principal block of the difference away from the window
    edges; the renormalized windows cover the same `blocks` sites of the reduced operators.

    Returns:
        dict: `max_ratio` and `per_pair`, plus `invalid` for pairs where a branch failed.
    """
    d = T.degree

    def ratio(pair):
        first, second = pair
        denominator = interior_norm(
            band_add(first.window(0, blocks, WHOLE_LINE), second.window(0, blocks, WHOLE_LINE), 1.0, -1.0),
            interior_rows(first.window(0, blocks, WHOLE_LINE), margin),
        )
        if denominator == 0:
            return 0.0
        try:
            left = renormalized_coeffs(first, T, delta).window(0, d * blocks, WHOLE_LINE)
            right = renormalized_coeffs(second, T, delta).window(0, d * blocks, WHOLE_LINE)
        except BranchInvalidError as e:
            logging.warning(f"[renorm_lipschitz] Pair skipped: {e}")
            return None
        numerator = interior_norm(band_add(left, right, 1.0, -1.0), interior_rows(left, d * margin))
        return numerator / denominator

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        ratios = list(executor.map(ratio, pairs))

    valid = [r for r in ratios if r is not None]
    max_ratio = float(max(valid, default=0.0))
    logging.info(f"[renorm_lipschitz][{delta.label()}] {len(valid)} pairs, max ratio {max_ratio:.4g}")
    return {"max_ratio": max_ratio, "per_pair": ratios, "invalid": len(ratios) - len(valid)}


def random_periodic_pairs(rng, count, period=2, p_range=(0.1, 0.4), q_bound=0.2):
    """Independent pairs of random periodic Jacobi coefficients."""
    def draw():
        return JacobiCoeffs.periodic(rng.uniform(*p_range, size=period), rng.uniform(-q_bound, q_bound, size=period))

    return [(draw(), draw()) for _ in range(count)]
