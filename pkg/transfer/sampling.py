import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from banded.exceptions import InvalidInputError, NonRealBranchError
from covering.maps import REAL_ROOT_TOL, ExpandingPolynomial, RationalCovering

DEFAULT_SHARDS = 8
DEFAULT_BATCHES = 32


def seed_point(cov):
    """A point of the Julia set to start backward orbits from: the largest real fixed point."""
    if isinstance(cov, RationalCovering):
        return cov.fixed_point
    coeffs = list(cov.coeffs)
    coeffs[-2] -= 1.0
    roots = np.roots(coeffs)
    real = np.real(roots[np.abs(np.imag(roots)) <= REAL_ROOT_TOL * max(1.0, float(np.max(np.abs(roots))))])
    if real.size == 0:
        raise NonRealBranchError("The polynomial has no real fixed point.")
    return float(np.max(real))


def polynomial_preimages(T, x):
    """
    Real preimages of every point of `x` as an (N, d) array, ascending along each row.

    The roots of T(y) − x_i come from the eigenvalues of a batch of companion matrices.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    d = T.degree
    ascending = np.array(list(reversed(T.coeffs)))
    companion = np.zeros((x.size, d, d))
    if d > 1:
        companion[:, 1:, :-1] = np.eye(d - 1)
    companion[:, :, -1] = -ascending[:-1]
    companion[:, 0, -1] += x
    roots = np.linalg.eigvals(companion)
    scale = np.maximum(1.0, np.max(np.abs(roots), axis=1))
    bad = np.max(np.abs(np.imag(roots)), axis=1) > 1e3 * REAL_ROOT_TOL * scale
    if np.any(bad):
        raise NonRealBranchError(f"Preimages of x={float(x[np.argmax(bad)])!r} are not real.")
    return np.sort(np.real(roots), axis=1)


def _all_preimages(cov, x):
    if isinstance(cov, RationalCovering):
        return cov.preimages(x)
    if isinstance(cov, ExpandingPolynomial):
        return polynomial_preimages(cov, x)
    raise InvalidInputError(f"Unsupported covering {type(cov).__name__}.")


def _orbit_shard(cov, n_steps, n_samples, rng, weight=None):
    x = np.full(n_samples, seed_point(cov))
    log_weight = np.zeros(n_samples)
    rows = np.arange(n_samples)
    d = cov.degree
    for _ in range(n_steps):
        branches = rng.integers(0, d, size=n_samples)
        x = _all_preimages(cov, x)[rows, branches]
        if weight is not None:
            log_weight += np.log(d) - 2.0 * np.log(np.abs(weight(x)))
    return x, log_weight


def _sharded(cov, n_steps, n_samples, seed, weight, shards, max_workers):
    if n_steps < 1 or n_samples < 1:
        raise InvalidInputError("Sampling needs n_steps >= 1 and n_samples >= 1.")
    shards = max(1, min(shards, n_samples))
    sizes = np.full(shards, n_samples // shards)
    sizes[: n_samples % shards] += 1
    streams = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(shards)]

    def run(job):
        size, rng = job
        return _orbit_shard(cov, n_steps, int(size), rng, weight)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        parts = list(executor.map(run, zip(sizes, streams)))
    samples = np.concatenate([p[0] for p in parts])
    log_weights = np.concatenate([p[1] for p in parts])
    return samples, log_weights


def backward_orbit_sample(cov, n_steps, n_samples, seed, shards=DEFAULT_SHARDS, max_workers=None):
    """
    Samples of the balanced measure from uniformly random inverse branches.

    Every sample starts at the seed point and takes `n_steps` preimage steps. Shards run on a
    thread pool, each with its own stream spawned from `seed`, and are concatenated in shard
    order, so the output depends on `seed` and `shards` only.
    """
    start_time = time.time()
    samples, _ = _sharded(cov, n_steps, n_samples, seed, None, shards, max_workers)
    elapsed_time = time.time() - start_time
    logging.info(f"[transfer_sampling] Drew {n_samples} backward-orbit samples ({n_steps} steps) in {elapsed_time:.2f} seconds.")
    return samples


def weighted_orbit_sample(T, weight, n_steps, n_samples, seed, shards=DEFAULT_SHARDS, max_workers=None):
    """
    Importance-weighted backward orbits for the eigen-measure of (𝓛_A f)(x) = Σ_{T(y)=x} f(y)/A(y)².

    Branches are chosen uniformly; a path carries the weight Π d/A(y)² over its visited points.

    Args:
        weight: callable A evaluated on arrays (a numpy Polynomial works).

    Returns:
        tuple: (samples, normalized weights).
    """
    start_time = time.time()
    samples, log_weights = _sharded(T, n_steps, n_samples, seed, weight, shards, max_workers)
    weights = np.exp(log_weights - np.max(log_weights))
    weights = weights / np.sum(weights)
    effective = 1.0 / float(np.sum(weights ** 2))
    elapsed_time = time.time() - start_time
    logging.info(
        f"[transfer_sampling] Drew {n_samples} weighted samples (effective size {effective:.0f}) in {elapsed_time:.2f} seconds."
    )
    return samples, weights


def sample_histogram(samples, bins=64, lo=-1.0, hi=1.0, weights=None):
    """Normalized histogram on [lo, hi]: (bin edges, probability per bin)."""
    counts, edges = np.histogram(samples, bins=bins, range=(lo, hi), weights=weights)
    total = float(np.sum(counts))
    probabilities = counts / total if total > 0 else counts.astype(np.float64)
    return edges, probabilities


def batch_estimate(values, weights=None, batches=DEFAULT_BATCHES):
    """
    Mean of `values` and its standard error from the spread of contiguous batch means.

    With `weights` every batch takes its self-normalized weighted mean. Samples of one orbit shard
    stay together, so the error also covers correlations inside a shard.

    Returns:
        tuple: (estimate, standard error).
    """
    values = np.asarray(values, dtype=np.float64)
    weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=np.float64)
    if values.shape != weights.shape or values.ndim != 1:
        raise InvalidInputError("Values and weights must be matching 1-d arrays.")
    batches = min(batches, values.size)
    if batches < 2:
        raise InvalidInputError("Batch estimates need at least two samples.")
    means = []
    for chunk, mass in zip(np.array_split(values, batches), np.array_split(weights, batches)):
        total = float(np.sum(mass))
        if total <= 0:
            raise InvalidInputError("Every batch needs positive total weight.")
        means.append(float(np.sum(mass * chunk)) / total)
    estimate = float(np.sum(weights * values) / np.sum(weights))
    return estimate, float(np.std(means, ddof=1)) / math.sqrt(batches)
