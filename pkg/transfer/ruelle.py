import logging
import math
import time

import numpy as np
from numpy.polynomial import Polynomial
from scipy import sparse

from banded.exceptions import InvalidInputError, NonConvergenceError
from .measures import DiscreteMeasure
from .sampling import polynomial_preimages, seed_point

MAX_ITERATIONS = 10_000
DEFAULT_TV_TOL = 1e-3
MAX_CELLS = 2 ** 14
ORACLE_CELLS = 2 ** 16


def default_depth(T, max_cells=MAX_CELLS):
    """Deepest tree level with at most `max_cells` cells."""
    depth = 1
    while T.degree ** (depth + 1) <= max_cells:
        depth += 1
    return depth


def preimage_tree(T, depth):
    """
    Representative points of the cells of T^{-depth}(E₀), E₀ = [−β, β].

    Level 0 is the centre of E₀. A point of level k+1 is b_i(x) for a level-k point x and the
    i-th inverse branch (ascending), stored at index i·d^k + parent.
    """
    points = np.zeros(1)
    for _ in range(depth):
        points = polynomial_preimages(T, points).T.ravel()
    return points


def transfer_matrix(T, weight, points):
    """
    Sparse matrix of the adjoint weighted transfer operator on the depth-D cells.

    Cell J goes under b_i into cell i·d^{D−1} + J // d with mass factor 1/A(b_i(x_J))².
    """
    d = T.degree
    n = points.size
    stride = n // d
    images = polynomial_preimages(T, points)
    rows, cols, values = [], [], []
    cells = np.arange(n)
    for i in range(d):
        factor = 1.0 / np.abs(weight(images[:, i])) ** 2
        rows.append(i * stride + cells // d)
        cols.append(cells)
        values.append(factor)
    return sparse.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def ruelle_eigen(T, weight, depth=None, tol=DEFAULT_TV_TOL, max_iter=MAX_ITERATIONS):
    """
    Leading eigenvalue and eigen-measure of 𝓛*_A by power iteration on preimage-tree cells.

    Returns:
        tuple: (rho, DiscreteMeasure on the cell points, iterations).

    Raises:
        NonConvergenceError: total-variation change still above `tol` after `max_iter` steps.
    """
    depth = depth or default_depth(T)
    points = preimage_tree(T, depth)
    matrix = transfer_matrix(T, weight, points)
    sigma = np.full(points.size, 1.0 / points.size)
    rho = float("nan")
    for iteration in range(1, max_iter + 1):
        image = matrix @ sigma
        rho = float(math.fsum(image))
        updated = image / rho
        change = 0.5 * float(np.sum(np.abs(updated - sigma)))
        sigma = updated
        if change <= tol:
            logging.debug(f"[transfer_ruelle] converged after {iteration} iterations: rho={rho!r} tv={change:.3g}")
            return rho, DiscreteMeasure(points, sigma / math.fsum(sigma)), iteration
    raise NonConvergenceError(f"Power iteration did not converge in {max_iter} iterations (rho={rho!r}).")


def preimage_measure(T, weight, depth=None, x0=None):
    """
    All depth-level preimages y of x0 with mass ∝ Π_{j<depth} 1/A(T^j y)².

    This is 𝓛_A^depth applied at x0 and normalized, so it tends to the eigen-measure of 𝓛*_A
    without any power iteration. x0 defaults to the seed point of T, which lies on the Julia set.
    """
    depth = depth or default_depth(T, ORACLE_CELLS)
    x = np.atleast_1d(np.asarray(seed_point(T) if x0 is None else x0, dtype=np.float64))
    log_mass = np.zeros(x.size)
    for _ in range(depth):
        images = polynomial_preimages(T, x)
        log_mass = (log_mass[:, None] - 2.0 * np.log(np.abs(weight(images)))).ravel()
        x = images.ravel()
    mass = np.exp(log_mass - np.max(log_mass))
    return DiscreteMeasure(x, mass / math.fsum(mass))


def split_weights(T, weight_split):
    """A₁ = Π_{c ∈ split}(z − c) and A₂ = T′/A₁."""
    critical = list(T.critical_points)
    a1 = Polynomial([1.0])
    for c in weight_split:
        if not any(abs(c - x) <= 1e-9 * max(1.0, abs(x)) for x in critical):
            raise InvalidInputError(f"{c!r} is not a critical point of T.")
        a1 = a1 * Polynomial([-c, 1.0])
    a2, remainder = divmod(T.derivative, a1)
    if np.max(np.abs(remainder.coef)) > 1e-8 * max(1.0, np.max(np.abs(T.derivative.coef))):
        raise InvalidInputError("The split does not divide T'.")
    return a1, a2


def weighted_ruelle_eigen(T, weight_split, depth=None, tol=DEFAULT_TV_TOL, max_iter=MAX_ITERATIONS):
    """
    Eigen-pairs of the two weighted transfer operators 𝓛_{A_i} f(x) = Σ_{T(y)=x} f(y)/A_i(y)²
    for the factorization T′ = A₁A₂ induced by `weight_split` (critical points going into A₁).

    The empty split gives A₁ = 1: ρ₁ = d and σ₁ is the balanced measure. A₂ = T′ gives the
    Bowen–Ruelle measure.
    """
    T.check_regime()
    start_time = time.time()
    a1, a2 = split_weights(T, weight_split)
    rho_1, sigma_1, iterations_1 = ruelle_eigen(T, a1, depth, tol, max_iter)
    rho_2, sigma_2, iterations_2 = ruelle_eigen(T, a2, depth, tol, max_iter)
    elapsed_time = time.time() - start_time
    logging.info(
        f"[transfer_ruelle] rho_1={rho_1:.6g} ({iterations_1} it), rho_2={rho_2:.6g} ({iterations_2} it) in {elapsed_time:.2f} seconds."
    )
    return {
        "rho_1": rho_1,
        "rho_2": rho_2,
        "sigma_1": sigma_1,
        "sigma_2": sigma_2,
        "iterations_1": iterations_1,
        "iterations_2": iterations_2,
    }
