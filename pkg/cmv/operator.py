import logging
from dataclasses import dataclass

import numpy as np

from banded.exceptions import InvalidInputError
from banded.operations import band_adjoint, band_add, band_mul
from banded.window import WHOLE_LINE, BandedWindow

MIN_WINDOW = 6
# interior rows untouched by the boundary closure
CMV_MARGIN = 2
SUM_MARGIN = 4


@dataclass(frozen=True, eq=False)
class VerblunskySeq:
    """Verblunsky coefficients a_k, k = first .. first+len(a)-1, all strictly inside the unit disk."""
    a: np.ndarray
    first: int = 0

    def __post_init__(self):
        a = np.array(self.a, dtype=np.complex128, copy=True).ravel()
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("Verblunsky coefficients must be finite.")
        if a.size and float(np.max(np.abs(a))) >= 1.0:
            raise InvalidInputError(f"Verblunsky coefficients need |a_k| < 1, got max {float(np.max(np.abs(a)))!r}.")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_pairs(cls, pairs, first=0):
        """From a JSON list of [re, im] pairs."""
        return cls(np.array([complex(re, im) for re, im in pairs]), first)

    def to_pairs(self):
        return [[float(v.real), float(v.imag)] for v in self.a]

    @property
    def n(self):
        return self.a.size

    @property
    def rho(self):
        return np.sqrt(1.0 - np.abs(self.a) ** 2)


@dataclass(frozen=True, eq=False)
class CmvWindow:
    """Five-diagonal CMV window together with its factors and the measured unitarity defect."""
    window: BandedWindow
    even_factor: BandedWindow
    odd_factor: BandedWindow
    unitary_defect: float

    @property
    def n(self):
        return self.window.n


def _block(a, rho):
    return np.array([[np.conj(a), rho], [rho, -a]])


def cmv_factors(seq):
    """
    The block-diagonal factors 𝔄₀ (blocks A_k, k even) and 𝔄₁ (blocks A_k, k odd).

    A_k = [[ā_k, ρ_k], [ρ_k, −a_k]] acts on sites (k, k+1). The window is closed with a₋₁ = −1 at
    the top, leaving 𝔄₁(first, first) = 1, and an inert 1 at the last site of 𝔄₁, so both
    factors are exactly unitary on the window.
    """
    n = seq.n
    if n < MIN_WINDOW or n % 2 or seq.first % 2:
        raise InvalidInputError(f"CMV windows need an even size >= {MIN_WINDOW} starting at an even index.")
    rho = seq.rho
    even = np.zeros((n, n), dtype=np.complex128)
    odd = np.zeros((n, n), dtype=np.complex128)
    for k in range(0, n, 2):
        even[k: k + 2, k: k + 2] = _block(seq.a[k], rho[k])
    odd[0, 0] = 1.0
    for k in range(1, n - 1, 2):
        odd[k: k + 2, k: k + 2] = _block(seq.a[k], rho[k])
    odd[n - 1, n - 1] = 1.0
    return (
        BandedWindow.from_dense(even, 1, seq.first, WHOLE_LINE),
        BandedWindow.from_dense(odd, 1, seq.first, WHOLE_LINE),
    )


def unitary_defect(matrix):
    """‖M*M − I‖_max."""
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))


def build_cmv(seq):
    """CMV window 𝔄 = 𝔄₀𝔄₁ with two nonvanishing diagonals on each side of the main one."""
    even, odd = cmv_factors(seq)
    product = band_mul(even, odd)
    window = BandedWindow.from_dense(product.to_dense(), 2, seq.first, WHOLE_LINE, CMV_MARGIN, CMV_MARGIN)
    defect = unitary_defect(window.to_dense())
    logging.debug(f"[cmv_operator] n={seq.n} unitary defect {defect:.3g}")
    return CmvWindow(window, even, odd, defect)


def z_matrix(cmv):
    """𝔄 + 𝔄* (𝔄⁻¹ = 𝔄* on the window)."""
    window = cmv.window if isinstance(cmv, CmvWindow) else cmv
    total = band_add(window, band_adjoint(window))
    return BandedWindow(total.entries, total.offset, total.side, SUM_MARGIN, SUM_MARGIN)


def five_diagonal_formulas(seq):
    """
    Closed forms of 𝔄 + 𝔄* on local sites k (valid away from the closure):
      (k, k)   −2 Re(a_k ā_{k−1})
      (k, k+1) ρ_k (a_{k+1} − a_{k−1}) for odd k, its conjugate for even k
      (k, k+2) ρ_k ρ_{k+1}
    Entries that would need coefficients outside the window are NaN.
    """
    a, rho, n = seq.a, seq.rho, seq.n
    diag = np.full(n, np.nan + 0j)
    first = np.full(n - 1, np.nan + 0j)
    second = np.full(n - 2, np.nan + 0j)
    diag[1:] = -2.0 * np.real(a[1:] * np.conj(a[:-1]))
    for k in range(1, n - 1):
        value = rho[k] * (a[k + 1] - a[k - 1])
        first[k] = value if k % 2 else np.conj(value)
    second[:] = rho[:-2] * rho[1:-1]
    return {"diag": diag, "first": first, "second": second}


def five_diagonal_check(cmv, seq):
    """
    Residuals of the closed forms of 𝔄 + 𝔄* on the interior, plus band checks on 𝔄 itself.

    Returns:
        dict: `diag`, `first`, `second` residuals, `outside_band` (largest entry of 𝔄 + 𝔄* beyond
        the second diagonal), `third_superdiagonal` (largest entry of 𝔄 beyond its second
        superdiagonal) and `second_superdiagonal_min` (smallest |𝔄(k, k+2)| on interior even rows).
    """
    n = seq.n
    if n < 2 * SUM_MARGIN + 2:
        raise InvalidInputError(f"Five-diagonal checks need at least {2 * SUM_MARGIN + 2} sites, got {n}.")
    total = z_matrix(cmv).to_dense()
    matrix = cmv.window.to_dense()
    rows = np.arange(SUM_MARGIN, n - SUM_MARGIN)
    formulas = five_diagonal_formulas(seq)
    residuals = {
        "diag": float(np.max(np.abs(total[rows, rows] - formulas["diag"][rows]))),
        "first": float(np.max(np.abs(total[rows, rows + 1] - formulas["first"][rows]))),
        "second": float(np.max(np.abs(total[rows, rows + 2] - formulas["second"][rows]))),
    }
    offsets = np.subtract.outer(np.arange(n), np.arange(n))
    residuals["outside_band"] = float(np.max(np.abs(total[np.abs(offsets) > 2]), initial=0.0))
    residuals["third_superdiagonal"] = float(np.max(np.abs(matrix[offsets < -2]), initial=0.0))
    even_rows = rows[rows % 2 == 0]
    residuals["second_superdiagonal_min"] = float(np.min(np.abs(matrix[even_rows, even_rows + 2])))
    logging.debug(f"[cmv_operator] five-diagonal residuals {residuals}")
    return residuals


def verblunsky_from_cmv(matrix, first=0, last_coefficient=0.0):
    """
    Re-extract a_k from the entries of a CMV window.

    With w_k = a_k/ρ_k:
      odd k = 2m+1:  w̄_k = 𝔄(2m, 2m+1)/𝔄(2m, 2m+2)
      even k = 2m:   w̄_k = 𝔄(2m, 2m−1)/𝔄(2m+1, 2m−1)
    and a_k = w_k/√(1 + |w_k|²). The top coefficient is conj(𝔄(0, 0)); the last one is not
    visible through the closure and is passed in.
    """
    dense = matrix.to_dense() if isinstance(matrix, BandedWindow) else np.asarray(matrix)
    n = dense.shape[0]
    a = np.zeros(n, dtype=np.complex128)
    a[0] = np.conj(dense[0, 0])
    for k in range(1, n - 1):
        if k % 2:
            ratio = dense[k - 1, k] / dense[k - 1, k + 1]
        else:
            ratio = dense[k, k - 1] / dense[k + 1, k - 1]
        w = np.conj(ratio)
        a[k] = w / np.sqrt(1.0 + abs(w) ** 2)
    a[n - 1] = last_coefficient
    return VerblunskySeq(a, first)
