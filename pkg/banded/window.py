import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidInputError

HALF_LINE = "half_line"
WHOLE_LINE = "whole_line"
SIDES = (HALF_LINE, WHOLE_LINE)


def _outside_mask(n, w):
    """Storage cells (i, w+k) whose column i+k falls outside the window."""
    rows = np.arange(n)[:, None]
    cols = rows + np.arange(-w, w + 1)[None, :]
    return (cols < 0) | (cols >= n)


@dataclass(frozen=True, eq=False)
class BandedWindow:
    """
    BandedWindow is a finite index-window of a (semi-)infinite banded operator.

    Storage:
    --------
    Diagonals are stored row-aligned: `entries[i, w + k]` holds A(i, i + k) for local row `i`
    and diagonal offset `k` in [-w, w]. Cells whose column falls outside the window are kept at zero.
    Real windows are float64, CMV windows are complex128.

    Indexing:
    ---------
    - `offset`: global index of local row 0. Public operations that take row/column indices use
      global indices; `local(i)` converts.
    - `side`: `half_line` when the window starts at the first site of a one-sided operator,
      `whole_line` otherwise.

    Exactness margins:
    ------------------
    `exact_margin_top` and `exact_margin_bottom` count the rows next to each edge that may differ
    from the infinite operator. Rows in `exact_rows()` are guaranteed boundary-free. Every operation
    grows the margins by its bandwidth reach, so downstream checks compare only exact rows.
    """
    entries: np.ndarray
    offset: int = 0
    side: str = WHOLE_LINE
    exact_margin_top: int = 0
    exact_margin_bottom: int = 0

    def __post_init__(self):
        entries = np.array(self.entries, copy=True)
        if entries.ndim != 2 or entries.shape[1] % 2 != 1:
            raise InvalidInputError("Banded storage must have shape (n, 2w+1).")
        entries = entries.astype(np.complex128 if np.iscomplexobj(entries) else np.float64)
        n, width = entries.shape
        w = (width - 1) // 2
        entries[_outside_mask(n, w)] = 0
        entries.setflags(write=False)
        if self.side not in SIDES:
            raise InvalidInputError(f"Unknown window side '{self.side}'.")
        if self.exact_margin_top < 0 or self.exact_margin_bottom < 0:
            raise InvalidInputError("Exactness margins must be non-negative.")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "exact_margin_top", min(int(self.exact_margin_top), n))
        object.__setattr__(self, "exact_margin_bottom", min(int(self.exact_margin_bottom), n))

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def bandwidth(self):
        return (self.entries.shape[1] - 1) // 2

    @property
    def is_complex(self):
        return np.iscomplexobj(self.entries)

    def local(self, i):
        k = i - self.offset
        if k < 0 or k >= self.n:
            raise InvalidInputError(f"Index {i} outside window [{self.offset}, {self.offset + self.n}).")
        return k

    def exact_rows(self):
        """Local slice of rows equal to the infinite-operator truth."""
        return slice(self.exact_margin_top, max(self.exact_margin_top, self.n - self.exact_margin_bottom))

    def diagonal(self, k=0):
        """Diagonal `k` as an array of length n-|k| (local ordering)."""
        w = self.bandwidth
        if abs(k) > w:
            return np.zeros(max(self.n - abs(k), 0), dtype=self.entries.dtype)
        rows = np.arange(max(0, -k), self.n - max(0, k))
        return self.entries[rows, w + k].copy()

    def entry(self, i, j):
        li, lj = self.local(i), self.local(j)
        k = lj - li
        if abs(k) > self.bandwidth:
            return 0.0
        return self.entries[li, self.bandwidth + k]

    def to_dense(self):
        n, w = self.n, self.bandwidth
        dense = np.zeros((n, n), dtype=self.entries.dtype)
        for k in range(-w, w + 1):
            rows = np.arange(max(0, -k), n - max(0, k))
            dense[rows, rows + k] = self.entries[rows, w + k]
        return dense

    def to_band_storage(self, upper_only=False):
        """LAPACK band layout `ab[u + i - j, j] = A(i, j)` (u = l = w, or upper triangle only)."""
        n, w = self.n, self.bandwidth
        lower = 0 if upper_only else w
        ab = np.zeros((w + lower + 1, n), dtype=self.entries.dtype)
        for k in range(-lower, w + 1):
            rows = np.arange(max(0, -k), n - max(0, k))
            ab[w - k, rows + k] = self.entries[rows, w + k]
        return ab

    def with_margins(self, top, bottom):
        return BandedWindow(self.entries, self.offset, self.side, top, bottom)

    @classmethod
    def zeros(cls, n, w=0, offset=0, side=WHOLE_LINE, dtype=np.float64):
        return cls(np.zeros((n, 2 * w + 1), dtype=dtype), offset, side)

    @classmethod
    def from_dense(cls, matrix, bandwidth=None, offset=0, side=WHOLE_LINE, exact_margin_top=0, exact_margin_bottom=0):
        """Keep diagonals |k| <= bandwidth of a dense matrix (all nonzero diagonals when omitted)."""
        matrix = np.asarray(matrix)
        n = matrix.shape[0]
        if matrix.shape != (n, n):
            raise InvalidInputError("Dense input must be square.")
        if bandwidth is None:
            nz_rows, nz_cols = np.nonzero(matrix)
            bandwidth = int(np.max(np.abs(nz_cols - nz_rows))) if nz_rows.size else 0
        w = min(int(bandwidth), max(n - 1, 0))
        entries = np.zeros((n, 2 * w + 1), dtype=matrix.dtype)
        for k in range(-w, w + 1):
            rows = np.arange(max(0, -k), n - max(0, k))
            entries[rows, w + k] = matrix[rows, rows + k]
        return cls(entries, offset, side, exact_margin_top, exact_margin_bottom)

    @classmethod
    def from_diagonals(cls, n, diagonals, offset=0, side=WHOLE_LINE, exact_margin_top=0, exact_margin_bottom=0):
        """Build from `{k: values}`; scalar values are broadcast along the diagonal."""
        w = max((abs(k) for k in diagonals), default=0)
        dtype = np.result_type(*[np.asarray(v) for v in diagonals.values()], np.float64)
        entries = np.zeros((n, 2 * w + 1), dtype=dtype)
        for k, values in diagonals.items():
            rows = np.arange(max(0, -k), n - max(0, k))
            entries[rows, w + k] = np.broadcast_to(np.asarray(values, dtype=dtype), rows.shape)
        return cls(entries, offset, side, exact_margin_top, exact_margin_bottom)


@dataclass(frozen=True, eq=False)
class JacobiCoeffs:
    """
    Coefficients of a Jacobi operator: `p_k` couples sites k-1 and k, `q_k` sits on the diagonal.

    Periodic data stores one period of both sequences (`p[k % period]`, `q[k % period]`).
    Finite data covers sites `first .. first+len(q)-1` and the couplings between them, so
    `p` has one entry less than `q`.
    """
    p: np.ndarray
    q: np.ndarray
    period: Optional[int] = None
    first: int = 0

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64, copy=True).ravel()
        q = np.array(self.q, dtype=np.float64, copy=True).ravel()
        if self.period is not None:
            if self.period < 1 or len(p) != self.period or len(q) != self.period:
                raise InvalidInputError("Periodic Jacobi data must have length equal to the period.")
        elif len(q) < 1 or len(p) != len(q) - 1:
            raise InvalidInputError("Finite Jacobi data needs len(p) == len(q) - 1.")
        if np.any(~np.isfinite(p)) or np.any(~np.isfinite(q)):
            raise InvalidInputError("Jacobi coefficients must be finite.")
        if np.any(p <= 0):
            raise InvalidInputError("Off-diagonal coefficients p_k must be positive.")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def periodic(cls, p, q):
        p = np.atleast_1d(np.asarray(p, dtype=np.float64))
        q = np.atleast_1d(np.asarray(q, dtype=np.float64))
        return cls(p, q, period=len(p))

    @classmethod
    def constant(cls, p, q=0.0):
        return cls.periodic([p], [q])

    @property
    def is_periodic(self):
        return self.period is not None

    @property
    def last(self):
        """Last site of finite data."""
        return self.first + len(self.q) - 1

    def p_at(self, k):
        k = np.asarray(k)
        if self.is_periodic:
            return self.p[np.mod(k, self.period)]
        if np.any(k <= self.first) or np.any(k > self.last):
            raise InvalidInputError(f"Coupling index outside finite data ({self.first}, {self.last}].")
        return self.p[k - self.first - 1]

    def q_at(self, k):
        k = np.asarray(k)
        if self.is_periodic:
            return self.q[np.mod(k, self.period)]
        if np.any(k < self.first) or np.any(k > self.last):
            raise InvalidInputError(f"Site index outside finite data [{self.first}, {self.last}].")
        return self.q[k - self.first]

    def reflected(self):
        """Coefficients of U J U with U|l> = |1-l>: q'(k) = q(1-k), p'(k) = p(2-k)."""
        if not self.is_periodic:
            raise InvalidInputError("Reflection is defined for periodic data.")
        k = np.arange(self.period)
        return JacobiCoeffs(self.p_at(2 - k), self.q_at(1 - k), period=self.period)

    def norm_bound(self):
        """Gershgorin bound on the operator norm."""
        if self.is_periodic:
            k = np.arange(self.period)
            return float(np.max(np.abs(self.q_at(k)) + self.p_at(k) + self.p_at(k + 1)))
        padded = np.concatenate([[0.0], self.p, [0.0]])
        return float(np.max(np.abs(self.q) + padded[:-1] + padded[1:]))

    def window(self, offset=0, n=None, side=WHOLE_LINE):
        """
        Materialize rows offset .. offset+n-1 as a tridiagonal window.

        A `half_line` window drops the coupling into site offset-1. Margins mark the rows whose
        couplings leave the window.
        """
        if n is None:
            if self.is_periodic:
                raise InvalidInputError("Window size is required for periodic data.")
            n = len(self.q) - (offset - self.first)
        sites = np.arange(offset, offset + n)
        q = self.q_at(sites)
        p = self.p_at(sites[1:]) if n > 1 else np.zeros(0)
        top = 0 if side == HALF_LINE else 1
        bottom = 1
        if not self.is_periodic:
            if offset == self.first:
                top = 0
            if offset + n - 1 == self.last:
                bottom = 0
        logging.debug(f"[banded_window] Jacobi window offset={offset} n={n} side={side}")
        return BandedWindow.from_diagonals(n, {-1: p, 0: q, 1: p}, offset, side, top, bottom)
