import numpy as np
import pytest

from banded.window import WHOLE_LINE, BandedWindow


def random_banded(rng, n, w, offset=0, side=WHOLE_LINE, symmetric=False, complex_entries=False):
    dense = rng.standard_normal((n, n))
    if complex_entries:
        dense = dense + 1j * rng.standard_normal((n, n))
    if symmetric:
        dense = dense + dense.conj().T
    dense = np.triu(np.tril(dense, w), -w)
    return BandedWindow.from_dense(dense, w, offset, side)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
