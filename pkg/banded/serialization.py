import json
import logging

import numpy as np

from .exceptions import InvalidInputError
from .window import BandedWindow


def _encode_value(value, is_complex):
    if is_complex:
        return [float(value.real), float(value.imag)]
    return float(value)


def window_to_dict(a):
    """JSON-ready document {offset, n, w, side, diags, ...}; diags[m] is diagonal k = m - w, row-aligned."""
    is_complex = a.is_complex
    diags = [
        [_encode_value(v, is_complex) for v in a.entries[:, m]]
        for m in range(a.entries.shape[1])
    ]
    return {
        "offset": a.offset,
        "n": a.n,
        "w": a.bandwidth,
        "side": a.side,
        "complex": is_complex,
        "exact_margin_top": a.exact_margin_top,
        "exact_margin_bottom": a.exact_margin_bottom,
        "diags": diags,
    }


def window_from_dict(doc):
    try:
        n, w = int(doc["n"]), int(doc["w"])
        diags = doc["diags"]
        if len(diags) != 2 * w + 1 or any(len(d) != n for d in diags):
            raise InvalidInputError("Diagonal table does not match n and w.")
        if doc.get("complex", False):
            columns = [[complex(v[0], v[1]) for v in d] for d in diags]
            entries = np.array(columns, dtype=np.complex128).T.reshape(n, 2 * w + 1)
        else:
            entries = np.array(diags, dtype=np.float64).T.reshape(n, 2 * w + 1)
        return BandedWindow(
            entries,
            doc["offset"],
            doc["side"],
            doc.get("exact_margin_top", 0),
            doc.get("exact_margin_bottom", 0),
        )
    except (KeyError, TypeError, IndexError) as e:
        raise InvalidInputError(f"Malformed window document: {e}") from e


def window_to_json(a):
    # json floats use the shortest round-trip repr, so the round trip is bit-exact
    try:
        return json.dumps(window_to_dict(a), sort_keys=True, allow_nan=False)
    except ValueError as e:
        raise InvalidInputError(f"Window entries must be finite to serialize: {e}") from e


def window_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        logging.error(f"[banded_serialization] Invalid window JSON: {e}")
        raise InvalidInputError(f"Invalid window JSON: {e}") from e
    return window_from_dict(doc)
