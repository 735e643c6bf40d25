import csv
import hashlib
import json
import logging
import math
import os
from typing import Iterable, Optional, Sequence

import numpy as np

NON_FINITE = {"nan": "NaN", "inf": "Infinity", "-inf": "-Infinity"}


def to_jsonable(value):
    """
    Plain Python values for numpy scalars/arrays and complex numbers (as [re, im]).

    Non-finite floats become the strings "NaN", "Infinity" and "-Infinity" so reports stay strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else NON_FINITE[repr(value)]
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]
    return value


def canonical_json(value, indent: Optional[int] = None) -> str:
    """JSON with sorted keys; floats keep their shortest round-trip repr."""
    return json.dumps(to_jsonable(value), sort_keys=True, indent=indent, allow_nan=False)


def config_hash(config: dict, version: str) -> str:
    h = hashlib.sha1(f"{canonical_json(config)}|{version}".encode("utf-8")).hexdigest()
    return h


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_text(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logging.debug(f"[file_utils] Wrote {path}")
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV with a header row; floats are written with repr so reruns are byte-identical."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    logging.debug(f"[file_utils] Wrote {path}")
    return path


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
