"""Canonical JSON encoding shared by the service, the CLI and the cache.

Byte identity across processes is part of the caching contract, so there is
exactly one way to turn an analysis result into bytes: sanitize numpy types
into plain Python, then dump with sorted keys and no whitespace.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np

from .errors import ValidationError


def sanitize(value: Any) -> Any:
    """Plain-Python copy of a result tree: numpy scalars and arrays become
    numbers and lists, tuples become lists, non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [sanitize(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    raise ValidationError(f"value of type {type(value).__name__} is not serializable")


def canonical_bytes(value: Any) -> bytes:
    return json.dumps(sanitize(value), sort_keys=True,
                      separators=(",", ":"), allow_nan=False).encode("utf-8")


def parameter_hash(value: Any) -> str:
    return hashlib.sha256(canonical_bytes(value)).hexdigest()
