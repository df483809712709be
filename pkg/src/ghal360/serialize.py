"""Canonical JSON and float quantization shared by every artifact writer.

Reports, traces, and protocol goldens must be byte-identical across runs,
so floats are quantized to 6 significant digits before they enter any
serialized structure and JSON is emitted with sorted keys and no
whitespace.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any


def q6(x: float) -> float:
    """Quantize to 6 significant digits; round-trips through %.6g exactly."""
    if not math.isfinite(x):
        return x
    return float(f"{x:.6g}")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
