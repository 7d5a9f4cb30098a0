"""Report envelopes and their canonical byte serialization."""

import hashlib
import json
import math
from typing import Any

import numpy as np

TOOL_NAME = "gpfactor"
TOOL_VERSION = "1.0.0"


def input_digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def build_report(command: str, result: Any, digest: str) -> dict:
    """Wrap a command result with the tool identity and the input digest."""
    return {
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "command": command,
        "input_digest": digest,
        "result": result,
    }


def _plain(value: Any) -> Any:
    """JSON-safe copy: tuples become lists, numpy scalars become Python numbers, ∞ becomes "inf"."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return value


def emit(report: dict) -> bytes:
    """Sorted keys, two-space indent, shortest round-trip floats, trailing newline."""
    text = json.dumps(_plain(report), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    return (text + "\n").encode("utf-8")
