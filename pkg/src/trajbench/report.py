"""Deterministic JSON report envelope for the CLI.

Reports are reproducible byte for byte: same inputs and seeds give the same
serialization, so no wall-clock fields belong here.
"""

from __future__ import annotations

import json
import math
from typing import Any, Dict

import trajbench

INF_SENTINEL = "inf"


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value):
            return INF_SENTINEL if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item) and getattr(value, "ndim", None) == 0:
        return _jsonable(value.item())
    return value


def make_report(command: str, params: Dict[str, Any], results: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "tool": "trajbench",
        "version": trajbench.__version__,
        "command": command,
        "params": _jsonable(params),
        "results": _jsonable(results),
    }


def dump_report(report: Dict[str, Any]) -> str:
    """Stable serialization: sorted keys, no float mangling, newline-terminated."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
