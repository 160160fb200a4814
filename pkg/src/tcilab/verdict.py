"""Three-valued verdict object shared by every decision procedure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

_STATUSES = (HOLDS, FAILS, INCONCLUSIVE)


@dataclass
class Verdict:
    """Outcome of a decision procedure.

    ``constants`` carries the witness constants backing a ``holds`` (all of
    them must be finite and positive); ``diagnostics`` carries everything a
    reviewer needs to replay the computation (grids, argmax points, probe
    tables, free-text reasons).
    """

    status: str
    constants: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown verdict status {self.status!r}")
        if self.status == HOLDS:
            for name, value in self.constants.items():
                if not (math.isfinite(value) and value > 0):
                    raise ValueError(
                        f"holds verdict requires finite positive constants; "
                        f"{name}={value!r}")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "constants": {k: _json_float(v) for k, v in self.constants.items()},
            "diagnostics": _jsonify(self.diagnostics),
        }


def _json_float(x):
    if isinstance(x, float) and not math.isfinite(x):
        if math.isnan(x):
            return "nan"
        return "inf" if x > 0 else "-inf"
    return x


def _jsonify(obj):
    """Make diagnostics JSON-serializable (arrays -> lists, inf -> strings)."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float):
        return _json_float(obj)
    return obj
