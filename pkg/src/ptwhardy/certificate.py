"""Uniform record for one checked inequality, plus the numeric tolerance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

_EPS_NUM = 1e-9


def eps_num() -> float:
    """Additive slack used when certifying ``lhs <= rhs``."""
    return _EPS_NUM


def set_eps_num(value: float) -> None:
    global _EPS_NUM
    if not value >= 0:
        raise ValueError("eps_num must be nonnegative")
    _EPS_NUM = float(value)


def holds(lhs: float, rhs: float, slack: float | None = None) -> bool:
    return bool(lhs <= rhs + (eps_num() if slack is None else slack))


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats for ``json.dumps``."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


@dataclass
class Certificate:
    kind: str
    lhs: float
    rhs: float
    passed: bool
    constants: dict[str, float] = field(default_factory=dict)
    witnesses: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @classmethod
    def inequality(cls, kind: str, lhs: float, rhs: float, **kw) -> "Certificate":
        return cls(kind=kind, lhs=float(lhs), rhs=float(rhs), passed=holds(lhs, rhs), **kw)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return jsonable(
            {
                "kind": self.kind,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "pass": self.passed,
                "constants": self.constants,
                "witnesses": self.witnesses,
                "notes": self.notes,
            }
        )
