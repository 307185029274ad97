"""Certificate records produced by the numerical checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
VERDICTS = (PASS, FAIL, INCONCLUSIVE)


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays into plain JSON types.

    Non-finite floats become strings ("inf", "-inf", "nan") so the output
    stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return {"re": jsonable(float(obj.real)), "im": jsonable(float(obj.imag))}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


@dataclass
class Certificate:
    """Outcome of one hypothesis check, with the evidence behind it.

    ``pass`` means no violation was found at the recorded sample size; it is
    not a proof. A failing certificate always carries a worst witness.
    """

    check_name: str
    verdict: str
    tolerances: dict[str, Any] = field(default_factory=dict)
    samples: dict[str, Any] = field(default_factory=dict)
    worst_witness: dict[str, Any] | None = None
    constants: dict[str, Any] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == FAIL and self.worst_witness is None:
            raise ValueError(f"failing certificate {self.check_name!r} needs a witness")
        for key, value in self.constants.items():
            if isinstance(value, (float, np.floating)) and not np.isfinite(value):
                raise ValueError(f"constant {key} is not finite")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict[str, Any]:
        return jsonable(
            {
                "check_name": self.check_name,
                "verdict": self.verdict,
                "tolerances": self.tolerances,
                "samples": self.samples,
                "worst_witness": self.worst_witness,
                "constants": self.constants,
                "flags": self.flags,
                "notes": self.notes,
            }
        )


def witness(point, violation: float, **extra: Any) -> dict[str, Any]:
    out = {"point": np.asarray(point, dtype=float).tolist(), "violation": float(violation)}
    out.update(extra)
    return out
