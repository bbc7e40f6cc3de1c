"""Result records shared by the verification suites and the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def _plain(value):
    """Coerce numpy scalars and tuples to JSON-friendly Python values."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, float):
        return float(value)
    if hasattr(value, "item"):
        return _plain(value.item())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    raise TypeError(f"unsupported detail value {value!r}")


@dataclass
class CheckReport:
    name: str
    passed: bool
    max_residual: float
    n_samples: int
    details: list = field(default_factory=list)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.max_residual = float(self.max_residual)
        self.n_samples = int(self.n_samples)
        self.details = [(str(k), _plain(v)) for k, v in self.details]

    def detail(self, label: str):
        for k, v in self.details:
            if k == label:
                return v
        raise KeyError(label)

    def to_dict(self) -> dict:
        r = self.max_residual
        return {
            "name": self.name,
            "passed": self.passed,
            # JSON has no infinities; keep them readable and reversible
            "max_residual": r if math.isfinite(r) else repr(r),
            "n_samples": self.n_samples,
            "details": [[k, v] for k, v in self.details],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(
            name=d["name"],
            passed=d["passed"],
            max_residual=float(d["max_residual"]),
            n_samples=d["n_samples"],
            details=[(k, v) for k, v in d["details"]],
        )

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  max_residual={self.max_residual:.3e}  n={self.n_samples}"
