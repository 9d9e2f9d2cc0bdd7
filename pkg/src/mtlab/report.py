"""Pass/fail record returned by every *_check routine."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    passed: bool
    worst: float
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.passed)

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} worst={self.worst:.6g}"
