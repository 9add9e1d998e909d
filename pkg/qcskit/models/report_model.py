from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from qcskit.models.herm_model import HermMat


@dataclass
class CheckResult:
    """One named check of an audit.

    Attributes:
        check (str): Name of the check.
        passed (bool): Whether the check holds.
        residual (float): Largest numerical residual observed (0 for purely logical checks).
        witness (HermMat | None): A matrix certifying a failure (or the demonstrating point).
        notes (list[str]): Free-form observations, in the order they were made.
        unresolved (bool): True when an oracle ran out of budget before deciding.
        point (HermMat | None): The input point of a failing sample, when there is one.

    """
    check: str
    passed: bool
    residual: float = 0.0
    witness: Optional[HermMat] = None
    notes: list[str] = field(default_factory=list)
    unresolved: bool = False
    point: Optional[HermMat] = None

    def to_dict(self) -> dict[str, Any]:
        # Local import: json_utils depends on the model modules.
        from qcskit.utils.json_utils import matrix_to_json

        data = {
            "check": self.check,
            "pass": bool(self.passed),
            "residual": float(self.residual),
            "witness": None if self.witness is None else matrix_to_json(self.witness),
            "notes": list(self.notes),
        }
        if self.point is not None:
            data["point"] = matrix_to_json(self.point)
        if self.unresolved:
            data["unresolved"] = True
        return data


@dataclass
class AuditReport:
    """An ordered collection of checks, optionally nested (one sub-report per generator)."""
    name: str
    checks: list[CheckResult] = field(default_factory=list)
    children: list["AuditReport"] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and all(r.passed for r in self.children)

    @property
    def unresolved(self) -> bool:
        """True when nothing failed outright but some oracle could not decide."""
        if any(not c.passed and not c.unresolved for c in self.checks):
            return False
        if any(not r.passed and not r.unresolved for r in self.children):
            return False
        return any(c.unresolved for c in self.checks) or any(r.unresolved for r in self.children)

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        return "unresolved" if self.unresolved else "fail"

    def check_named(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.check == name:
                return c
        raise KeyError(f"No check named '{name}' in report '{self.name}'")

    def child_named(self, name: str) -> "AuditReport":
        for r in self.children:
            if r.name == name:
                return r
        raise KeyError(f"No sub-report named '{name}' in report '{self.name}'")

    def to_dict(self) -> dict[str, Any]:
        data = {
            "report": self.name,
            "pass": self.passed,
            "status": self.status,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }
        if self.children:
            data["children"] = [r.to_dict() for r in self.children]
        return data


def max_abs(a: np.ndarray) -> float:
    """Largest absolute entry (0 for empty arrays); the residual measure used by audits."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0
