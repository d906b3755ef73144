"""Validation reports.

Every validator returns a ValidationReport: a list of named checks, each
with the maximum observed residual, the tolerance it was held to, and the
coordinates of the worst offender.  Reports from independent validators
merge, and serialization is stable so that identical inputs produce
byte-identical report files.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    witness: tuple[int, ...] | None = None
    skipped: bool = False

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
            "witness": list(self.witness) if self.witness is not None else None,
        }
        if self.skipped:
            d["skipped"] = True
        return d


def check_from_residual(
    name: str,
    residual: float,
    tolerance: float,
    witness: tuple[int, ...] | None = None,
) -> Check:
    return Check(name, float(residual), float(tolerance), float(residual) <= float(tolerance), witness)


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    def extend(self, other: "ValidationReport") -> None:
        self.checks.extend(other.checks)

    def worst(self) -> Check | None:
        live = [c for c in self.checks if not c.skipped]
        if not live:
            return None
        return max(live, key=lambda c: c.residual)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def sorted(self) -> "ValidationReport":
        return ValidationReport(sorted(self.checks, key=lambda c: c.name))

    def as_dict(self) -> dict:
        return {"checks": [c.as_dict() for c in self.checks]}

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            if c.skipped:
                status = "SKIP"
            else:
                status = "PASS" if c.passed else "FAIL"
            wit = f" witness={list(c.witness)}" if c.witness is not None else ""
            lines.append(f"{status} {c.name} residual={c.residual:.3e} tolerance={c.tolerance:.3e}{wit}")
        return lines
