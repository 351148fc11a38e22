"""
Verdict reports written by the checker: one line per property, in a fixed
order, with the first violating cycle for failures.
"""

from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, Field


class FormulaVerdict(BaseModel):
    """Outcome of one property on one trace."""

    name: str = Field(..., description="Catalog name of the property")
    formula: str = Field(..., description="Formula text as checked")
    passed: bool
    first_violation: Optional[int] = Field(None, description="Cycle of the first violation, for failures")
    vacuous: bool = Field(False, description="The trace was empty")

    @property
    def status(self) -> str:
        if self.vacuous:
            return "VACUOUS"
        return "PASS" if self.passed else "FAIL"

    def line(self, width: int) -> str:
        text = f"{self.name:<{width}}  {self.status}"
        if not self.passed and self.first_violation is not None:
            text += f"  first violation at cycle {self.first_violation}"
        return text


class CheckReport(BaseModel):
    """All verdicts for one trace."""

    source: str = Field("<trace>", description="Where the trace came from")
    length: int = Field(0, description="Trace length in cycles")
    verdicts: List[FormulaVerdict] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> FormulaVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def failures(self) -> List[FormulaVerdict]:
        return [v for v in self.verdicts if not v.passed]

    def to_text(self) -> str:
        width = max((len(v.name) for v in self.verdicts), default=0)
        lines = [f"trace: {self.source}", f"cycles: {self.length}"]
        lines.extend(v.line(width) for v in self.verdicts)
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def merge(self, other: "CheckReport") -> "CheckReport":
        return CheckReport(source=self.source, length=self.length, verdicts=self.verdicts + other.verdicts)


def write_report(report: CheckReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(report.to_text(), encoding="utf-8")
    return path
