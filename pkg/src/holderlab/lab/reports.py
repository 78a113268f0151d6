"""Pass/fail summaries returned by the checks."""
from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of one numerical check.

    ``passed`` is true exactly when ``max_residual <= threshold``.  Extra
    per-check quantities go in ``details`` and per-sample rows in ``rows``.
    """

    name: str
    samples: int
    max_residual: float
    threshold: float
    details: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.threshold)

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.name}: max_residual={self.max_residual:.6g} "
                f"threshold={self.threshold:.6g} samples={self.samples}")
