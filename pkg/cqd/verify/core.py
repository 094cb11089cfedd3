"""
Check framework for the quantum cross-checks.

Each check is a strategy registered at a level; the verifier runs levels in
order of cost and collects one result per check.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional
import time
import structlog

from ..models import VerificationSummary

logger = structlog.get_logger(__name__)


class CheckLevel(Enum):
    """Check levels in order of cost."""
    IDENTITY = "identity"
    STATISTICAL = "statistical"


_LEVEL_ORDER = {CheckLevel.IDENTITY: 1, CheckLevel.STATISTICAL: 2}


@dataclass
class CheckResult:
    """Outcome of one check."""
    name: str
    passed: bool
    level: CheckLevel
    errors: List[str] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    duration: float = 0.0

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "level": self.level.value,
            "errors": list(self.errors),
            "metadata": dict(self.metadata),
        }


@dataclass
class VerificationReport:
    passed: bool
    results: List[CheckResult]
    max_level: CheckLevel
    metadata: Dict[str, Any] = field(default_factory=dict)

    def failed(self) -> List[CheckResult]:
        return [result for result in self.results if not result.passed]

    def summary(self) -> VerificationSummary:
        return VerificationSummary(passed=self.passed,
                                   checks=[result.as_dict() for result in self.results])


class CheckStrategy(ABC):
    """Abstract base class for all checks."""

    @property
    def name(self) -> str:
        return self.__class__.__name__

    @abstractmethod
    def check(self, context: Dict[str, Any]) -> CheckResult:
        """Run the check and return its result."""


class Verifier:
    """Runs registered checks level by level."""

    def __init__(self):
        self.strategies: Dict[CheckLevel, List[CheckStrategy]] = {level: [] for level in CheckLevel}
        self.history: List[VerificationReport] = []

    def register_strategy(self, level: CheckLevel, strategy: CheckStrategy):
        self.strategies[level].append(strategy)
        logger.info("Registered check", level=level.value, check=strategy.name)

    def run(self, context: Optional[Dict[str, Any]] = None,
            max_level: CheckLevel = CheckLevel.STATISTICAL) -> VerificationReport:
        """Run every check up to ``max_level``; a raising check counts as failed."""
        from ..metrics import metrics_collector

        context = dict(context or {})
        start_time = time.time()
        results: List[CheckResult] = []

        for level in sorted(CheckLevel, key=_LEVEL_ORDER.get):
            if _LEVEL_ORDER[level] > _LEVEL_ORDER[max_level]:
                break
            for strategy in self.strategies[level]:
                check_start = time.time()
                try:
                    result = strategy.check(context)
                except Exception as e:
                    result = CheckResult(name=strategy.name, passed=False, level=level,
                                         errors=[f"Check error in {strategy.name}: {e}"])
                    logger.error("Check failed with exception", check=strategy.name, error=str(e))
                result.duration = time.time() - check_start
                metrics_collector.record_check(strategy.name, result.passed, result.duration)
                logger.debug("Check completed", check=strategy.name, level=level.value,
                             passed=result.passed, duration=result.duration)
                results.append(result)

        report = VerificationReport(
            passed=all(result.passed for result in results),
            results=results,
            max_level=max_level,
            metadata={"timestamp": datetime.now().isoformat(),
                      "duration": time.time() - start_time},
        )
        self.history.append(report)
        logger.info("Verification finished", checks=len(results), passed=report.passed,
                    failed=[result.name for result in report.failed()])
        return report

    def get_stats(self) -> Dict[str, Any]:
        if not self.history:
            return {"total_runs": 0}
        total = len(self.history)
        return {
            "total_runs": total,
            "pass_rate": sum(1 for report in self.history if report.passed) / total,
            "recent": self.history[-10:],
        }
