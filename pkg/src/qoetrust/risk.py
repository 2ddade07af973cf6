"""Context-sensitive risk policy: trust in, grant/deny out, outcomes logged.

Different applications tolerate different exposure: casual browsing will take
a chance on a mediocre network, banking will not.  The policy is a plain
per-context threshold table; decisions carry their margin so callers can see
how close a call was.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .errors import ConfigError, ValidationError
from .evidence import AppContext

DEFAULT_RISK_TABLE: dict[AppContext, float] = {
    AppContext.BROWSING: 0.3,
    AppContext.GAMING: 0.5,
    AppContext.STREAMING: 0.5,
    AppContext.BANKING: 0.8,
}


class Verdict(str, Enum):
    GRANT = "grant"
    DENY = "deny"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RiskRequest:
    """Ask whether trusting `network` this much is acceptable for `context`."""

    network: str
    context: AppContext
    trust: float


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    threshold_used: float
    margin: float

    @property
    def granted(self) -> bool:
        return self.verdict is Verdict.GRANT


@dataclass(frozen=True)
class OutcomeRecord:
    """What we trusted going in versus what the experience actually was."""

    expected: float
    actual: float
    context: AppContext
    round: int

    @property
    def discrepancy(self) -> float:
        return abs(self.expected - self.actual)


def risk_threshold(context: AppContext, table: Mapping[AppContext, float]) -> float:
    if context not in table:
        raise ConfigError(f"risk table has no threshold for context {context.value!r}")
    return table[context]


def decide(request: RiskRequest, table: Mapping[AppContext, float]) -> Decision:
    """Grant iff trust meets the context threshold (inclusive)."""
    threshold = risk_threshold(request.context, table)
    margin = request.trust - threshold
    verdict = Verdict.GRANT if request.trust >= threshold else Verdict.DENY
    return Decision(verdict, threshold, margin)


@dataclass
class OutcomeLog:
    """Expected-versus-actual history, the feedback loop for the risk module."""

    records: list = field(default_factory=list)

    def record(self, outcome: OutcomeRecord) -> None:
        if not (0.0 <= outcome.expected <= 1.0) or not (0.0 <= outcome.actual <= 1.0):
            raise ValidationError("outcome expected/actual must be in [0, 1]")
        self.records.append(outcome)

    def misprediction_rate(
        self, context: Optional[AppContext] = None, window: Optional[int] = None
    ) -> float:
        """Mean |expected - actual| over the last `window` matching records.

        No matching records gives 0.0 (nothing mispredicted yet).
        """
        matching = [r for r in self.records if context is None or r.context == context]
        if window is not None:
            if window < 1:
                raise ValidationError(f"window must be >= 1, got {window!r}")
            matching = matching[-window:]
        if not matching:
            return 0.0
        return sum(r.discrepancy for r in matching) / len(matching)
