"""Pick the best acceptable network, trading trust against cost."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .evidence import NetworkIdentity
from .risk import Decision


@dataclass(frozen=True)
class Candidate:
    """One selectable network with its combined trust and risk decision."""

    network: NetworkIdentity
    trust: float
    decision: Decision


def score(trust: float, cost: float, lam: float) -> float:
    """Linear utility: trust minus lam * cost."""
    if lam < 0:
        raise ValidationError(f"lambda must be >= 0, got {lam!r}")
    return trust - lam * cost


def select(candidates: Sequence[Candidate], lam: float = 0.0) -> Optional[str]:
    """Highest-scoring granted candidate's authentic id, or None.

    Only candidates whose risk decision granted are eligible; exact score
    ties break toward the ascending authentic id, which makes the result
    independent of input order.
    """
    best_id: Optional[str] = None
    best_score = 0.0
    for cand in candidates:
        if not cand.decision.granted:
            continue
        s = score(cand.trust, cand.network.cost, lam)
        if best_id is None or s > best_score or (s == best_score and cand.network.authentic_id < best_id):
            best_id = cand.network.authentic_id
            best_score = s
    return best_id
