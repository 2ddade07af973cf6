"""Reputation-based network selection with an adversarial gossip simulator.

Peers rate the networks they use, share those ratings, weigh each other's
word by demonstrated accuracy, and pick networks through a per-context risk
policy.  A deterministic round-based simulator runs the whole loop under a
configurable attack taxonomy: sybil floods, badmouthing coalitions, spoofed
and compromised identities, evidence denial, SSID imitation, and whitewashing
in both its network and pseudonym forms.
"""

from .evidence import (
    AppContext,
    EvidenceStore,
    NetworkIdentity,
    Pseudonym,
    QoEObservation,
    Recommendation,
    decayed_weight,
)
from .risk import Decision, OutcomeLog, OutcomeRecord, RiskRequest, Verdict, decide, risk_threshold
from .selection import Candidate, select
from .trust import (
    FriendMap,
    MetricParams,
    TrustAssessment,
    aggregate_reputation,
    combined_trust,
    direct_trust,
    recommender_trust,
)

__all__ = [
    "AppContext",
    "Candidate",
    "Decision",
    "EvidenceStore",
    "FriendMap",
    "MetricParams",
    "NetworkIdentity",
    "OutcomeLog",
    "OutcomeRecord",
    "Pseudonym",
    "QoEObservation",
    "Recommendation",
    "RiskRequest",
    "TrustAssessment",
    "Verdict",
    "aggregate_reputation",
    "combined_trust",
    "decayed_weight",
    "decide",
    "direct_trust",
    "recommender_trust",
    "risk_threshold",
    "select",
]

__version__ = "0.1.0"
