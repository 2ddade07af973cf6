"""Beta-reputation trust metric with decay, newcomer pricing, and a sybil cap.

All trust values live in [0, 1] with 0.5 meaning "no information".  Direct
trust uses a Laplace-smoothed beta estimate over decayed first-hand evidence;
recommender trust prices newcomers below neutral so a fresh pseudonym cannot
out-vote established ones; aggregation caps the total weight any non-friend
crowd can carry, which is what blunts sybil floods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ValidationError

DEFAULT_HALF_LIFE = 20
DEFAULT_REC_PRIOR_POS = 1.0
DEFAULT_REC_PRIOR_NEG = 3.0
DEFAULT_SYBIL_CAP = 5.0
DEFAULT_CONFIDENCE_FLOOR = 0.2


@dataclass(frozen=True)
class TrustAssessment:
    """A trust estimate plus how much evidence backs it."""

    value: float
    confidence: float


@dataclass(frozen=True)
class MetricParams:
    half_life: int = DEFAULT_HALF_LIFE
    rec_prior_pos: float = DEFAULT_REC_PRIOR_POS
    rec_prior_neg: float = DEFAULT_REC_PRIOR_NEG
    sybil_cap: float = DEFAULT_SYBIL_CAP
    # Reserved floor for combination weighting; carried and validated but the
    # combination rule below does not consult it.
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR

    def validate(self) -> None:
        if self.half_life < 1:
            raise ValidationError(f"half_life must be >= 1, got {self.half_life!r}")
        if self.rec_prior_pos < 0 or self.rec_prior_neg < 0:
            raise ValidationError("recommender priors must be non-negative")
        if self.rec_prior_pos + self.rec_prior_neg <= 0:
            raise ValidationError("recommender priors must not both be zero")
        if self.sybil_cap <= 0:
            raise ValidationError(f"sybil_cap must be > 0, got {self.sybil_cap!r}")
        if not (0.0 <= self.confidence_floor <= 1.0):
            raise ValidationError("confidence_floor must be in [0, 1]")


@dataclass
class FriendMap:
    """Out-of-band trusted peers, weighted in (0, 1].  Friends bypass the cap."""

    weights: dict = field(default_factory=dict)

    def validate(self) -> None:
        for pid, w in self.weights.items():
            if not (0.0 < w <= 1.0):
                raise ValidationError(f"friend weight for {pid!r} must be in (0, 1], got {w!r}")

    def weight(self, pid: str) -> float:
        return self.weights.get(pid, 0.0)

    def is_friend(self, pid: str) -> bool:
        return pid in self.weights


def direct_trust(weighted_obs: Iterable[tuple[float, float]]) -> TrustAssessment:
    """Trust from first-hand evidence: (rating, weight) pairs.

    alpha = sum(w * r), beta = sum(w * (1 - r));
    value = (alpha + 1) / (alpha + beta + 2), confidence = n / (n + 2)
    where n is the total weight.  No evidence gives (0.5, 0.0).
    """
    pos, tot = [], []
    for rating, weight in weighted_obs:
        if not (0.0 <= rating <= 1.0):
            raise ValidationError(f"rating must be in [0, 1], got {rating!r}")
        if not (0.0 < weight <= 1.0):
            raise ValidationError(f"weight must be in (0, 1], got {weight!r}")
        pos.append(weight * rating)
        tot.append(weight)
    alpha = math.fsum(pos)
    n = math.fsum(tot)
    value = (alpha + 1.0) / (n + 2.0)
    confidence = n / (n + 2.0)
    return TrustAssessment(_clamp01(value), confidence)


def recommender_trust(
    pairs: Iterable[tuple[float, float, float]], params: MetricParams
) -> TrustAssessment:
    """Trust in someone's recommendations from (their rating, own rating, weight).

    Accuracy of one pair is 1 - |rec - own|.  The configured prior prices
    newcomers: with no history the value is a0 / (a0 + b0), below neutral by
    default, so shedding a pseudonym means re-earning standing.
    """
    acc, tot = [], []
    for rec_rating, own_rating, weight in pairs:
        if not (0.0 <= rec_rating <= 1.0) or not (0.0 <= own_rating <= 1.0):
            raise ValidationError("pair ratings must be in [0, 1]")
        if not (0.0 < weight <= 1.0):
            raise ValidationError(f"weight must be in (0, 1], got {weight!r}")
        acc.append(weight * (1.0 - abs(rec_rating - own_rating)))
        tot.append(weight)
    return recommender_trust_from_sums(math.fsum(acc), math.fsum(tot), params)


def recommender_trust_from_sums(
    accuracy_sum: float, weight_sum: float, params: MetricParams
) -> TrustAssessment:
    """Same estimate, fed from precomputed decayed sums."""
    a0, b0 = params.rec_prior_pos, params.rec_prior_neg
    denom = weight_sum + a0 + b0
    value = (accuracy_sum + a0) / denom
    confidence = weight_sum / denom
    return TrustAssessment(_clamp01(value), confidence)


def aggregate_reputation(
    recs: Sequence[tuple[str, float, float]],
    rec_trusts: Mapping[str, TrustAssessment],
    friends: FriendMap,
    params: MetricParams,
) -> TrustAssessment:
    """Reputation from third-party recs: (recommender id, rating, decay weight).

    Each rec carries raw weight decay * max(recommender trust, friend weight).
    Friends are exempt from the cap; everyone else's total raw weight is
    scaled down proportionally so it cannot exceed sybil_cap, no matter how
    many pseudonyms the crowd splits into.  Recommenders missing from
    rec_trusts count as newcomers at the configured prior.
    """
    entries = []
    for recommender, rating, decay in recs:
        if not (0.0 <= rating <= 1.0):
            raise ValidationError(f"rating must be in [0, 1], got {rating!r}")
        if not (0.0 < decay <= 1.0):
            raise ValidationError(f"decay weight must be in (0, 1], got {decay!r}")
        entries.append((recommender, decay, decay * rating))
    return aggregate_entries(entries, rec_trusts, friends, params)


def aggregate_entries(
    entries: Sequence[tuple[str, float, float]],
    rec_trusts: Mapping[str, TrustAssessment],
    friends: FriendMap,
    params: MetricParams,
) -> TrustAssessment:
    """Cap-and-average core over per-recommender (id, weight sum, weighted rating sum).

    Shared by the one-rec-per-entry public form above and the store-backed
    grouped form the simulator uses; both reduce to the same arithmetic.
    """
    prior = recommender_trust_from_sums(0.0, 0.0, params).value
    friend_w, friend_wr = [], []
    other_w, other_wr = [], []
    for recommender, w_sum, wr_sum in entries:
        assessment = rec_trusts.get(recommender)
        trust = assessment.value if assessment is not None else prior
        factor = max(trust, friends.weight(recommender))
        if factor <= 0.0:
            continue
        if friends.is_friend(recommender):
            friend_w.append(factor * w_sum)
            friend_wr.append(factor * wr_sum)
        else:
            other_w.append(factor * w_sum)
            other_wr.append(factor * wr_sum)
    w_f = math.fsum(friend_w)
    w_o = math.fsum(other_w)
    scale = params.sybil_cap / w_o if w_o > params.sybil_cap else 1.0
    total = w_f + w_o * scale
    if total <= 0.0:
        return TrustAssessment(0.5, 0.0)
    value = (math.fsum(friend_wr) + math.fsum(other_wr) * scale) / total
    confidence = total / (total + 2.0)
    return TrustAssessment(_clamp01(value), confidence)


def combined_trust(direct: TrustAssessment, reputation: TrustAssessment) -> float:
    """Blend first-hand and third-party estimates by first-hand confidence.

    With no first-hand evidence the reputation stands alone; as direct
    confidence grows, own experience crowds out hearsay.
    """
    c = direct.confidence
    if c == 0.0:
        return reputation.value
    return c * direct.value + (1.0 - c) * reputation.value


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x
