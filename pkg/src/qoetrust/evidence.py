"""Identities, QoE evidence records, and the per-peer evidence store.

Evidence comes in two shapes: a peer's own first-hand observations and
recommendations received from others.  Both decay with the same exponential
half-life, both count against store capacity, and both survive restarts only
through the store that holds them (there is no global evidence pool: what a
peer has not seen does not exist for it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .errors import ValidationError

DEFAULT_CAPACITY = 100_000

# Wire field order is frozen: serialized recommendations carry exactly these
# keys and nothing else (no relaying-peer identity, ever).
WIRE_FIELDS = (
    "recommender_id",
    "claimed_key",
    "network_id",
    "context",
    "rating",
    "round",
    "hop_count",
)


class AppContext(str, Enum):
    """Application context an observation or decision applies to."""

    BROWSING = "browsing"
    GAMING = "gaming"
    STREAMING = "streaming"
    BANKING = "banking"

    def __str__(self) -> str:  # json-friendly
        return self.value


@dataclass(frozen=True)
class Pseudonym:
    """An unlinkable identity: an opaque id plus the key that signs for it."""

    id: str
    key_id: str


@dataclass(frozen=True)
class NetworkIdentity:
    """A network as the selection layer sees it.

    claimed_name is deliberately not unique: nothing stops one network from
    claiming another's name, which is exactly what an SSID spoof does.
    """

    authentic_id: str
    claimed_name: str
    provider_id: str
    cost: float = 0.0


@dataclass(frozen=True)
class QoEObservation:
    """One first-hand quality rating of a network in a context."""

    observer: str
    network: str
    context: AppContext
    rating: float
    round: int

    def validate(self) -> None:
        try:
            rating_ok = 0.0 <= self.rating <= 1.0
            round_ok = self.round >= 0 and isinstance(self.round, int)
        except TypeError:
            raise ValidationError(
                f"non-numeric rating/round: {self.rating!r}, {self.round!r}"
            ) from None
        if not rating_ok:
            raise ValidationError(f"rating must be in [0, 1], got {self.rating!r}")
        if not round_ok:
            raise ValidationError(f"round must be a non-negative int, got {self.round!r}")


@dataclass(frozen=True)
class Recommendation:
    """A relayed observation: someone else's rating, signed by their key.

    recommender/claimed_key always describe the originator.  Relaying keeps
    both and bumps hop_count only, so the wire form never identifies the
    peer that forwarded it.
    """

    payload: QoEObservation
    recommender: str
    claimed_key: str
    hop_count: int = 0

    def validate(self) -> None:
        self.payload.validate()
        if self.hop_count < 0:
            raise ValidationError(f"hop_count must be >= 0, got {self.hop_count!r}")

    def forwarded(self) -> "Recommendation":
        return Recommendation(self.payload, self.recommender, self.claimed_key, self.hop_count + 1)

    def dedup_key(self) -> tuple:
        p = self.payload
        return (self.recommender, p.network, p.context, p.round, p.rating)

    def to_wire(self) -> dict:
        """Flat dict with exactly WIRE_FIELDS, in order."""
        p = self.payload
        return {
            "recommender_id": self.recommender,
            "claimed_key": self.claimed_key,
            "network_id": p.network,
            "context": p.context.value,
            "rating": p.rating,
            "round": p.round,
            "hop_count": self.hop_count,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "Recommendation":
        extra = set(obj) - set(WIRE_FIELDS)
        missing = set(WIRE_FIELDS) - set(obj)
        if extra or missing:
            raise ValidationError(
                f"bad wire record: extra={sorted(extra)} missing={sorted(missing)}"
            )
        try:
            context = AppContext(obj["context"])
        except ValueError:
            raise ValidationError(f"unknown context {obj['context']!r}") from None
        payload = QoEObservation(
            observer=obj["recommender_id"],
            network=obj["network_id"],
            context=context,
            rating=obj["rating"],
            round=obj["round"],
        )
        rec = cls(payload, obj["recommender_id"], obj["claimed_key"], obj["hop_count"])
        rec.validate()
        return rec


def decayed_weight(age: int, half_life: int) -> float:
    """Weight of evidence `age` rounds old: halves every `half_life` rounds."""
    if age < 0:
        raise ValidationError(f"age must be >= 0, got {age!r}")
    if half_life < 1:
        raise ValidationError(f"half_life must be >= 1, got {half_life!r}")
    return 2.0 ** (-(age / half_life))


class RecOutcome(NamedTuple):
    """A recommendation matched against the owner's own later rating."""

    rec_rating: float
    own_rating: float
    round: int


# ---------------------------------------------------------------------------
# incremental decayed sums
# ---------------------------------------------------------------------------


class DecayedSum:
    """Incrementally maintained sum of value_i * 2^((round_i - base) / H).

    value_at(now) rescales by 2^(-(now - base) / H), so the whole thing is a
    decayed sum anchored wherever convenient.  The anchor is rebased by whole
    multiples of H when rounds run ahead (ldexp scaling by 2^-k is exact, so
    rebasing never changes any result bit).
    """

    __slots__ = ("half_life", "base", "total")

    def __init__(self, half_life: int):
        self.half_life = half_life
        self.base: Optional[int] = None
        self.total = 0.0

    def add(self, rnd: int, amount: float) -> None:
        h = self.half_life
        if self.base is None:
            self.base = rnd
        k = (rnd - self.base) // h
        if k >= 64:
            self.total = math.ldexp(self.total, -k)
            self.base += k * h
        self.total += amount * 2.0 ** ((rnd - self.base) / h)

    def value_at(self, now: int) -> float:
        if self.base is None:
            return 0.0
        return self.total * 2.0 ** (-((now - self.base) / self.half_life))


# ---------------------------------------------------------------------------
# the store
# ---------------------------------------------------------------------------


@dataclass
class StoredObservation:
    seq: int
    obs: QoEObservation


@dataclass
class StoredRecommendation:
    seq: int
    rec: Recommendation
    stored_round: int
    paired: bool = False


class EvidenceStore:
    """Everything one peer knows: own observations, received recs, outcomes.

    Capacity covers observations + received recommendations.  On overflow the
    record with the lowest decayed weight is evicted; weight ordering is the
    same for every half-life (older round == lower weight), so eviction keys
    on (payload round, insertion sequence) and needs no half-life.
    """

    def __init__(self, owner: Optional[str] = None, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValidationError(f"capacity must be >= 1, got {capacity!r}")
        self.owner = owner
        self.capacity = capacity
        self.observations: list[StoredObservation] = []
        self.received: list[StoredRecommendation] = []
        # recommender id -> pairs of (their rating, our later rating)
        self.rec_history: dict[str, list[RecOutcome]] = {}
        self.pending_relay: list[Recommendation] = []
        self.rejected_spoofs = 0
        self.duplicates_ignored = 0
        self.evicted = 0
        self._seq = 0
        self._seen: set = set()
        self._obs_buckets: dict[tuple, list[StoredObservation]] = {}
        # (network, context) -> stored recs not yet matched to an own rating
        self._unpaired: dict[tuple, list[StoredRecommendation]] = {}
        # (network, context) -> recommender -> stored recs
        self._rec_buckets: dict[tuple, dict[str, list[StoredRecommendation]]] = {}
        # (network, context, half_life) -> recommender -> (weight sum, weighted rating sum)
        self._group_cache: dict[tuple, dict[str, tuple[DecayedSum, DecayedSum]]] = {}
        # (recommender, half_life) -> (accuracy sum, pair weight sum)
        self._accuracy_cache: dict[tuple, tuple[DecayedSum, DecayedSum]] = {}

    # -- sizes -------------------------------------------------------------

    def record_count(self) -> int:
        return len(self.observations) + len(self.received)

    # -- own observations --------------------------------------------------

    def record_observation(self, obs: QoEObservation) -> None:
        """Store a first-hand rating and settle any waiting recommendations.

        Every unpaired received rec for the same (network, context) whose
        payload round is not in the future pairs against this rating exactly
        once; the pair feeds recommender accuracy and nothing else.
        """
        obs.validate()
        stored = StoredObservation(self._next_seq(), obs)
        self.observations.append(stored)
        self._obs_buckets.setdefault((obs.network, obs.context), []).append(stored)
        waiting = self._unpaired.get((obs.network, obs.context))
        if waiting:
            still_waiting = []
            for sr in waiting:
                if not sr.paired and sr.rec.payload.round <= obs.round:
                    sr.paired = True
                    self._add_pair(
                        sr.rec.recommender, sr.rec.payload.rating, obs.rating, obs.round
                    )
                elif not sr.paired:
                    still_waiting.append(sr)
            self._unpaired[(obs.network, obs.context)] = still_waiting
        self._enforce_capacity()

    def _add_pair(self, recommender: str, rec_rating: float, own_rating: float, rnd: int) -> None:
        pair = RecOutcome(rec_rating, own_rating, rnd)
        self.rec_history.setdefault(recommender, []).append(pair)
        accuracy = 1.0 - abs(rec_rating - own_rating)
        for (rid, _h), (s_acc, s_tot) in self._accuracy_cache.items():
            if rid == recommender:
                s_acc.add(rnd, accuracy)
                s_tot.add(rnd, 1.0)

    # -- received recommendations -----------------------------------------

    def ingest(self, rec: Recommendation, verified: bool, now: Optional[int] = None) -> str:
        """Accept a recommendation iff its signature verified.

        Returns one of "accepted", "rejected", "duplicate".  Rejections bump
        rejected_spoofs; exact duplicates (same originator, network, context,
        round, rating) and self-echoes are dropped and counted.  `now` is the
        round the rec arrived (defaults to its payload round); it feeds the
        freshness bookkeeping support sync uses, never the decay math.
        """
        if not verified:
            rec.validate()
            self.rejected_spoofs += 1
            return "rejected"
        if rec.recommender == self.owner:
            self.duplicates_ignored += 1
            return "duplicate"
        p = rec.payload
        key = (rec.recommender, p.network, p.context, p.round, p.rating)
        if key in self._seen:
            # a duplicate's first copy already passed validation
            self.duplicates_ignored += 1
            return "duplicate"
        rec.validate()
        self._seen.add(key)
        stored = StoredRecommendation(self._next_seq(), rec, p.round if now is None else now)
        self.received.append(stored)
        self._rec_buckets.setdefault((p.network, p.context), {}).setdefault(
            rec.recommender, []
        ).append(stored)
        self._unpaired.setdefault((p.network, p.context), []).append(stored)
        for (net, ctx, h), groups in self._group_cache.items():
            if net == p.network and ctx == p.context:
                s_w, s_wr = groups.setdefault(rec.recommender, (DecayedSum(h), DecayedSum(h)))
                s_w.add(p.round, 1.0)
                s_wr.add(p.round, p.rating)
        self.pending_relay.append(rec)
        self._enforce_capacity()
        return "accepted"

    # -- queries -----------------------------------------------------------

    def query_observations(
        self, network: str, context: AppContext, now: int, half_life: int
    ) -> list[tuple[float, float]]:
        """Own (rating, decayed weight) pairs for one network and context."""
        out = []
        for stored in self._obs_buckets.get((network, context), ()):
            obs = stored.obs
            w = decayed_weight(now - obs.round, half_life)
            if w > 0.0:
                out.append((obs.rating, w))
        return out

    def reputation_groups(
        self, network: str, context: AppContext, now: int, half_life: int
    ) -> list[tuple[str, float, float]]:
        """Per-recommender (id, decayed weight sum, decayed weighted-rating sum).

        Backed by incrementally maintained sums; one entry per recommender
        with live evidence for this (network, context).
        """
        if half_life < 1:
            raise ValidationError(f"half_life must be >= 1, got {half_life!r}")
        cache_key = (network, context, half_life)
        groups = self._group_cache.get(cache_key)
        if groups is None:
            groups = {}
            for recommender, lst in self._rec_buckets.get((network, context), {}).items():
                s_w, s_wr = DecayedSum(half_life), DecayedSum(half_life)
                for sr in lst:
                    s_w.add(sr.rec.payload.round, 1.0)
                    s_wr.add(sr.rec.payload.round, sr.rec.payload.rating)
                groups[recommender] = (s_w, s_wr)
            self._group_cache[cache_key] = groups
        out = []
        for recommender, (s_w, s_wr) in groups.items():
            w = s_w.value_at(now)
            if w > 0.0:
                out.append((recommender, w, s_wr.value_at(now)))
        return out

    def accuracy_sums(self, recommender: str, now: int, half_life: int) -> tuple[float, float]:
        """(decayed accuracy sum, decayed pair count) for one recommender."""
        cache_key = (recommender, half_life)
        sums = self._accuracy_cache.get(cache_key)
        if sums is None:
            s_acc, s_tot = DecayedSum(half_life), DecayedSum(half_life)
            for pair in self.rec_history.get(recommender, ()):
                s_acc.add(pair.round, 1.0 - abs(pair.rec_rating - pair.own_rating))
                s_tot.add(pair.round, 1.0)
            sums = (s_acc, s_tot)
            self._accuracy_cache[cache_key] = sums
        s_acc, s_tot = sums
        return s_acc.value_at(now), s_tot.value_at(now)

    def received_for(
        self,
        network: Optional[str] = None,
        context: Optional[AppContext] = None,
        since_round: Optional[int] = None,
    ) -> list[StoredRecommendation]:
        """Hosted recommendations, optionally filtered, in arrival order."""
        out = []
        for sr in self.received:
            p = sr.rec.payload
            if network is not None and p.network != network:
                continue
            if context is not None and p.context != context:
                continue
            if since_round is not None and sr.stored_round < since_round:
                continue
            out.append(sr)
        return out

    # -- maintenance -------------------------------------------------------

    def prune(self, now: int, min_weight: float, half_life: int) -> int:
        """Drop every record whose decayed weight fell below min_weight."""
        if not (0.0 < min_weight < 1.0):
            raise ValidationError(f"min_weight must be in (0, 1), got {min_weight!r}")
        if half_life < 1:
            raise ValidationError(f"half_life must be >= 1, got {half_life!r}")
        removed = 0
        for stored in [
            s for s in self.observations
            if decayed_weight(now - s.obs.round, half_life) < min_weight
        ]:
            self._remove_observation(stored)
            removed += 1
        for stored in [
            s for s in self.received
            if decayed_weight(now - s.rec.payload.round, half_life) < min_weight
        ]:
            self._remove_received(stored)
            removed += 1
        return removed

    def remove_received(self, stored: StoredRecommendation) -> None:
        """Destroy one hosted recommendation (evidence denial)."""
        self._remove_received(stored)

    def _remove_observation(self, stored: StoredObservation) -> None:
        self.observations.remove(stored)
        key = (stored.obs.network, stored.obs.context)
        self._obs_buckets[key].remove(stored)

    def _remove_received(self, stored: StoredRecommendation) -> None:
        self.received.remove(stored)
        p = stored.rec.payload
        key = (p.network, p.context)
        self._rec_buckets[key][stored.rec.recommender].remove(stored)
        waiting = self._unpaired.get(key)
        if waiting and stored in waiting:
            waiting.remove(stored)
        for cache_key in [k for k in self._group_cache if k[0] == p.network and k[1] == p.context]:
            del self._group_cache[cache_key]

    def _enforce_capacity(self) -> None:
        while self.record_count() > self.capacity:
            victim_obs = min(self.observations, key=lambda s: (s.obs.round, s.seq), default=None)
            victim_rec = min(self.received, key=lambda s: (s.rec.payload.round, s.seq), default=None)
            if victim_rec is None or (
                victim_obs is not None
                and (victim_obs.obs.round, victim_obs.seq)
                <= (victim_rec.rec.payload.round, victim_rec.seq)
            ):
                self._remove_observation(victim_obs)
            else:
                self._remove_received(victim_rec)
            self.evicted += 1

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq
