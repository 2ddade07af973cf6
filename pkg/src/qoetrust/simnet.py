"""Deterministic synchronous-round world model.

One world holds ground-truth networks, peers (honest, attacker-controlled,
support), a key registry, a gossip topology, and a single seeded RNG stream.
Determinism is a hard contract: identical config and seed must reproduce
byte-identical metrics.  The RNG draw order per round is therefore fixed and
documented on step_round; nothing may draw outside that order, and code that
iterates peers for behaviour always iterates in pseudonym-id order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import ValidationError
from .evidence import (
    AppContext,
    EvidenceStore,
    NetworkIdentity,
    Pseudonym,
    QoEObservation,
    Recommendation,
)
from .risk import Decision, OutcomeLog, OutcomeRecord, RiskRequest, decide
from .selection import Candidate, select
from .trust import (
    FriendMap,
    MetricParams,
    TrustAssessment,
    aggregate_entries,
    combined_trust,
    direct_trust,
    recommender_trust_from_sums,
)

TASTE_RANGE = 0.2


class VerificationVerdict(str, Enum):
    VERIFIED = "verified"
    SPOOF_REJECTED = "spoof_rejected"

    def __str__(self) -> str:
        return self.value


@dataclass
class KeyBinding:
    """Registry row: which pseudonym a key signs for, and whether it leaked."""

    pseudonym_id: str
    compromised: bool = False


@dataclass(frozen=True)
class QualitySchedule:
    """Two-phase quality: q_build until switch_round, q_betray from it on."""

    q_build: float
    q_betray: float
    switch_round: int


def scheduled_quality(schedule: QualitySchedule, rnd: int) -> float:
    """Quality under a build-then-betray schedule; the switch round betrays."""
    return schedule.q_betray if rnd >= schedule.switch_round else schedule.q_build


@dataclass
class GroundTruthNetwork:
    """A real network: identity, true quality, and what its beacon claims.

    beacon_name starts as the claimed name; an SSID spoof rewrites it.
    """

    identity: NetworkIdentity
    quality: float = 0.5
    schedule: Optional[QualitySchedule] = None
    beacon_name: str = ""

    def __post_init__(self):
        if not self.beacon_name:
            self.beacon_name = self.identity.claimed_name

    def quality_at(self, rnd: int) -> float:
        if self.schedule is not None:
            return scheduled_quality(self.schedule, rnd)
        return self.quality


class PeerRole(str, Enum):
    HONEST = "honest"
    ATTACKER = "attacker"
    SUPPORT = "support"


@dataclass
class PeerState:
    pseudonym: Pseudonym
    role: PeerRole
    store: EvidenceStore
    friends: FriendMap = field(default_factory=FriendMap)
    taste_offset: float = 0.0
    outcome_log: OutcomeLog = field(default_factory=OutcomeLog)


@dataclass
class SimParams:
    """Runtime knobs shared by every peer."""

    metric_params: MetricParams = field(default_factory=MetricParams)
    risk_table: dict = field(default_factory=dict)
    contexts: tuple = (AppContext.BROWSING,)
    lam: float = 0.0
    p_mislead: float = 0.0
    noise_sigma: float = 0.05
    fanout: int = 1
    max_hops: int = 2


@dataclass
class WorldState:
    params: SimParams
    rng: random.Random
    peers: dict = field(default_factory=dict)
    networks: list = field(default_factory=list)
    key_registry: dict = field(default_factory=dict)
    key_of: dict = field(default_factory=dict)
    neighbors: dict = field(default_factory=dict)
    strategies: list = field(default_factory=list)
    round: int = 0
    attacker_pseudonyms: set = field(default_factory=set)
    retired_pseudonyms: set = field(default_factory=set)
    attacker_network_ids: set = field(default_factory=set)
    hosted_ever: int = 0
    destroyed_total: int = 0
    sybil_seq: int = 0
    rejoin_seq: int = 0
    # (claimed_key, recommender) -> verdict; bindings never rebind within a
    # run, so verification outcomes are stable and safe to memoize
    verify_cache: dict = field(default_factory=dict)

    def register(self, pseudonym: Pseudonym) -> None:
        if pseudonym.key_id in self.key_registry:
            raise ValidationError(f"key {pseudonym.key_id!r} already registered")
        self.key_registry[pseudonym.key_id] = KeyBinding(pseudonym.id)
        self.key_of[pseudonym.id] = pseudonym.key_id

    def network_by_id(self, net_id: str) -> GroundTruthNetwork:
        for net in self.networks:
            if net.identity.authentic_id == net_id:
                return net
        raise ValidationError(f"unknown network {net_id!r}")

    def current_context(self) -> AppContext:
        ctxs = self.params.contexts
        return ctxs[self.round % len(ctxs)]

    def active_pseudonym_count(self) -> int:
        return len(self.key_of) - len(self.retired_pseudonyms)

    def honest_ids(self) -> list:
        return sorted(p for p, st in self.peers.items() if st.role is PeerRole.HONEST)


@dataclass
class RoundReport:
    """Everything observable about one completed round."""

    round: int
    context: AppContext
    selections: dict = field(default_factory=dict)
    qoe: dict = field(default_factory=dict)
    best_network: Optional[str] = None
    best_fraction: float = 0.0
    attacker_fraction: float = 0.0
    reputation: dict = field(default_factory=dict)
    reputation_error: dict = field(default_factory=dict)
    misprediction: float = 0.0
    messages: int = 0
    accepted: int = 0
    duplicates: int = 0
    rejected_spoofs: int = 0
    misattributions: int = 0
    attacks: dict = field(default_factory=dict)
    networks: list = field(default_factory=list)

    def bump(self, counter: str, n: int = 1) -> None:
        self.attacks[counter] = self.attacks.get(counter, 0) + n

    def to_record(self) -> dict:
        return {
            "round": self.round,
            "context": self.context.value,
            "selections": {p: self.selections[p] for p in sorted(self.selections)},
            "qoe": {p: self.qoe[p] for p in sorted(self.qoe)},
            "best_network": self.best_network,
            "best_fraction": self.best_fraction,
            "attacker_fraction": self.attacker_fraction,
            "reputation": {n: self.reputation[n] for n in sorted(self.reputation)},
            "reputation_error": {
                n: self.reputation_error[n] for n in sorted(self.reputation_error)
            },
            "misprediction": self.misprediction,
            "messages": self.messages,
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "rejected_spoofs": self.rejected_spoofs,
            "misattributions": self.misattributions,
            "attacks": {k: self.attacks[k] for k in sorted(self.attacks)},
            "networks": self.networks,
        }


# ---------------------------------------------------------------------------
# pure world ops
# ---------------------------------------------------------------------------


def sample_qoe(
    true_quality: float, taste_offset: float, noise_sigma: float, rng: random.Random
) -> float:
    """Experienced quality: truth + taste + symmetric noise, clamped to [0, 1].

    Noise is an Irwin-Hall(12) approximation of a normal with sd noise_sigma:
    pure arithmetic on the uniform stream, so results are bit-identical on
    every platform.  Exactly 12 uniforms are drawn regardless of sigma, which
    keeps the draw schedule independent of parameter values.
    """
    if not (0.0 <= true_quality <= 1.0):
        raise ValidationError(f"true_quality must be in [0, 1], got {true_quality!r}")
    if not (-TASTE_RANGE <= taste_offset <= TASTE_RANGE):
        raise ValidationError(f"taste_offset must be in +-{TASTE_RANGE}, got {taste_offset!r}")
    if not (0.0 <= noise_sigma <= 1.0):
        raise ValidationError(f"noise_sigma must be in [0, 1], got {noise_sigma!r}")
    acc = 0.0
    for _ in range(12):
        acc += rng.random()
    noise = (acc - 6.0) * noise_sigma
    raw = true_quality + taste_offset + noise
    return 0.0 if raw < 0.0 else 1.0 if raw > 1.0 else raw


def attribute_network(
    used: GroundTruthNetwork,
    networks: Sequence[GroundTruthNetwork],
    p_mislead: float,
    rng: random.Random,
) -> str:
    """Which network the user blames for the experience.

    Normally the one actually used.  When the used network's beacon carries
    another network's claimed name, the user confuses the two with
    probability p_mislead and attributes the rating to the imitated network.
    Draws one uniform only when confusion is actually possible.
    """
    if not (0.0 <= p_mislead <= 1.0):
        raise ValidationError(f"p_mislead must be in [0, 1], got {p_mislead!r}")
    used_id = used.identity.authentic_id
    if p_mislead <= 0.0:
        return used_id
    target = None
    for net in sorted(networks, key=lambda n: n.identity.authentic_id):
        if net.identity.authentic_id == used_id:
            continue
        if net.identity.claimed_name == used.beacon_name:
            target = net
            break
    if target is None:
        return used_id
    if rng.random() < p_mislead:
        return target.identity.authentic_id
    return used_id


def verify_message(rec: Recommendation, key_registry: dict) -> VerificationVerdict:
    """Check the claimed key against the registry.

    Verified iff the registry binds the claimed key to the claimed
    recommender.  A compromised key still verifies: key theft is undetectable
    at this layer, which is exactly what makes compromise worth modelling.
    """
    binding = key_registry.get(rec.claimed_key)
    if binding is not None and binding.pseudonym_id == rec.recommender:
        return VerificationVerdict.VERIFIED
    return VerificationVerdict.SPOOF_REJECTED


def gossip(
    peer: PeerState,
    neighbor_ids: Sequence[str],
    fanout_budget: int,
    max_hops: int = 2,
) -> list:
    """Messages one peer pushes this round: (destination, recommendation).

    Own observations go out newest-first up to the fanout budget at hop 0;
    recommendations accepted last round forward once more while their hop
    count is below max_hops.  Drains the pending-relay queue.
    """
    if fanout_budget < 0:
        raise ValidationError(f"fanout budget must be >= 0, got {fanout_budget!r}")
    outgoing: list[Recommendation] = []
    own = peer.store.observations
    for stored in reversed(own[-fanout_budget:] if fanout_budget else []):
        outgoing.append(
            Recommendation(stored.obs, peer.pseudonym.id, peer.pseudonym.key_id, 0)
        )
    for rec in peer.store.pending_relay:
        if rec.hop_count < max_hops:
            outgoing.append(rec.forwarded())
    peer.store.pending_relay = []
    messages = []
    for rec in outgoing:
        for dest in neighbor_ids:
            if dest != rec.recommender:
                messages.append((dest, rec))
    return messages


def support_peer_serve(
    peer: PeerState,
    network: Optional[str] = None,
    context: Optional[AppContext] = None,
    since_round: Optional[int] = None,
) -> list:
    """Recommendations a support peer hands out for a query.

    Everything hosted that matches the filters, minus whatever an evidence
    denial attack already destroyed (destroyed records are simply gone).
    """
    return [sr.rec for sr in peer.store.received_for(network, context, since_round)]


# ---------------------------------------------------------------------------
# the round loop
# ---------------------------------------------------------------------------


def deliver(world: WorldState, dest: str, rec: Recommendation, report: RoundReport) -> str:
    """Verify and ingest one message into one peer's store, with counting."""
    receiver = world.peers.get(dest)
    if receiver is None or receiver.role is PeerRole.ATTACKER:
        return "dropped"
    if rec.recommender == receiver.pseudonym.id:
        return "dropped"
    report.messages += 1
    cache_key = (rec.claimed_key, rec.recommender)
    verdict = world.verify_cache.get(cache_key)
    if verdict is None:
        verdict = verify_message(rec, world.key_registry)
        if rec.claimed_key in world.key_registry:
            world.verify_cache[cache_key] = verdict
    status = receiver.store.ingest(
        rec, verdict is VerificationVerdict.VERIFIED, now=world.round
    )
    if status == "accepted":
        report.accepted += 1
        if receiver.role is PeerRole.SUPPORT:
            world.hosted_ever += 1
    elif status == "rejected":
        report.rejected_spoofs += 1
    else:
        report.duplicates += 1
    return status


def _assess_network(
    peer: PeerState, net_id: str, context: AppContext, world: WorldState, trust_cache: dict
) -> tuple[TrustAssessment, TrustAssessment, float]:
    """(direct, reputation, combined) for one peer looking at one network."""
    params = world.params.metric_params
    h = params.half_life
    now = world.round
    direct = direct_trust(peer.store.query_observations(net_id, context, now, h))
    groups = peer.store.reputation_groups(net_id, context, now, h)
    for recommender, _w, _wr in groups:
        if recommender not in trust_cache:
            acc, tot = peer.store.accuracy_sums(recommender, now, h)
            trust_cache[recommender] = recommender_trust_from_sums(acc, tot, params)
    reputation = aggregate_entries(groups, trust_cache, peer.friends, params)
    return direct, reputation, combined_trust(direct, reputation)


def step_round(world: WorldState) -> RoundReport:
    """Advance the world one synchronous round.

    Fixed order, which is also the complete RNG draw order:

      1. attack round-start hooks, in config order (evidence denial draws
         one uniform per hosted record it considers);
      2. honest peers in pseudonym-id order: assess every network for the
         round's context, apply the risk policy, select, then if anything
         was selected draw 12 uniforms for QoE noise and at most one for
         misattribution, record the observation and the outcome;
      3. gossip: honest and support peers push (id order), then attack
         strategies emit (config order); every delivery verifies and
         ingests immediately, no draws;
      4. support sync: honest peers pull this round's fresh arrivals from
         neighbouring support peers (id order, no draws);
      5. metrics snapshot.

    Everything the round did lands in the returned RoundReport.
    """
    params = world.params
    context = world.current_context()
    report = RoundReport(round=world.round, context=context)

    for strategy in world.strategies:
        strategy.on_round_start(world, report)

    honest = world.honest_ids()
    rep_by_net: dict = {net.identity.authentic_id: [] for net in world.networks}
    discrepancies: list = []
    for pid in honest:
        peer = world.peers[pid]
        trust_cache: dict = {}
        candidates = []
        by_id = {}
        for net in world.networks:
            net_id = net.identity.authentic_id
            _direct, reputation, combined = _assess_network(
                peer, net_id, context, world, trust_cache
            )
            rep_by_net[net_id].append(reputation.value)
            decision = decide(RiskRequest(net_id, context, combined), params.risk_table)
            cand = Candidate(net.identity, combined, decision)
            candidates.append(cand)
            by_id[net_id] = cand
        chosen = select(candidates, params.lam)
        report.selections[pid] = chosen
        if chosen is None:
            report.qoe[pid] = None
            continue
        net = world.network_by_id(chosen)
        rating = sample_qoe(
            net.quality_at(world.round), peer.taste_offset, params.noise_sigma, world.rng
        )
        attributed = attribute_network(net, world.networks, params.p_mislead, world.rng)
        if attributed != chosen:
            report.misattributions += 1
        obs = QoEObservation(pid, attributed, context, rating, world.round)
        peer.store.record_observation(obs)
        outcome = OutcomeRecord(by_id[chosen].trust, rating, context, world.round)
        peer.outcome_log.record(outcome)
        discrepancies.append(outcome.discrepancy)
        report.qoe[pid] = rating

    for pid in sorted(world.peers):
        peer = world.peers[pid]
        if peer.role is PeerRole.ATTACKER:
            continue
        for dest, rec in gossip(peer, world.neighbors.get(pid, ()), params.fanout, params.max_hops):
            deliver(world, dest, rec, report)
    for strategy in world.strategies:
        for dest, rec in strategy.emit(world, report):
            deliver(world, dest, rec, report)

    for pid in honest:
        for sid in world.neighbors.get(pid, ()):
            neighbor = world.peers[sid]
            if neighbor.role is not PeerRole.SUPPORT:
                continue
            for rec in support_peer_serve(neighbor, since_round=world.round):
                deliver(world, pid, rec, report)

    for strategy in world.strategies:
        strategy.on_round_end(world, report)

    _snapshot_metrics(world, report, honest, rep_by_net, discrepancies)
    world.round += 1
    return report


def _snapshot_metrics(
    world: WorldState,
    report: RoundReport,
    honest: list,
    rep_by_net: dict,
    discrepancies: list,
) -> None:
    rnd = world.round
    best = None
    for net in sorted(world.networks, key=lambda n: n.identity.authentic_id):
        q = net.quality_at(rnd)
        if best is None or q > best.quality_at(rnd):
            best = net
    report.best_network = best.identity.authentic_id if best else None
    if honest:
        picks = [report.selections[p] for p in honest]
        if best is not None:
            report.best_fraction = picks.count(report.best_network) / len(honest)
        hits = sum(1 for c in picks if c in world.attacker_network_ids)
        report.attacker_fraction = hits / len(honest)
    for net in world.networks:
        net_id = net.identity.authentic_id
        values = rep_by_net[net_id]
        if values:
            mean_rep = sum(values) / len(values)
            truth = net.quality_at(rnd)
            report.reputation[net_id] = mean_rep
            report.reputation_error[net_id] = sum(abs(v - truth) for v in values) / len(values)
    if discrepancies:
        report.misprediction = sum(discrepancies) / len(discrepancies)
    report.networks = [
        {
            "id": net.identity.authentic_id,
            "claimed_name": net.identity.claimed_name,
            "beacon_name": net.beacon_name,
            "true_quality": net.quality_at(rnd),
            "cost": net.identity.cost,
        }
        for net in sorted(world.networks, key=lambda n: n.identity.authentic_id)
    ]
