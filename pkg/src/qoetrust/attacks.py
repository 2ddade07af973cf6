"""Adversary playbook: every attack the engine is expected to survive.

Each attack is a strategy object hooked into the round loop.  Strategies may
reshape the world at setup (spawn sybil identities, leak a key, rewrite a
beacon, schedule a betrayal), act at round start (destroy hosted evidence),
and emit forged or colluding recommendations during the gossip phase.  They
bump named counters on the round report so every attack is visible in the
metrics stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, ValidationError
from .evidence import AppContext, Pseudonym, QoEObservation, Recommendation
from .simnet import (
    PeerRole,
    QualitySchedule,
    RoundReport,
    WorldState,
    scheduled_quality,
)


@dataclass(frozen=True)
class AttackSpec:
    """One configured attack: a kind plus its parameters."""

    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Coalition:
    """A set of colluding pseudonyms pushing one network's standing one way."""

    members: tuple
    target: str
    direction: str  # "promote" | "demote"


ATTACK_KINDS = (
    "sybil_flood",
    "badmouth_collusion",
    "spoof",
    "compromise",
    "evidence_denial",
    "ssid_spoof",
    "whitewash_network",
    "whitewash_rejoin",
)


# ---------------------------------------------------------------------------
# primitive operations
# ---------------------------------------------------------------------------


def spawn_sybils(world: WorldState, count: int, controller: str) -> list:
    """Mint `count` fresh registered pseudonyms under one controller.

    Sybils are identities, not peers: they take no actions of their own and
    draw nothing from the RNG, so spawning them never perturbs honest draws.
    """
    if count < 0:
        raise ValidationError(f"sybil count must be >= 0, got {count!r}")
    out = []
    for _ in range(count):
        pid = f"syb-{controller}-{world.sybil_seq:05d}"
        world.sybil_seq += 1
        pseudonym = Pseudonym(pid, f"key-{pid}")
        world.register(pseudonym)
        world.attacker_pseudonyms.add(pid)
        out.append(pseudonym)
    return out


def emit_false_recs(
    sybils: list,
    target: str,
    rating: float,
    rnd: int,
    context: AppContext,
    hop_count: int = 0,
) -> list:
    """One forged recommendation per sybil, all claiming the same rating."""
    if not (0.0 <= rating <= 1.0):
        raise ValidationError(f"rating must be in [0, 1], got {rating!r}")
    out = []
    for pseudonym in sybils:
        payload = QoEObservation(pseudonym.id, target, context, rating, rnd)
        out.append(Recommendation(payload, pseudonym.id, pseudonym.key_id, hop_count))
    return out


def spoof_as(
    victim_id: str, target: str, rating: float, rnd: int, context: AppContext,
    hop_count: int = 0,
) -> Recommendation:
    """Forge a rec in a victim's name without their key.

    The claimed key is fabricated, so verification must reject it; the attack
    only tests that the door is actually locked.
    """
    payload = QoEObservation(victim_id, target, context, rating, rnd)
    return Recommendation(payload, victim_id, f"forged-{victim_id}", hop_count)


def compromise(world: WorldState, victim_id: str) -> str:
    """Mark a victim's registered key as leaked and return the key id.

    The registry binding is unchanged: messages signed with the stolen key
    still verify, which is the whole point of the attack.
    """
    key_id = world.key_of.get(victim_id)
    if key_id is None:
        raise ValidationError(f"cannot compromise unknown pseudonym {victim_id!r}")
    world.key_registry[key_id].compromised = True
    return key_id


def deny_evidence(world: WorldState, support_id: str, fraction: float) -> int:
    """Destroy each rec hosted by one support peer with probability fraction.

    Draws one uniform per hosted record in arrival order; a zero fraction
    short-circuits and draws nothing.  Returns how many records died.
    """
    if not (0.0 <= fraction <= 1.0):
        raise ValidationError(f"fraction must be in [0, 1], got {fraction!r}")
    peer = world.peers.get(support_id)
    if peer is None or peer.role is not PeerRole.SUPPORT:
        raise ValidationError(f"{support_id!r} is not a support peer")
    if fraction <= 0.0:
        return 0
    doomed = [sr for sr in list(peer.store.received) if world.rng.random() < fraction]
    for sr in doomed:
        peer.store.remove_received(sr)
    world.destroyed_total += len(doomed)
    return len(doomed)


def ssid_spoof(world: WorldState, bad_id: str, imitated_name: str) -> None:
    """Point a network's beacon at another network's claimed name."""
    bad = world.network_by_id(bad_id)
    others = [
        n for n in world.networks
        if n.identity.authentic_id != bad_id and n.identity.claimed_name == imitated_name
    ]
    if not others:
        raise ConfigError(f"no other network claims the name {imitated_name!r}")
    bad.beacon_name = imitated_name


def whitewash_schedule(q_build: float, q_betray: float, switch_round: int, rnd: int) -> float:
    """Quality of a build-then-betray network at a given round."""
    return scheduled_quality(QualitySchedule(q_build, q_betray, switch_round), rnd)


def rejoin_fresh(world: WorldState, peer_id: str) -> Pseudonym:
    """Shed a pseudonym: retire the old identity, rejoin under a clean one.

    The peer keeps existing but loses everything tied to the old name: store,
    outcome log, and (from everyone else's point of view) all earned
    standing.  Registry count of active pseudonyms is unchanged net: one
    retired, one registered.
    """
    peer = world.peers.get(peer_id)
    if peer is None:
        raise ValidationError(f"unknown peer {peer_id!r}")
    if peer.role is not PeerRole.ATTACKER:
        raise ValidationError(f"only attacker peers rejoin; {peer_id!r} is {peer.role.value}")
    old = peer.pseudonym
    fresh_id = f"anon-{world.rejoin_seq:03d}"
    world.rejoin_seq += 1
    fresh = Pseudonym(fresh_id, f"key-{fresh_id}")
    world.register(fresh)
    world.retired_pseudonyms.add(old.id)
    world.attacker_pseudonyms.discard(old.id)
    world.attacker_pseudonyms.add(fresh_id)
    del world.peers[peer_id]
    peer.pseudonym = fresh
    peer.store = type(peer.store)(owner=fresh_id, capacity=peer.store.capacity)
    peer.outcome_log = type(peer.outcome_log)()
    world.peers[fresh_id] = peer
    world.neighbors[fresh_id] = world.neighbors.pop(peer_id, ())
    for pid, neigh in world.neighbors.items():
        if peer_id in neigh:
            world.neighbors[pid] = tuple(
                sorted(fresh_id if n == peer_id else n for n in neigh)
            )
    return fresh


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


class AttackStrategy:
    """Base hooks; concrete attacks override what they need."""

    kind = "none"

    def __init__(self, spec: AttackSpec):
        self.spec = spec

    def setup(self, world: WorldState) -> None:
        pass

    def on_round_start(self, world: WorldState, report: RoundReport) -> None:
        pass

    def emit(self, world: WorldState, report: RoundReport) -> list:
        return []

    def on_round_end(self, world: WorldState, report: RoundReport) -> None:
        pass

    # -- shared helpers ----------------------------------------------------

    @staticmethod
    def _audience(world: WorldState) -> list:
        """Delivery targets: every non-attacker peer, in id order."""
        return sorted(
            pid for pid, st in world.peers.items() if st.role is not PeerRole.ATTACKER
        )

    @staticmethod
    def _broadcast(world: WorldState, recs: list) -> list:
        out = []
        for rec in recs:
            for dest in AttackStrategy._audience(world):
                out.append((dest, rec))
        return out


class SybilFloodStrategy(AttackStrategy):
    """Spawn a crowd of pseudonyms that all praise one network every round."""

    kind = "sybil_flood"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.count = p["count"]
        self.target = p["target"]
        self.rating = p.get("rating", 1.0)
        self.start_round = p.get("start_round", 0)
        self.controller = p.get("controller", "c0")
        self.sybils: list = []

    def setup(self, world: WorldState) -> None:
        self.sybils = spawn_sybils(world, self.count, self.controller)
        world.attacker_network_ids.add(self.target)

    def emit(self, world: WorldState, report: RoundReport) -> list:
        if world.round < self.start_round:
            return []
        recs = emit_false_recs(
            self.sybils, self.target, self.rating, world.round,
            world.current_context(), hop_count=world.params.max_hops,
        )
        deliveries = self._broadcast(world, recs)
        report.bump("sybil_recs", len(deliveries))
        return deliveries


class BadmouthCollusionStrategy(AttackStrategy):
    """A coalition floods false low ratings to bury a competitor."""

    kind = "badmouth_collusion"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.count = p["count"]
        self.target = p["target"]
        self.rating = p.get("rating", 0.0)
        self.start_round = p.get("start_round", 0)
        self.controller = p.get("controller", "b0")
        self.coalition: Optional[Coalition] = None
        self.sybils: list = []

    def setup(self, world: WorldState) -> None:
        self.sybils = spawn_sybils(world, self.count, self.controller)
        self.coalition = Coalition(
            tuple(s.id for s in self.sybils), self.target, "demote"
        )

    def emit(self, world: WorldState, report: RoundReport) -> list:
        if world.round < self.start_round:
            return []
        recs = emit_false_recs(
            self.sybils, self.target, self.rating, world.round,
            world.current_context(), hop_count=world.params.max_hops,
        )
        deliveries = self._broadcast(world, recs)
        report.bump("badmouth_recs", len(deliveries))
        return deliveries


class SpoofStrategy(AttackStrategy):
    """Forge recs in honest peers' names with made-up keys."""

    kind = "spoof"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.count = p["count"]
        self.target = p["target"]
        self.rating = p.get("rating", 1.0)
        self.start_round = p.get("start_round", 0)
        self.victims: list = p.get("victims", [])

    def setup(self, world: WorldState) -> None:
        if not self.victims:
            self.victims = world.honest_ids()
        world.attacker_network_ids.add(self.target)

    def emit(self, world: WorldState, report: RoundReport) -> list:
        if world.round < self.start_round or not self.victims:
            return []
        ctx = world.current_context()
        recs = []
        for i in range(self.count):
            victim = self.victims[i % len(self.victims)]
            recs.append(
                spoof_as(victim, self.target, self.rating, world.round, ctx,
                         hop_count=world.params.max_hops)
            )
        deliveries = []
        for rec in recs:
            for dest in self._audience(world):
                if dest != rec.recommender:
                    deliveries.append((dest, rec))
        report.bump("spoof_recs", len(deliveries))
        return deliveries


class CompromiseStrategy(AttackStrategy):
    """Steal a real key and spend the victim's good name on false praise."""

    kind = "compromise"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.victims = list(p.get("victims", []))
        self.target = p["target"]
        self.rating = p.get("rating", 1.0)
        self.at_round = p.get("at_round", 0)
        self._armed = False

    def setup(self, world: WorldState) -> None:
        if not self.victims:
            honest = world.honest_ids()
            if not honest:
                raise ConfigError("compromise attack needs at least one honest peer")
            self.victims = [honest[0]]
        world.attacker_network_ids.add(self.target)

    def on_round_start(self, world: WorldState, report: RoundReport) -> None:
        if not self._armed and world.round >= self.at_round:
            for victim in self.victims:
                compromise(world, victim)
            self._armed = True

    def emit(self, world: WorldState, report: RoundReport) -> list:
        if not self._armed:
            return []
        ctx = world.current_context()
        recs = []
        for victim in self.victims:
            key_id = world.key_of[victim]
            payload = QoEObservation(victim, self.target, ctx, self.rating, world.round)
            recs.append(Recommendation(payload, victim, key_id, world.params.max_hops))
        deliveries = []
        for rec in recs:
            for dest in self._audience(world):
                if dest != rec.recommender:
                    deliveries.append((dest, rec))
        report.bump("compromise_recs", len(deliveries))
        return deliveries


class EvidenceDenialStrategy(AttackStrategy):
    """Destroy evidence hosted on support peers before it can be served."""

    kind = "evidence_denial"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.fraction = p["fraction"]
        self.supports = list(p.get("supports", []))
        self.start_round = p.get("start_round", 0)

    def setup(self, world: WorldState) -> None:
        if not self.supports:
            self.supports = sorted(
                pid for pid, st in world.peers.items() if st.role is PeerRole.SUPPORT
            )
        if not self.supports:
            raise ConfigError("evidence denial needs at least one support peer")

    def on_round_start(self, world: WorldState, report: RoundReport) -> None:
        if world.round < self.start_round:
            return
        destroyed = 0
        for sid in self.supports:
            destroyed += deny_evidence(world, sid, self.fraction)
        report.bump("denied_records", destroyed)


class SsidSpoofStrategy(AttackStrategy):
    """Rewrite one network's beacon to wear another network's name."""

    kind = "ssid_spoof"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.network = p["network"]
        self.imitate = p["imitate"]

    def setup(self, world: WorldState) -> None:
        ssid_spoof(world, self.network, self.imitate)
        world.attacker_network_ids.add(self.network)

    def on_round_end(self, world: WorldState, report: RoundReport) -> None:
        report.bump("ssid_misattributions", report.misattributions)


class WhitewashNetworkStrategy(AttackStrategy):
    """A network earns a good record, then quietly turns bad."""

    kind = "whitewash_network"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.network = p["network"]
        self.q_build = p.get("q_build", 0.9)
        self.q_betray = p.get("q_betray", 0.1)
        self.switch_round = p["switch_round"]

    def setup(self, world: WorldState) -> None:
        net = world.network_by_id(self.network)
        net.schedule = QualitySchedule(self.q_build, self.q_betray, self.switch_round)
        world.attacker_network_ids.add(self.network)

    def on_round_end(self, world: WorldState, report: RoundReport) -> None:
        report.bump("whitewash_betray", int(world.round >= self.switch_round))


class WhitewashRejoinStrategy(AttackStrategy):
    """An attacker peer burns its pseudonym and returns with a clean slate."""

    kind = "whitewash_rejoin"

    def __init__(self, spec: AttackSpec):
        super().__init__(spec)
        p = spec.params
        self.peer = p.get("peer")
        self.target = p["target"]
        self.rating = p.get("rating", 1.0)
        self.rejoin_round = p["rejoin_round"]
        self.current_id: Optional[str] = None

    def setup(self, world: WorldState) -> None:
        if self.peer is None:
            attackers = sorted(
                pid for pid, st in world.peers.items() if st.role is PeerRole.ATTACKER
            )
            if not attackers:
                raise ConfigError("whitewash_rejoin needs an attacker peer")
            self.peer = attackers[0]
        self.current_id = self.peer
        world.attacker_network_ids.add(self.target)

    def on_round_start(self, world: WorldState, report: RoundReport) -> None:
        if world.round == self.rejoin_round:
            fresh = rejoin_fresh(world, self.current_id)
            self.current_id = fresh.id
            report.bump("rejoin_events", 1)

    def emit(self, world: WorldState, report: RoundReport) -> list:
        peer = world.peers[self.current_id]
        ctx = world.current_context()
        payload = QoEObservation(self.current_id, self.target, ctx, self.rating, world.round)
        rec = Recommendation(
            payload, self.current_id, peer.pseudonym.key_id, world.params.max_hops
        )
        deliveries = self._broadcast(world, [rec])
        report.bump("whitewash_recs", len(deliveries))
        return deliveries


_STRATEGY_CLASSES = {
    cls.kind: cls
    for cls in (
        SybilFloodStrategy,
        BadmouthCollusionStrategy,
        SpoofStrategy,
        CompromiseStrategy,
        EvidenceDenialStrategy,
        SsidSpoofStrategy,
        WhitewashNetworkStrategy,
        WhitewashRejoinStrategy,
    )
}


def build_strategy(spec: AttackSpec) -> AttackStrategy:
    cls = _STRATEGY_CLASSES.get(spec.kind)
    if cls is None:
        raise ConfigError(f"unknown attack kind {spec.kind!r}")
    return cls(spec)
