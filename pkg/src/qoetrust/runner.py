"""Build a world from a config and drive it to completion."""

from __future__ import annotations

import random
from typing import Optional

from .attacks import build_strategy
from .evidence import EvidenceStore, NetworkIdentity, Pseudonym
from .metrics import MetricsSeries, build_summary
from .risk import OutcomeLog
from .scenario import ScenarioConfig
from .simnet import (
    GroundTruthNetwork,
    PeerRole,
    PeerState,
    QualitySchedule,
    SimParams,
    WorldState,
    step_round,
)
from .trust import FriendMap


def build_world(config: ScenarioConfig, seed_override: Optional[int] = None) -> WorldState:
    """Materialize peers, networks, registry, topology, and attack strategies.

    The single RNG is seeded here; taste offsets are drawn one per peer in
    pseudonym-id order (attackers, honest, support) before any round runs.
    Strategy setup follows config order and draws nothing.
    """
    seed = config.seed if seed_override is None else seed_override
    rng = random.Random(seed)
    params = SimParams(
        metric_params=config.metric_params,
        risk_table=config.risk_dict(),
        contexts=config.contexts,
        lam=config.lam,
        p_mislead=config.p_mislead,
        noise_sigma=config.noise_sigma,
        fanout=config.fanout,
        max_hops=config.max_hops,
    )
    world = WorldState(params=params, rng=rng)

    for spec in config.networks:
        identity = NetworkIdentity(spec.id, spec.claimed_name, spec.provider_id, spec.cost)
        schedule = None
        if spec.schedule is not None:
            schedule = QualitySchedule(
                spec.schedule["q_build"], spec.schedule["q_betray"], spec.schedule["switch_round"]
            )
        world.networks.append(
            GroundTruthNetwork(identity, spec.true_quality, schedule)
        )

    roles = (
        [(f"a-{i:03d}", PeerRole.ATTACKER) for i in range(config.peers.attacker)]
        + [(f"h-{i:03d}", PeerRole.HONEST) for i in range(config.peers.honest)]
        + [(f"s-{i:03d}", PeerRole.SUPPORT) for i in range(config.peers.support)]
    )
    taste_sigma = config.peers.taste_sigma
    for pid, role in roles:
        pseudonym = Pseudonym(pid, f"key-{pid}")
        world.register(pseudonym)
        taste = (world.rng.random() * 2.0 - 1.0) * taste_sigma
        world.peers[pid] = PeerState(
            pseudonym=pseudonym,
            role=role,
            store=EvidenceStore(owner=pid, capacity=config.store_capacity),
            friends=FriendMap(),
            taste_offset=taste,
            outcome_log=OutcomeLog(),
        )

    _wire_topology(world, config)
    _wire_friends(world, config)

    for spec in config.attacks:
        strategy = build_strategy(spec)
        strategy.setup(world)
        world.strategies.append(strategy)
    return world


def _wire_topology(world: WorldState, config: ScenarioConfig) -> None:
    ids = sorted(world.peers)
    if config.topology == "complete":
        for pid in ids:
            world.neighbors[pid] = tuple(q for q in ids if q != pid)
    elif config.topology == "ring":
        n = len(ids)
        for i, pid in enumerate(ids):
            if n <= 1:
                world.neighbors[pid] = ()
            elif n == 2:
                world.neighbors[pid] = (ids[1 - i],)
            else:
                world.neighbors[pid] = tuple(sorted({ids[(i - 1) % n], ids[(i + 1) % n]}))
    else:
        adjacency: dict = {pid: set() for pid in ids}
        for a, b in config.topology:
            adjacency[a].add(b)
            adjacency[b].add(a)
        for pid in ids:
            world.neighbors[pid] = tuple(sorted(adjacency[pid]))


def _wire_friends(world: WorldState, config: ScenarioConfig) -> None:
    if config.friends is None:
        return
    if config.friends == "honest_clique":
        honest = world.honest_ids()
        for pid in honest:
            world.peers[pid].friends = FriendMap(
                {fid: 1.0 for fid in honest if fid != pid}
            )
        return
    for pid, entries in config.friends:
        world.peers[pid].friends = FriendMap({fid: w for fid, w in entries})


def run(config: ScenarioConfig, seed_override: Optional[int] = None) -> MetricsSeries:
    """Execute the scenario and return its full metrics series."""
    world = build_world(config, seed_override)
    reports = []
    for _ in range(config.rounds):
        reports.append(step_round(world))
    discrepancies = []
    for pid in world.honest_ids():
        for record in world.peers[pid].outcome_log.records:
            discrepancies.append(record.discrepancy)
    summary = build_summary(
        reports, world.hosted_ever, world.destroyed_total, discrepancies
    )
    return MetricsSeries(
        per_round=[r.to_record() for r in reports],
        summary=summary,
    )


def sweep(config: ScenarioConfig, seeds) -> list:
    """Run the same scenario across seeds; (seed, summary) per run."""
    return [(seed, run(config, seed_override=seed).summary) for seed in seeds]
