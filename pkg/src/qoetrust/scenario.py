"""Scenario configuration: strict JSON in, fully-materialized config out.

Parsing is deliberately unforgiving: unknown keys, wrong types, out-of-range
values, and dangling references all raise ConfigError naming the offending
path.  A parsed config echoes back with every default filled in, and the echo
round-trips: parse(echo(config)) == config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .attacks import ATTACK_KINDS, AttackSpec
from .errors import ConfigError
from .evidence import DEFAULT_CAPACITY, AppContext
from .risk import DEFAULT_RISK_TABLE
from .simnet import TASTE_RANGE
from .trust import MetricParams

MAX_ROUNDS = 100_000

_ATTACK_PARAM_KEYS = {
    "sybil_flood": {"count", "target", "rating", "start_round", "controller"},
    "badmouth_collusion": {"count", "target", "rating", "start_round", "controller"},
    "spoof": {"count", "target", "rating", "start_round", "victims"},
    "compromise": {"victims", "target", "rating", "at_round"},
    "evidence_denial": {"fraction", "supports", "start_round"},
    "ssid_spoof": {"network", "imitate"},
    "whitewash_network": {"network", "q_build", "q_betray", "switch_round"},
    "whitewash_rejoin": {"peer", "target", "rating", "rejoin_round"},
}

_ATTACK_REQUIRED = {
    "sybil_flood": {"count", "target"},
    "badmouth_collusion": {"count", "target"},
    "spoof": {"count", "target"},
    "compromise": {"target"},
    "evidence_denial": {"fraction"},
    "ssid_spoof": {"network", "imitate"},
    "whitewash_network": {"network", "switch_round"},
    "whitewash_rejoin": {"target", "rejoin_round"},
}


@dataclass(frozen=True)
class PeerCounts:
    honest: int = 0
    attacker: int = 0
    support: int = 0
    taste_sigma: float = 0.05


@dataclass(frozen=True)
class NetworkSpec:
    id: str
    claimed_name: str
    provider_id: str
    cost: float = 0.0
    true_quality: float = 0.5
    schedule: Optional[dict] = None  # {"q_build", "q_betray", "switch_round"}


@dataclass(frozen=True)
class ScenarioConfig:
    peers: PeerCounts
    networks: tuple
    rounds: int
    seed: int = 0
    topology: Any = "complete"
    metric_params: MetricParams = field(default_factory=MetricParams)
    risk_table: tuple = ()  # ((context value, threshold), ...) sorted
    lam: float = 0.0
    p_mislead: float = 0.0
    noise_sigma: float = 0.05
    contexts: tuple = (AppContext.BROWSING,)
    fanout: int = 1
    max_hops: int = 2
    store_capacity: int = DEFAULT_CAPACITY
    friends: Any = None  # None | "honest_clique" | ((pid, ((fid, w), ...)), ...)
    attacks: tuple = ()

    def risk_dict(self) -> dict:
        return {AppContext(ctx): thr for ctx, thr in self.risk_table}

    def peer_ids(self) -> list:
        ids = [f"a-{i:03d}" for i in range(self.peers.attacker)]
        ids += [f"h-{i:03d}" for i in range(self.peers.honest)]
        ids += [f"s-{i:03d}" for i in range(self.peers.support)]
        return ids

    def to_json_dict(self) -> dict:
        """The config with every default materialized, JSON-ready."""
        mp = self.metric_params
        out: dict = {
            "peers": {
                "honest": self.peers.honest,
                "attacker": self.peers.attacker,
                "support": self.peers.support,
                "taste_sigma": self.peers.taste_sigma,
            },
            "networks": [],
            "rounds": self.rounds,
            "seed": self.seed,
            "topology": self.topology
            if isinstance(self.topology, str)
            else {"edges": [list(e) for e in self.topology]},
            "metric_params": {
                "half_life": mp.half_life,
                "rec_prior_pos": mp.rec_prior_pos,
                "rec_prior_neg": mp.rec_prior_neg,
                "sybil_cap": mp.sybil_cap,
                "confidence_floor": mp.confidence_floor,
            },
            "risk_table": {ctx: thr for ctx, thr in self.risk_table},
            "lambda": self.lam,
            "p_mislead": self.p_mislead,
            "noise_sigma": self.noise_sigma,
            "contexts": [c.value for c in self.contexts],
            "fanout": self.fanout,
            "max_hops": self.max_hops,
            "store_capacity": self.store_capacity,
            "friends": self._friends_json(),
            "attacks": [
                {"kind": a.kind, **{k: a.params[k] for k in sorted(a.params)}}
                for a in self.attacks
            ],
        }
        for net in self.networks:
            entry: dict = {
                "id": net.id,
                "claimed_name": net.claimed_name,
                "provider_id": net.provider_id,
                "cost": net.cost,
            }
            if net.schedule is not None:
                entry["schedule"] = dict(net.schedule)
            else:
                entry["true_quality"] = net.true_quality
            out["networks"].append(entry)
        return out

    def _friends_json(self) -> Any:
        if self.friends is None:
            return {}
        if isinstance(self.friends, str):
            return self.friends
        return {pid: {fid: w for fid, w in entries} for pid, entries in self.friends}


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario file."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    return parse_config(obj, source=str(path))


def parse_config(obj: Any, source: str = "<config>") -> ScenarioConfig:
    ctx = _Cursor(obj, source)
    ctx.require_mapping()
    ctx.check_keys(
        required={"peers", "networks", "rounds"},
        optional={
            "seed", "topology", "metric_params", "risk_table", "lambda",
            "p_mislead", "noise_sigma", "contexts", "fanout", "max_hops",
            "store_capacity", "friends", "attacks",
        },
    )

    peers = _parse_peers(ctx.child("peers"))
    networks = _parse_networks(ctx.child("networks"))
    rounds = ctx.child("rounds").as_int(0, MAX_ROUNDS)
    seed = ctx.child("seed").as_int(-(2**63), 2**63 - 1) if ctx.has("seed") else 0
    metric_params = _parse_metric_params(ctx.child("metric_params")) if ctx.has(
        "metric_params"
    ) else MetricParams()
    risk_table = _parse_risk_table(ctx.child("risk_table")) if ctx.has("risk_table") else tuple(
        sorted((c.value, t) for c, t in DEFAULT_RISK_TABLE.items())
    )
    lam = ctx.child("lambda").as_float(0.0, 1e9) if ctx.has("lambda") else 0.0
    p_mislead = ctx.child("p_mislead").as_float(0.0, 1.0) if ctx.has("p_mislead") else 0.0
    noise_sigma = ctx.child("noise_sigma").as_float(0.0, 1.0) if ctx.has("noise_sigma") else 0.05
    contexts = _parse_contexts(ctx.child("contexts")) if ctx.has("contexts") else (
        AppContext.BROWSING,
    )
    fanout = ctx.child("fanout").as_int(0, 1000) if ctx.has("fanout") else 1
    max_hops = ctx.child("max_hops").as_int(0, 64) if ctx.has("max_hops") else 2
    store_capacity = ctx.child("store_capacity").as_int(1, 10**9) if ctx.has(
        "store_capacity"
    ) else DEFAULT_CAPACITY

    peer_ids = set(
        [f"a-{i:03d}" for i in range(peers.attacker)]
        + [f"h-{i:03d}" for i in range(peers.honest)]
        + [f"s-{i:03d}" for i in range(peers.support)]
    )
    topology = _parse_topology(ctx.child("topology"), peer_ids) if ctx.has(
        "topology"
    ) else "complete"
    friends = _parse_friends(ctx.child("friends"), peer_ids) if ctx.has("friends") else None
    net_ids = {n.id for n in networks}
    attacks = _parse_attacks(ctx.child("attacks"), net_ids, peer_ids, networks) if ctx.has(
        "attacks"
    ) else ()

    return ScenarioConfig(
        peers=peers,
        networks=networks,
        rounds=rounds,
        seed=seed,
        topology=topology,
        metric_params=metric_params,
        risk_table=risk_table,
        lam=lam,
        p_mislead=p_mislead,
        noise_sigma=noise_sigma,
        contexts=contexts,
        fanout=fanout,
        max_hops=max_hops,
        store_capacity=store_capacity,
        friends=friends,
        attacks=attacks,
    )


# ---------------------------------------------------------------------------
# parsing machinery
# ---------------------------------------------------------------------------


class _Cursor:
    """A value plus the path that led to it, for error messages."""

    def __init__(self, value: Any, path: str):
        self.value = value
        self.path = path

    def fail(self, message: str):
        raise ConfigError(f"{self.path}: {message}")

    def require_mapping(self) -> None:
        if not isinstance(self.value, dict):
            self.fail(f"expected an object, got {type(self.value).__name__}")

    def require_list(self) -> None:
        if not isinstance(self.value, list):
            self.fail(f"expected an array, got {type(self.value).__name__}")

    def check_keys(self, required: set, optional: set) -> None:
        keys = set(self.value)
        unknown = keys - required - optional
        if unknown:
            self.fail(f"unknown key {sorted(unknown)[0]!r}")
        missing = required - keys
        if missing:
            self.fail(f"missing required key {sorted(missing)[0]!r}")

    def has(self, key: str) -> bool:
        return key in self.value

    def child(self, key: str) -> "_Cursor":
        return _Cursor(self.value.get(key), f"{self.path}.{key}")

    def item(self, index: int) -> "_Cursor":
        return _Cursor(self.value[index], f"{self.path}[{index}]")

    def as_int(self, lo: int, hi: int) -> int:
        v = self.value
        if not isinstance(v, int) or isinstance(v, bool):
            self.fail(f"expected an integer, got {v!r}")
        if not (lo <= v <= hi):
            self.fail(f"must be in [{lo}, {hi}], got {v}")
        return v

    def as_float(self, lo: float, hi: float) -> float:
        v = self.value
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {v!r}")
        if not (lo <= v <= hi):
            self.fail(f"must be in [{lo}, {hi}], got {v}")
        return float(v)

    def as_str(self) -> str:
        if not isinstance(self.value, str) or not self.value:
            self.fail(f"expected a non-empty string, got {self.value!r}")
        return self.value


def _parse_peers(cur: _Cursor) -> PeerCounts:
    cur.require_mapping()
    cur.check_keys(required=set(), optional={"honest", "attacker", "support", "taste_sigma"})
    return PeerCounts(
        honest=cur.child("honest").as_int(0, 10**6) if cur.has("honest") else 0,
        attacker=cur.child("attacker").as_int(0, 10**6) if cur.has("attacker") else 0,
        support=cur.child("support").as_int(0, 10**6) if cur.has("support") else 0,
        taste_sigma=cur.child("taste_sigma").as_float(0.0, TASTE_RANGE)
        if cur.has("taste_sigma")
        else 0.05,
    )


def _parse_networks(cur: _Cursor) -> tuple:
    cur.require_list()
    out = []
    seen = set()
    for i in range(len(cur.value)):
        item = cur.item(i)
        item.require_mapping()
        item.check_keys(
            required={"id"},
            optional={"claimed_name", "provider_id", "cost", "true_quality", "schedule"},
        )
        net_id = item.child("id").as_str()
        if net_id in seen:
            item.child("id").fail(f"duplicate network id {net_id!r}")
        seen.add(net_id)
        schedule = None
        true_quality = 0.5
        if item.has("schedule"):
            if item.has("true_quality"):
                item.child("true_quality").fail("give either true_quality or schedule, not both")
            sched = item.child("schedule")
            sched.require_mapping()
            sched.check_keys(required={"q_build", "q_betray", "switch_round"}, optional=set())
            schedule = {
                "q_build": sched.child("q_build").as_float(0.0, 1.0),
                "q_betray": sched.child("q_betray").as_float(0.0, 1.0),
                "switch_round": sched.child("switch_round").as_int(0, MAX_ROUNDS),
            }
        elif item.has("true_quality"):
            true_quality = item.child("true_quality").as_float(0.0, 1.0)
        out.append(
            NetworkSpec(
                id=net_id,
                claimed_name=item.child("claimed_name").as_str()
                if item.has("claimed_name")
                else net_id,
                provider_id=item.child("provider_id").as_str()
                if item.has("provider_id")
                else f"prov-{net_id}",
                cost=item.child("cost").as_float(0.0, 1.0) if item.has("cost") else 0.0,
                true_quality=true_quality,
                schedule=schedule,
            )
        )
    return tuple(out)


def _parse_metric_params(cur: _Cursor) -> MetricParams:
    cur.require_mapping()
    cur.check_keys(
        required=set(),
        optional={"half_life", "rec_prior_pos", "rec_prior_neg", "sybil_cap", "confidence_floor"},
    )
    params = MetricParams(
        half_life=cur.child("half_life").as_int(1, MAX_ROUNDS) if cur.has("half_life") else 20,
        rec_prior_pos=cur.child("rec_prior_pos").as_float(0.0, 1e6)
        if cur.has("rec_prior_pos")
        else 1.0,
        rec_prior_neg=cur.child("rec_prior_neg").as_float(0.0, 1e6)
        if cur.has("rec_prior_neg")
        else 3.0,
        sybil_cap=cur.child("sybil_cap").as_float(1e-9, 1e18) if cur.has("sybil_cap") else 5.0,
        confidence_floor=cur.child("confidence_floor").as_float(0.0, 1.0)
        if cur.has("confidence_floor")
        else 0.2,
    )
    try:
        params.validate()
    except Exception as exc:
        cur.fail(str(exc))
    return params


def _parse_risk_table(cur: _Cursor) -> tuple:
    cur.require_mapping()
    all_contexts = {c.value for c in AppContext}
    cur.check_keys(required=all_contexts, optional=set())
    return tuple(sorted((name, cur.child(name).as_float(0.0, 1.0)) for name in cur.value))


def _parse_contexts(cur: _Cursor) -> tuple:
    cur.require_list()
    if not cur.value:
        cur.fail("needs at least one context")
    out = []
    for i in range(len(cur.value)):
        name = cur.item(i).as_str()
        try:
            out.append(AppContext(name))
        except ValueError:
            cur.item(i).fail(f"unknown context {name!r}")
    return tuple(out)


def _parse_topology(cur: _Cursor, peer_ids: set) -> Any:
    if isinstance(cur.value, str):
        if cur.value not in ("complete", "ring"):
            cur.fail(f"topology must be 'complete', 'ring', or an edge object, got {cur.value!r}")
        return cur.value
    cur.require_mapping()
    cur.check_keys(required={"edges"}, optional=set())
    edges_cur = cur.child("edges")
    edges_cur.require_list()
    edges = []
    for i in range(len(edges_cur.value)):
        item = edges_cur.item(i)
        if (
            not isinstance(item.value, list)
            or len(item.value) != 2
            or not all(isinstance(e, str) for e in item.value)
        ):
            item.fail("each edge must be a [peer_id, peer_id] pair")
        a, b = item.value
        if a == b:
            item.fail("self-edges are not allowed")
        for end in (a, b):
            if end not in peer_ids:
                item.fail(f"unknown peer id {end!r}")
        edges.append((a, b))
    return tuple(edges)


def _parse_friends(cur: _Cursor, peer_ids: set) -> Any:
    if isinstance(cur.value, str):
        if cur.value != "honest_clique":
            cur.fail(f"friends must be a map or 'honest_clique', got {cur.value!r}")
        return cur.value
    cur.require_mapping()
    if not cur.value:
        return None
    out = []
    for pid in cur.value:
        owner = cur.child(pid)
        if pid not in peer_ids:
            owner.fail(f"unknown peer id {pid!r}")
        owner.require_mapping()
        entries = []
        for fid in owner.value:
            if fid not in peer_ids:
                owner.child(fid).fail(f"unknown peer id {fid!r}")
            if fid == pid:
                owner.child(fid).fail("a peer cannot befriend itself")
            entries.append((fid, owner.child(fid).as_float(1e-9, 1.0)))
        out.append((pid, tuple(sorted(entries))))
    return tuple(sorted(out))


def _parse_attacks(cur: _Cursor, net_ids: set, peer_ids: set, networks: tuple) -> tuple:
    cur.require_list()
    out = []
    for i in range(len(cur.value)):
        item = cur.item(i)
        item.require_mapping()
        if "kind" not in item.value:
            item.fail("missing required key 'kind'")
        kind = item.child("kind").as_str()
        if kind not in ATTACK_KINDS:
            item.child("kind").fail(f"unknown attack kind {kind!r}")
        allowed = _ATTACK_PARAM_KEYS[kind] | {"kind"}
        item.check_keys(required=_ATTACK_REQUIRED[kind] | {"kind"}, optional=allowed)
        params = _parse_attack_params(item, kind, net_ids, peer_ids, networks)
        out.append(AttackSpec(kind, params))
    return tuple(out)


def _parse_attack_params(
    item: _Cursor, kind: str, net_ids: set, peer_ids: set, networks: tuple
) -> dict:
    p: dict = {}

    def net_ref(key: str) -> str:
        ref = item.child(key).as_str()
        if ref not in net_ids:
            item.child(key).fail(f"unknown network id {ref!r}")
        return ref

    def peer_ref(key: str) -> str:
        ref = item.child(key).as_str()
        if ref not in peer_ids:
            item.child(key).fail(f"unknown peer id {ref!r}")
        return ref

    if kind in ("sybil_flood", "badmouth_collusion"):
        p["count"] = item.child("count").as_int(0, 10**6)
        p["target"] = net_ref("target")
        if item.has("rating"):
            p["rating"] = item.child("rating").as_float(0.0, 1.0)
        if item.has("start_round"):
            p["start_round"] = item.child("start_round").as_int(0, MAX_ROUNDS)
        if item.has("controller"):
            p["controller"] = item.child("controller").as_str()
    elif kind == "spoof":
        p["count"] = item.child("count").as_int(0, 10**6)
        p["target"] = net_ref("target")
        if item.has("rating"):
            p["rating"] = item.child("rating").as_float(0.0, 1.0)
        if item.has("start_round"):
            p["start_round"] = item.child("start_round").as_int(0, MAX_ROUNDS)
        if item.has("victims"):
            victims = item.child("victims")
            victims.require_list()
            p["victims"] = [peer_ref_at(victims, j, peer_ids) for j in range(len(victims.value))]
    elif kind == "compromise":
        p["target"] = net_ref("target")
        if item.has("victims"):
            victims = item.child("victims")
            victims.require_list()
            p["victims"] = [peer_ref_at(victims, j, peer_ids) for j in range(len(victims.value))]
        if item.has("rating"):
            p["rating"] = item.child("rating").as_float(0.0, 1.0)
        if item.has("at_round"):
            p["at_round"] = item.child("at_round").as_int(0, MAX_ROUNDS)
    elif kind == "evidence_denial":
        p["fraction"] = item.child("fraction").as_float(0.0, 1.0)
        if item.has("supports"):
            supports = item.child("supports")
            supports.require_list()
            p["supports"] = [
                peer_ref_at(supports, j, peer_ids) for j in range(len(supports.value))
            ]
        if item.has("start_round"):
            p["start_round"] = item.child("start_round").as_int(0, MAX_ROUNDS)
    elif kind == "ssid_spoof":
        p["network"] = net_ref("network")
        imitate = item.child("imitate").as_str()
        claimed = {
            n.claimed_name for n in networks if n.id != p["network"]
        }
        if imitate not in claimed:
            item.child("imitate").fail(f"no other network claims the name {imitate!r}")
        p["imitate"] = imitate
    elif kind == "whitewash_network":
        p["network"] = net_ref("network")
        scheduled = {n.id for n in networks if n.schedule is not None}
        if p["network"] in scheduled:
            item.child("network").fail(
                f"network {p['network']!r} already has an inline schedule"
            )
        p["switch_round"] = item.child("switch_round").as_int(0, MAX_ROUNDS)
        if item.has("q_build"):
            p["q_build"] = item.child("q_build").as_float(0.0, 1.0)
        if item.has("q_betray"):
            p["q_betray"] = item.child("q_betray").as_float(0.0, 1.0)
    elif kind == "whitewash_rejoin":
        p["target"] = net_ref("target")
        p["rejoin_round"] = item.child("rejoin_round").as_int(0, MAX_ROUNDS)
        if item.has("peer"):
            p["peer"] = peer_ref("peer")
        if item.has("rating"):
            p["rating"] = item.child("rating").as_float(0.0, 1.0)
    return p


def peer_ref_at(cur: _Cursor, index: int, peer_ids: set) -> str:
    item = cur.item(index)
    ref = item.as_str()
    if ref not in peer_ids:
        item.fail(f"unknown peer id {ref!r}")
    return ref
