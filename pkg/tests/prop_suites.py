"""Randomized property suites shared by the property and acceptance tests.

Each suite runs `cases` independent randomized checks from a seeded stream
and raises AssertionError with a reproduction hint on the first violation.
"""

import random

from qoetrust.evidence import AppContext, NetworkIdentity
from qoetrust.risk import Decision, RiskRequest, Verdict, decide
from qoetrust.selection import Candidate, select
from qoetrust.trust import (
    FriendMap,
    MetricParams,
    TrustAssessment,
    aggregate_reputation,
    direct_trust,
    recommender_trust,
)


def _weight(rng):
    return rng.uniform(1e-6, 1.0)


def suite_metric_bounds(cases: int, seed: int) -> None:
    """Every metric output stays inside [0, 1] for any valid input."""
    rng = random.Random(seed)
    for case in range(cases):
        obs = [(rng.random(), _weight(rng)) for _ in range(rng.randint(0, 8))]
        t = direct_trust(obs)
        assert 0.0 <= t.value <= 1.0 and 0.0 <= t.confidence <= 1.0, (
            f"direct_trust out of bounds: case {case} seed {seed}: {obs} -> {t}"
        )
        pairs = [
            (rng.random(), rng.random(), _weight(rng))
            for _ in range(rng.randint(0, 6))
        ]
        params = MetricParams(
            rec_prior_pos=rng.uniform(0.0, 5.0),
            rec_prior_neg=rng.uniform(0.1, 5.0),
            sybil_cap=rng.uniform(0.5, 20.0),
        )
        t = recommender_trust(pairs, params)
        assert 0.0 <= t.value <= 1.0 and 0.0 <= t.confidence <= 1.0, (
            f"recommender_trust out of bounds: case {case} seed {seed} -> {t}"
        )
        ids = [f"r{i}" for i in range(rng.randint(0, 6))]
        recs = [(rid, rng.random(), _weight(rng)) for rid in ids for _ in range(rng.randint(1, 2))]
        trusts = {
            rid: TrustAssessment(rng.random(), rng.random())
            for rid in ids if rng.random() < 0.7
        }
        friends = FriendMap({rid: rng.uniform(0.1, 1.0) for rid in ids if rng.random() < 0.2})
        t = aggregate_reputation(recs, trusts, friends, params)
        assert 0.0 <= t.value <= 1.0 and 0.0 <= t.confidence <= 1.0, (
            f"aggregate_reputation out of bounds: case {case} seed {seed} -> {t}"
        )


def suite_direct_monotonicity(cases: int, seed: int) -> None:
    """A perfect rating never lowers direct trust; a terrible one never
    raises it."""
    rng = random.Random(seed)
    for case in range(cases):
        base = [(rng.random(), _weight(rng)) for _ in range(rng.randint(0, 10))]
        before = direct_trust(base).value
        w = _weight(rng)
        up = direct_trust(base + [(1.0, w)]).value
        down = direct_trust(base + [(0.0, w)]).value
        assert up >= before - 1e-12, (
            f"perfect rating lowered trust: case {case} seed {seed}: "
            f"{before} -> {up} (weight {w})"
        )
        assert down <= before + 1e-12, (
            f"terrible rating raised trust: case {case} seed {seed}: "
            f"{before} -> {down} (weight {w})"
        )


def suite_selection_permutation(cases: int, seed: int) -> None:
    """The selected network never depends on candidate order."""
    rng = random.Random(seed)
    grant = Decision(Verdict.GRANT, 0.3, 0.0)
    deny = Decision(Verdict.DENY, 0.3, -0.1)
    for case in range(cases):
        n = rng.randint(1, 7)
        candidates = []
        for i in range(n):
            trust = rng.choice([rng.random(), round(rng.random(), 1)])
            cost = rng.choice([0.0, rng.random()])
            decision = grant if rng.random() < 0.7 else deny
            candidates.append(
                Candidate(NetworkIdentity(f"net-{i}", f"net-{i}", f"p{i}", cost), trust, decision)
            )
        lam = rng.choice([0.0, 0.5, 1.0])
        expected = select(candidates, lam)
        for _ in range(3):
            shuffled = candidates[:]
            rng.shuffle(shuffled)
            got = select(shuffled, lam)
            assert got == expected, (
                f"order changed the winner: case {case} seed {seed}: "
                f"{expected!r} vs {got!r}"
            )


def suite_decide_monotonicity(cases: int, seed: int) -> None:
    """More trust never turns a grant into a denial."""
    rng = random.Random(seed)
    contexts = list(AppContext)
    for case in range(cases):
        table = {c: round(rng.random(), 2) for c in contexts}
        ctx = rng.choice(contexts)
        a, b = rng.random(), rng.random()
        low, high = min(a, b), max(a, b)
        d_low = decide(RiskRequest("net-x", ctx, low), table)
        d_high = decide(RiskRequest("net-x", ctx, high), table)
        assert not (d_low.granted and not d_high.granted), (
            f"grant lost with more trust: case {case} seed {seed}: "
            f"{low} granted but {high} denied at {table[ctx]}"
        )
        assert d_high.margin >= d_low.margin, (
            f"margin not monotone: case {case} seed {seed}"
        )
