"""Lazy density greedy: selection order, reinserts, discards, query bounds."""

import math

import numpy as np
import pytest

from subknap import lazy_greedy
from subknap.generators import generate
from subknap.multilinear import FractionalPoint, eval_exact
from subknap.objectives import ConcaveModular, Instance, WeightedCoverage
from subknap.oracle import CountingOracle


def modular_instance(values, costs):
    # singleton groups with squared weights make f additive
    vals = np.asarray(values, dtype=float)
    return Instance(
        len(values), np.asarray(costs, dtype=float), ConcaveModular(np.ones(len(values)), np.diag(vals**2))
    )


def coverage_instance(weights, covers, costs):
    cov = WeightedCoverage(
        np.asarray(weights, dtype=float),
        tuple(np.asarray(sorted(c), dtype=np.int64) for c in covers),
    )
    return Instance(len(covers), np.asarray(costs, dtype=float), cov)


def test_modular_runs_in_value_order_without_reinserts():
    inst = modular_instance([3.0, 2.0, 1.0], [1.0, 1.0, 1.0])
    o = CountingOracle(inst)
    res = lazy_greedy.run(o, FractionalPoint.zero(), math.inf, [0, 1, 2], eps=0.3, n=3)
    assert res.selected == [0, 1, 2]
    assert all(row.action == "accept" for row in res.transcript)
    assert res.gain_achieved == pytest.approx(6.0)


def test_zero_target_selects_nothing_after_initialization():
    inst = modular_instance([3.0, 2.0], [1.0, 1.0])
    o = CountingOracle(inst)
    res = lazy_greedy.run(o, FractionalPoint.zero(), 0.0, [0, 1], eps=0.3, n=2)
    assert res.selected == []
    assert res.queries_used == 3  # F(x) plus one gain per candidate, nothing more


def test_empty_candidates_returns_immediately():
    inst = modular_instance([1.0], [1.0])
    o = CountingOracle(inst)
    res = lazy_greedy.run(o, FractionalPoint.zero(), 5.0, [], eps=0.3, n=1)
    assert res.selected == [] and res.queries_used == 0


def test_negative_target_rejected():
    inst = modular_instance([1.0], [1.0])
    with pytest.raises(ValueError):
        lazy_greedy.run(CountingOracle(inst), FractionalPoint.zero(), -1.0, [0], eps=0.3, n=1)


def test_hand_traced_reinsert_then_accept():
    # a={0,1}, b={1,2}, c={3}: selecting a halves b's gain (2 -> 1)
    inst = coverage_instance([1, 1, 1, 1], [[0, 1], [1, 2], [3]], [0.5, 0.5, 1.0])
    o = CountingOracle(inst)
    res = lazy_greedy.run(o, FractionalPoint.zero(), math.inf, [0, 1, 2], eps=0.4, n=3)
    actions = [(r.element, r.action) for r in res.transcript]
    assert actions == [(0, "accept"), (1, "reinsert"), (1, "accept"), (2, "accept")]
    reinsert = res.transcript[1]
    assert reinsert.cached_gain == 2.0 and reinsert.fresh_gain == 1.0
    assert res.gain_achieved == pytest.approx(4.0)


def test_stops_at_target():
    inst = coverage_instance([1, 1, 1, 1], [[0, 1], [1, 2], [3]], [0.5, 0.5, 1.0])
    o = CountingOracle(inst)
    res = lazy_greedy.run(o, FractionalPoint.zero(), 2.5, [0, 1, 2], eps=0.4, n=3)
    assert res.selected == [0, 1]
    assert res.gain_achieved == pytest.approx(3.0)


def test_engineered_discard_after_cap_updates():
    # element 0 covers a chain of geometrically lighter units; each competitor
    # wipes one unit, collapsing 0's gain by >10x per refresh until the cap
    # (floor(2 ln(5/0.9)/0.9) = 3) is exhausted and 0 is discarded
    weights = [1.0, 0.05, 0.0025, 0.000125, 1e-6, 2.0, 0.9, 0.03, 0.002]
    covers = [[0, 1, 2, 3, 4], [0, 5], [1, 6], [2, 7], [3, 8]]
    inst = coverage_instance(weights, covers, [1.0] * 5)
    o = CountingOracle(inst)
    eps = 0.9
    assert lazy_greedy.update_cap(5, eps) == 3
    res = lazy_greedy.run(o, FractionalPoint.zero(), math.inf, list(range(5)), eps=eps, n=5)
    assert res.selected == [1, 2, 3, 4]
    assert list(res.discarded) == [0]
    assert res.discarded[0] == pytest.approx(1e-6)
    zero_rows = [r for r in res.transcript if r.element == 0]
    assert [r.action for r in zero_rows] == ["reinsert"] * 3 + ["discard"]
    # every refresh shrank the cached gain by more than the (1 - eps) factor
    for row in zero_rows:
        assert row.fresh_gain < (1 - eps) * row.cached_gain
    # discarded gain is far below the claimed (eps/n)^2 share of the best value
    assert res.discarded[0] <= (eps / 5) ** 2 * max(res.initial_gains.values())


def test_gain_achieved_matches_extension_difference():
    rng = np.random.default_rng(8)
    for seed in range(5):
        inst = generate("coverage", 30, seed=seed)
        o = CountingOracle(inst)
        x = FractionalPoint.make({0: 0.4, 1: 0.7})
        cands = [e for e in range(2, 30)]
        res = lazy_greedy.run(o, x, float(rng.uniform(0.5, 3.0)), cands, eps=0.2, n=30)
        direct = eval_exact(o, x.join(res.selected)) - eval_exact(o, x)
        assert res.gain_achieved == pytest.approx(direct, abs=1e-9)


def test_query_bound_and_shadow_on_random_instances():
    for seed in range(6):
        n = 40
        inst = generate("coverage", n, seed=seed, c_max=0.2)
        o = CountingOracle(inst)
        eps = 0.1
        res = lazy_greedy.run(
            o, FractionalPoint.zero(), math.inf, range(n), eps=eps, n=n, shadow=True
        )
        assert res.queries_used <= n * (lazy_greedy.update_cap(n, eps) + 2)
        assert res.shadow_ok(eps)


def test_transcript_deterministic():
    inst = generate("facility", 25, seed=4)
    o = CountingOracle(inst)
    runs = [
        lazy_greedy.run(o, FractionalPoint.zero(), 2.0, range(25), eps=0.15, n=25)
        for _ in range(2)
    ]
    assert [r.to_json() for r in runs[0].transcript] == [r.to_json() for r in runs[1].transcript]


def test_runs_on_top_of_fractional_point():
    inst = generate("concave_modular", 12, seed=6)
    o = CountingOracle(inst)
    x = FractionalPoint.make({2: 0.5, 7: 0.25, 9: 0.75})
    res = lazy_greedy.run(o, x, 0.8, [e for e in range(12) if e not in (2, 7, 9)], eps=0.2, n=12)
    direct = eval_exact(o, x.join(res.selected)) - eval_exact(o, x)
    assert res.gain_achieved == pytest.approx(direct, abs=1e-9)
