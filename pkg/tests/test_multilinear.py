"""Multilinear extension: exactness, identities, query accounting, MC."""

import numpy as np
import pytest

from subknap.common import CapacityError
from subknap.generators import generate
from subknap.multilinear import (
    FractionalPoint,
    SubsetMemo,
    eval_exact,
    eval_mc,
    increase_coordinate,
    marginal_up,
)
from subknap.oracle import CountingOracle

from .conftest import random_point
from .naive import naive_extension, naive_extension_exact, naive_marginal

FAMILIES = ("coverage", "facility", "concave_modular")


def test_tiny_coverage_half_half(tiny_coverage):
    # 0.25*0 + 0.25*2 + 0.25*2 + 0.25*3
    o = CountingOracle(tiny_coverage)
    x = FractionalPoint.make({0: 0.5, 1: 0.5})
    assert eval_exact(o, x) == pytest.approx(1.75, abs=1e-12)


def test_integral_point_is_plain_eval(tiny_coverage):
    o = CountingOracle(tiny_coverage)
    x = FractionalPoint.from_set([0, 1])
    o.reset_count()
    assert eval_exact(o, x) == o.eval_quiet([0, 1])
    assert o.eval_count == 1


def test_all_zero_point(tiny_coverage):
    assert eval_exact(CountingOracle(tiny_coverage), FractionalPoint.zero()) == 0.0


def test_matches_naive_on_random_points():
    rng = np.random.default_rng(5)
    for family in FAMILIES:
        inst = generate(family, 10, seed=17)
        o = CountingOracle(inst)
        for _ in range(15):
            x = random_point(rng, 10, support=int(rng.integers(0, 6)))
            assert eval_exact(o, x) == pytest.approx(naive_extension(inst, x), rel=1e-10)


def test_exact_mode_equals_naive_expansion_bit_for_bit():
    rng = np.random.default_rng(6)
    for family in FAMILIES:
        inst = generate(family, 8, seed=3)
        o = CountingOracle(inst)
        for _ in range(5):
            x = random_point(rng, 8, support=4)
            got = eval_exact(o, x, exact=True)
            want = naive_extension_exact(inst, x, evalf=o.eval_quiet)
            assert got == want
            # and the naive-f expansion agrees up to float noise in f itself
            assert float(got) == pytest.approx(float(naive_extension_exact(inst, x)), rel=1e-10)


def test_integral_equals_set_eval_on_random_sets():
    rng = np.random.default_rng(7)
    for family in FAMILIES:
        inst = generate(family, 12, seed=9)
        o = CountingOracle(inst)
        for _ in range(100):
            ids = [int(e) for e in rng.choice(12, rng.integers(0, 13), replace=False)]
            assert eval_exact(o, FractionalPoint.from_set(ids)) == o.eval_quiet(ids)


def test_query_accounting_exact_power_of_two():
    inst = generate("coverage", 14, seed=21)
    o = CountingOracle(inst)
    rng = np.random.default_rng(0)
    for k in range(0, 13):
        x = random_point(rng, 14, support=k, integral_frac=0.0)
        assert x.support_size == k
        o.reset_count()
        eval_exact(o, x)
        assert o.eval_count == 2**k


def test_memoization_only_reduces_queries():
    inst = generate("coverage", 10, seed=2)
    o = CountingOracle(inst)
    x = FractionalPoint.make({0: 0.3, 1: 0.4, 2: 0.5})
    memo = SubsetMemo()
    o.reset_count()
    v1 = eval_exact(o, x, memo=memo)
    first = o.eval_count
    assert first == 8
    v2 = eval_exact(o, x, memo=memo)
    assert o.eval_count == first  # fully served from cache
    assert v1 == v2
    # marginal reuses the cached expansion of x entirely; only the joined
    # half is fresh (8 instead of 16 queries)
    o.reset_count()
    m = marginal_up(o, x, 5, memo=memo)
    assert o.eval_count == 8
    assert m == pytest.approx(naive_marginal(inst, x, 5), rel=1e-9)


def test_support_cap_is_a_hard_error():
    inst = generate("coverage", 22, seed=1)
    o = CountingOracle(inst)
    x = FractionalPoint.make({e: 0.5 for e in range(21)})
    with pytest.raises(CapacityError):
        eval_exact(o, x)


def test_marginal_up_basics(tiny_coverage):
    o = CountingOracle(tiny_coverage)
    # at zero: the singleton value
    assert marginal_up(o, FractionalPoint.zero(), 0) == o.eval_quiet([0])
    # already integral: zero, and free
    o.reset_count()
    assert marginal_up(o, FractionalPoint.from_set([1]), 1) == 0.0
    assert o.eval_count == 0
    # hand value: x_a = 0.5 -> F(x v 1_b) - F(x) = 2.5 - 1.0
    assert marginal_up(o, FractionalPoint.make({0: 0.5}), 1) == pytest.approx(1.5, abs=1e-12)


def test_step_identity_at_zero_coordinate():
    # F(x + d*1_u) - F(x) = d * (F(x v 1_u) - F(x)) whenever x_u = 0
    rng = np.random.default_rng(11)
    for family in FAMILIES:
        inst = generate(family, 9, seed=13)
        o = CountingOracle(inst)
        for _ in range(10):
            x = random_point(rng, 9, support=3)
            free = [e for e in range(9) if x.coordinate(e) == 0.0]
            u = int(rng.choice(free))
            d = float(rng.uniform(0.05, 1.0))
            lhs = eval_exact(o, increase_coordinate(x, u, d)) - eval_exact(o, x)
            rhs = d * marginal_up(o, x, u)
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_directional_identity_general_coordinate():
    # F(x v 1_u) - F(x) = (1 - x_u) * (F at x_u=1 minus F at x_u=0)
    rng = np.random.default_rng(12)
    for family in FAMILIES:
        inst = generate(family, 9, seed=14)
        o = CountingOracle(inst)
        for _ in range(10):
            x = random_point(rng, 9, support=4)
            if x.support_size == 0:
                continue
            u = int(rng.choice(x.frac_ids))
            a = eval_exact(o, x.join([u]))
            b = eval_exact(o, x.without(u))
            lhs = a - eval_exact(o, x)
            assert lhs == pytest.approx((1 - x.coordinate(u)) * (a - b), rel=1e-9, abs=1e-12)


def test_coordinatewise_monotone():
    rng = np.random.default_rng(13)
    for family in FAMILIES:
        inst = generate(family, 9, seed=15)
        o = CountingOracle(inst)
        for _ in range(10):
            x = random_point(rng, 9, support=3)
            e = int(rng.integers(0, 9))
            if x.coordinate(e) >= 1.0:
                continue
            bumped = increase_coordinate(x, e, 0.5 * (1 - x.coordinate(e)))
            assert eval_exact(o, bumped) >= eval_exact(o, x) - 1e-12


def test_eval_mc_agreement_and_determinism(tiny_coverage):
    o = CountingOracle(tiny_coverage)
    x = FractionalPoint.make({0: 0.5, 1: 0.5})
    mean, se = eval_mc(o, x, samples=100_000, seed=42)
    assert abs(mean - 1.75) <= 4 * se
    assert eval_mc(o, x, samples=1000, seed=9) == eval_mc(o, x, samples=1000, seed=9)
    # integral point: exact, zero spread
    m0, s0 = eval_mc(o, FractionalPoint.from_set([0]), samples=10, seed=1)
    assert (m0, s0) == (o.eval_quiet([0]), 0.0)


def test_eval_mc_matches_exact_within_4se():
    rng = np.random.default_rng(14)
    bad = 0
    trials = 0
    for family in FAMILIES:
        inst = generate(family, 10, seed=5)
        o = CountingOracle(inst)
        for i in range(12):
            x = random_point(rng, 10, support=5)
            exact = eval_exact(o, x)
            mean, se = eval_mc(o, x, samples=20_000, seed=100 + i)
            trials += 1
            if abs(mean - exact) > 4 * max(se, 1e-12):
                bad += 1
    assert bad <= max(1, trials // 20)


def test_increase_coordinate_semantics():
    x = FractionalPoint.zero()
    x = increase_coordinate(x, 3, 0.5)
    assert x.coordinate(3) == 0.5 and x.support_size == 1
    x = increase_coordinate(x, 3, 0.25)
    assert x.coordinate(3) == 0.75 and x.support_size == 1
    x = increase_coordinate(x, 3, 0.25)
    assert 3 in x.integral and x.support_size == 0  # snapped to 1
    with pytest.raises(ValueError):
        increase_coordinate(x, 3, 0.5)  # beyond 1
    y = increase_coordinate(FractionalPoint.make({1: 0.5}), 1, 0.5 - 5e-13)
    assert 1 in y.integral  # snap tolerance absorbs float drift


def test_point_validation():
    with pytest.raises(ValueError):
        FractionalPoint(frozenset({1}), ((1, 0.5),))  # overlap
    with pytest.raises(ValueError):
        FractionalPoint(frozenset(), ((1, 1.5),))  # out of range
    with pytest.raises(ValueError):
        FractionalPoint(frozenset(), ((2, 0.5), (1, 0.5)))  # unsorted
