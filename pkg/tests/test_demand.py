import itertools
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from simpleauctions.demand import best_bundle, grand_bundle_choice
from simpleauctions.valuations import (Additive, BundleTable, SubadditiveGenerator, Uniform, UnitDemand,
                                       bundle_value, iid)


def literal_choice(v, prices, available):
    """Enumerate every affordable subset; utility, then price paid, then
    lexicographically smallest item tuple."""
    best = None
    avail = [i for i in sorted(available) if math.isfinite(prices[i])]
    for r in range(len(avail) + 1):
        for S in itertools.combinations(avail, r):
            paid = math.fsum(prices[i] for i in S)
            u = bundle_value(v, frozenset(S)) - paid
            key = (u, paid)
            if best is None or key > best[0] or (key == best[0] and S < best[1]):
                best = (key, S)
    return frozenset(best[1]), best[0][0], best[0][1]


def test_additive_buys_items_priced_below_value():
    got = best_bundle(Additive((3, 5)), (2, 6), {0, 1})
    assert got == (frozenset({0}), 1, 2)


def test_zero_utility_purchase_goes_through():
    assert best_bundle(Additive((2,)), (2,), {0}) == (frozenset({0}), 0, 2)


def test_table_tie_goes_to_lexicographic_first():
    v = BundleTable((0, 4, 4, 5), 2, subadditive=True, monotone=True)
    assert best_bundle(v, (3, 3)).bundle == frozenset({0})


def test_grand_bundle_threshold():
    v = Additive((2, 3))
    assert grand_bundle_choice(v, 5)
    assert not grand_bundle_choice(v, 5.01)
    assert grand_bundle_choice(Additive((0, 0)), 0)


def test_infinite_prices_never_bought():
    assert best_bundle(UnitDemand((9, 9)), (math.inf, math.inf)).bundle == frozenset()


small = st.integers(0, 4).map(float)
prices_st = st.one_of(small, st.just(math.inf))


@settings(max_examples=300)
@given(st.lists(small, min_size=1, max_size=4), st.data())
def test_unit_demand_matches_literal_enumeration(vals, data):
    k = len(vals)
    prices = data.draw(st.lists(prices_st, min_size=k, max_size=k))
    avail = data.draw(st.sets(st.integers(0, k - 1)))
    got = best_bundle(UnitDemand(tuple(vals)), prices, avail)
    assert tuple(got) == literal_choice(UnitDemand(tuple(vals)), prices, avail)


@settings(max_examples=300)
@given(st.lists(small, min_size=1, max_size=4), st.data())
def test_additive_matches_literal_enumeration_on_utility_and_payment(vals, data):
    k = len(vals)
    prices = data.draw(st.lists(prices_st, min_size=k, max_size=k))
    avail = data.draw(st.sets(st.integers(0, k - 1)))
    got = best_bundle(Additive(tuple(vals)), prices, avail)
    want = literal_choice(Additive(tuple(vals)), prices, avail)
    assert (got.utility, got.paid) == want[1:]
    if all(p > 0 for p in prices):
        assert got.bundle == want[0]


def test_tables_match_literal_enumeration(rng):
    for _ in range(10_000 // 20):
        k = int(rng.integers(1, 5))
        gen = SubadditiveGenerator(iid(Uniform(0, 4), k, 4), ("SQRT_SUM", "MAX", "SUM")[_ % 3])
        v = gen.build(np.round(rng.uniform(0, 4, k)).tolist())
        for _ in range(20):
            prices = [float(x) for x in rng.integers(0, 5, k)]
            avail = {i for i in range(k) if rng.random() < 0.8}
            got = best_bundle(v, prices, avail)
            assert tuple(got) == literal_choice(v, prices, avail)
            assert got.utility == bundle_value(v, got.bundle) - got.paid >= 0


def test_unavailable_prices_are_irrelevant(rng):
    v = UnitDemand((3, 1, 4, 1))
    base = best_bundle(v, (1, 1, 1, 1), {0, 1})
    for _ in range(20):
        p = (1, 1, *rng.uniform(0, 5, 2))
        assert best_bundle(v, p, {0, 1}) == base
