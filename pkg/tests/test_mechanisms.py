import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simpleauctions.mechanisms import (AnonBundle, AnonItem, IndBundle, IndItem, MechanismError, ReducedItem,
                                       SecondPrice, SPReservesAnon, SPReservesInd, empirical_revenue,
                                       item_competition, rule_from_json, rule_to_json,
                                       run_reduced_item_pricing, run_second_price,
                                       run_sequential_item_pricing, run_sp_with_reserves)
from simpleauctions.reductions import RestrictedIndBundle, RestrictedMix
from simpleauctions.valuations import (Additive, SubadditiveGenerator, Uniform, UnitDemand,
                                       ValuationProfile, additive_profile, bundle_value, iid,
                                       sample_set, unit_demand_profile)

INF = math.inf


def test_single_additive_buyer():
    out = AnonItem((2, 6)).run(additive_profile((3, 5)))
    assert out.revenue == 2 and out.purchased == (frozenset({0}),)


def test_unit_demand_buyers_shop_in_order():
    out = AnonItem((3, 3)).run(unit_demand_profile((4, 1), (4, 4)))
    assert out.purchased == (frozenset({0}), frozenset({1}))
    assert out.revenue == 6


def test_infinite_prices_sell_nothing():
    out = AnonItem((INF, INF)).run(additive_profile((9, 9), (9, 9)))
    assert out.revenue == 0 and out.allocation == (None, None)


@pytest.mark.parametrize("totals, winner", [((3, 9), 1), ((6, 9), 0)])
def test_bundle_goes_to_first_acceptor(totals, winner):
    prof = additive_profile((totals[0], 0), (totals[1], 0))
    out = AnonBundle(5).run(prof)
    assert out.revenue == 5 and out.purchased[winner] == frozenset({0, 1})


def test_zero_bundle_price_goes_to_first_buyer():
    out = AnonBundle(0).run(additive_profile((0, 0), (5, 5)))
    assert out.purchased[0] == frozenset({0, 1}) and out.revenue == 0


@pytest.mark.parametrize("rows, win, second", [
    (((5, 2), (3, 4)), (0, 1), (1, 0)),
    (((5, 5), (5, 1)), (0, 0), (1, 1)),
])
def test_item_competition(rows, win, second):
    comp = item_competition(additive_profile(*rows))
    assert comp.winner == win and comp.second == second


def test_item_competition_three_buyers():
    comp = item_competition(additive_profile((1,), (9,), (4,)))
    assert comp.winner == (1,) and comp.second == (2,)


def test_second_price():
    out = run_second_price(additive_profile((5, 2), (3, 4)))
    assert out.purchased == (frozenset({0}), frozenset({1}))
    assert out.payments == (3, 2)
    assert run_second_price(additive_profile((0, 0), (0, 0))).revenue == 0
    both = run_second_price(additive_profile((5, 5), (5, 5)))
    assert both.purchased[0] == frozenset({0, 1}) and both.revenue == 10


@pytest.mark.parametrize("reserve, revenue, sold", [(4, 4, True), (6, 0, False), (2, 3, True)])
def test_reserve_prices(reserve, revenue, sold):
    out = SPReservesAnon((reserve,)).run(additive_profile((5,), (3,)))
    assert out.revenue == revenue and (out.allocation[0] == 0) == sold


def test_reserves_reject_non_additive_buyers():
    with pytest.raises(MechanismError):
        SPReservesAnon((1,)).run(unit_demand_profile((5,), (3,)))


@pytest.mark.parametrize("singles, revenue", [((5, 3), 4), ((5, 5), 0), ((3, 3), 0)])
def test_reduced_pricing(singles, revenue):
    assert run_reduced_item_pricing(Additive(singles), (4, 4)) == revenue


nonneg = st.integers(0, 6).map(float)


@settings(max_examples=200)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_outcomes_feasible_and_individually_rational(n, k, data):
    tag = data.draw(st.sampled_from(["add", "ud"]))
    make = Additive if tag == "add" else UnitDemand
    prof = ValuationProfile(tuple(
        make(tuple(data.draw(st.lists(nonneg, min_size=k, max_size=k)))) for _ in range(n)))
    rows = tuple(tuple(data.draw(st.lists(nonneg, min_size=k, max_size=k))) for _ in range(n))
    rules = [IndItem(rows), AnonItem(rows[0]), IndBundle(tuple(r[0] for r in rows))]
    if tag == "add" and n >= 2:
        rules += [SPReservesInd(rows), SecondPrice()]
    for rule in rules:
        out = rule.run(prof)
        items = [i for b in out.purchased for i in b]
        assert len(items) == len(set(items))
        for v, b, pay in zip(prof, out.purchased, out.payments):
            assert pay <= bundle_value(v, b)


@settings(max_examples=200)
@given(st.lists(st.lists(nonneg, min_size=2, max_size=2), min_size=2, max_size=3))
def test_zero_reserves_equal_plain_second_price(rows):
    prof = additive_profile(*rows)
    assert run_sp_with_reserves(prof, [[0, 0]] * len(rows)) == run_second_price(prof)


@settings(max_examples=200)
@given(st.lists(st.lists(nonneg, min_size=2, max_size=2), min_size=1, max_size=3),
       st.lists(nonneg, min_size=2, max_size=2))
def test_anonymous_equals_identical_individual_rows(rows, prices):
    prof = unit_demand_profile(*rows)
    assert AnonItem(prices).run(prof) == IndItem([prices] * len(rows)).run(prof)
    assert AnonBundle(prices[0]).run(prof) == IndBundle([prices[0]] * len(rows)).run(prof)


def test_reduced_never_beats_full_pricing_on_tables(rng):
    gen = SubadditiveGenerator(iid(Uniform(0, 4), 3, 4), "SQRT_SUM")
    for _ in range(300):
        v = gen.build(rng.integers(0, 5, 3).astype(float).tolist())
        p = tuple(rng.integers(0, 4, 3).astype(float))
        prof = ValuationProfile((v,))
        assert AnonItem(p).revenue(prof) >= ReducedItem(p).revenue(prof)


def test_custom_order_changes_who_buys():
    prof = unit_demand_profile((4, 1), (4, 4))
    out = run_sequential_item_pricing(prof, [(3, 3)] * 2, order=[1, 0])
    assert out.purchased[1] == frozenset({0})


def test_empirical_revenue_and_json_roundtrip():
    s = sample_set([additive_profile((1, 2)), additive_profile((3, 4))])
    assert empirical_revenue(AnonBundle(3), s) == 3
    for rule in (AnonItem((1, INF)), IndItem(((1, 2), (3, 4))), AnonBundle(2), IndBundle((1, 2)),
                 SecondPrice(), SPReservesAnon((1, 2)), SPReservesInd(((1, 2), (0, 0))),
                 ReducedItem((5, INF)), RestrictedIndBundle((1, 2)),
                 RestrictedMix((AnonItem((1, 2)), AnonBundle(3)))):
        assert rule_from_json(json.loads(json.dumps(rule_to_json(rule)))) == rule


def test_negative_prices_rejected():
    with pytest.raises(MechanismError):
        AnonItem((-1, 2))
    with pytest.raises(MechanismError):
        AnonItem((1, 2)).run(additive_profile((1, 2, 3)))
