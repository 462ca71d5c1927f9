import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simpleauctions.mechanisms import AnonBundle, AnonItem, SecondPrice
from simpleauctions.reductions import (RestrictedIndBundle, RestrictedIndItem, compute_beta, max_mech,
                                       modify_bids, restrict_bundle_price, restrict_item_row,
                                       run_restricted_bundle_pricing, run_restricted_item_pricing)
from simpleauctions.valuations import additive_profile, sample_set


def test_thresholds_and_modified_bids():
    prof = additive_profile((5, 2), (3, 4))
    assert compute_beta(prof) == ((3, 4), (5, 2))
    assert modify_bids(prof) == ((5, 0), (0, 4))


def test_three_buyer_thresholds():
    beta = compute_beta(additive_profile((1,), (9,), (4,)))
    assert [b[0] for b in beta] == [9, 4, 9]


def test_ties_zero_out_modified_bids():
    assert modify_bids(additive_profile((5, 5), (5, 1))) == ((0, 5), (0, 0))
    same = additive_profile((2, 3), (2, 3))
    assert compute_beta(same) == ((2, 3), (2, 3))
    assert modify_bids(same) == ((0, 0), (0, 0))


@pytest.mark.parametrize("p, beta, want", [((4, 1), (3, 4), (4, 4)), ((4, 1), (0, 0), (4, 1)),
                                           ((0, 0), (3, 4), (3, 4))])
def test_restricted_item_row(p, beta, want):
    assert restrict_item_row(p, beta) == want


@pytest.mark.parametrize("r, beta, vbar, want", [(3, (3, 4), (5, 0), 3), (1, (3, 4), (5, 6), 7),
                                                 (2.5, (3, 4), (0, 0), 2.5)])
def test_restricted_bundle_price(r, beta, vbar, want):
    assert restrict_bundle_price(r, beta, vbar) == want


def test_restricted_item_pricing_example():
    run = run_restricted_item_pricing(additive_profile((5, 2), (3, 4)), [(4, 1), (0, 0)])
    assert run.revenue == 6
    assert run.outcome.purchased == (frozenset({0}), frozenset({1}))


def test_restricted_bundle_pricing_example():
    # buyer 2's floor is the rival bid on item 2, which is 2, so it pays max(2, 3)
    run = run_restricted_bundle_pricing(additive_profile((5, 2), (3, 4)), [3, 3])
    assert run.outcome.payments == (3, 3)
    assert run.revenue == 6


def test_all_tied_profile_earns_nothing():
    prof = additive_profile((2, 2), (2, 2))
    assert run_restricted_item_pricing(prof, [(0, 0)] * 2).revenue == 0
    assert run_restricted_bundle_pricing(prof, [0, 0]).revenue == 0


def test_zero_bundle_prices_charge_thresholds():
    run = run_restricted_bundle_pricing(additive_profile((5, 2), (3, 4)), [0, 0])
    assert run.outcome.payments == (3, 2)


def test_degenerate_rival_reduces_to_single_buyer_pricing():
    prof = additive_profile((5, 2), (0, 0))
    assert run_restricted_item_pricing(prof, [(4, 3), (1, 1)]).revenue == AnonItem((4, 3)).revenue(
        additive_profile((5, 2)))


def test_max_mech_tie_rule():
    s = sample_set([additive_profile((4, 0), (0, 0))])
    chosen, means = max_mech([AnonBundle(4), AnonBundle(3)], s)
    assert chosen == AnonBundle(4) and means == [4, 3]
    chosen, _ = max_mech([AnonBundle(3), AnonItem((3, 9))], s)
    assert chosen == AnonBundle(3)
    assert max_mech([SecondPrice()], s)[0] == SecondPrice()


vals = st.integers(0, 5).map(float)


@settings(max_examples=300)
@given(st.integers(2, 3), st.integers(1, 3), st.data())
def test_modified_bid_depends_on_own_column_only(n, k, data):
    rows = [data.draw(st.lists(vals, min_size=k, max_size=k)) for _ in range(n)]
    base = modify_bids(additive_profile(*rows))
    i2, j2 = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, k - 1))
    rows[i2][j2] = data.draw(vals)
    moved = modify_bids(additive_profile(*rows))
    for i in range(n):
        for j in range(k):
            if j != j2:
                assert moved[i][j] == base[i][j]


@settings(max_examples=300)
@given(st.integers(2, 3), st.integers(1, 3), st.data())
def test_restricted_sales_go_to_strict_winners(n, k, data):
    rows = [data.draw(st.lists(vals, min_size=k, max_size=k)) for _ in range(n)]
    prices = [data.draw(st.lists(vals, min_size=k, max_size=k)) for _ in range(n)]
    prof = additive_profile(*rows)
    beta = compute_beta(prof)
    for rule in (RestrictedIndItem(prices), RestrictedIndBundle([p[0] for p in prices])):
        out = rule.run(prof)
        for i, bundle in enumerate(out.purchased):
            for j in bundle:
                assert rows[i][j] > beta[i][j]
        vbar = modify_bids(prof)
        for i, (b, pay) in enumerate(zip(out.purchased, out.payments)):
            assert pay <= sum(vbar[i][j] for j in b)
