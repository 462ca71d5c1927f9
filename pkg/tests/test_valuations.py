import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from simpleauctions.valuations import (COMBINERS, Additive, BundleTable, Constant, Discrete,
                                       ProductDistribution, SampleSet, SubadditiveGenerator,
                                       SupportTooLarge, Uniform, UnitDemand, ValuationError,
                                       ValuationProfile, additive_dist, additive_profile,
                                       bundle_value, draw_samples, iid, mask_of, sample_profile,
                                       support_profiles, unit_demand_dist, validate_valuation)
from simpleauctions.valuations import BuyerDistribution


def table(entries, k, **flags):
    return BundleTable.from_dict({frozenset(b): v for b, v in entries.items()}, k, **flags)


def test_additive_table_is_valid():
    v = table({(0,): 1, (1,): 2, (0, 1): 3}, 2, additive=True, monotone=True, subadditive=True)
    assert validate_valuation(v) == []


def test_subadditivity_violation_reported():
    v = table({(0,): 1, (1,): 1, (0, 1): 3}, 2, subadditive=True)
    (viol,) = validate_valuation(v)
    assert viol.prop == "subadditive"
    assert {frozenset(w) for w in viol.witness[:2]} == {frozenset({0}), frozenset({1})}


def test_monotonicity_violation_reported():
    v = table({(0,): 2, (1,): 0, (0, 1): 1}, 2, monotone=True)
    viols = validate_valuation(v)
    assert [x.prop for x in viols] == ["monotone"]
    assert tuple(frozenset(w) for w in viols[0].witness[:2]) == (frozenset({0}), frozenset({0, 1}))


def test_missing_bundle_key_rejected():
    with pytest.raises(ValuationError):
        BundleTable.from_dict({frozenset({0}): 1}, 2)


def test_bundle_values_of_vector_forms():
    assert bundle_value(Additive((3, 5)), {0, 1}) == 8
    assert bundle_value(UnitDemand((3, 5)), {0, 1}) == 5
    assert bundle_value(Additive((3, 5)), set()) == 0
    assert bundle_value(UnitDemand((3, 5)), 0) == 0


@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=6))
def test_additive_bundle_value_is_exact_sum(xs):
    v = Additive(tuple(xs))
    for mask in range(1 << len(xs)):
        items = [i for i in range(len(xs)) if mask >> i & 1]
        assert bundle_value(v, mask) == math.fsum(xs[i] for i in items)


@pytest.mark.parametrize("combiner", COMBINERS)
def test_generated_subadditive_valuations_validate(combiner, rng):
    for k in (1, 3, 6):
        gen = SubadditiveGenerator(iid(Uniform(0, 5), k, 5), combiner, budget=7.0)
        for _ in range(1000 // 6):
            xs = rng.uniform(0, 5, k)
            assert validate_valuation(gen.build(xs)) == []


def test_constant_distribution_gives_fixed_profile():
    dist = additive_dist([Constant(2), Constant(3)], 5)
    assert sample_profile(dist, 1, seed=0)[0] == Additive((2.0, 3.0))


def test_sampling_is_deterministic_and_prefix_stable():
    dist = additive_dist([Uniform(0, 1)] * 3, 1)
    a = draw_samples(dist, 2, 50, seed=4)
    assert a == draw_samples(dist, 2, 50, seed=4)
    longer = draw_samples(dist, 2, 80, seed=4)
    assert longer.profiles[:50] == a.profiles


def test_discrete_sample_mean():
    dist = additive_dist([Discrete(((1, .5), (2, .5)))] * 2, 2)
    s = draw_samples(dist, 1, 100_000, seed=1)
    assert abs(s.singles()[:, 0, 0].mean() - 1.5) < 0.02


def test_support_beyond_ceiling_rejected():
    with pytest.raises(ValuationError):
        ProductDistribution((Uniform(0, 11),), 10)


def test_probabilities_validated_then_renormalized():
    d = Discrete(((1, 0.5), (2, 0.5 + 1e-13)))
    assert math.fsum(p for _, p in d.points) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValuationError):
        Discrete(((1, 0.5), (2, 0.4)))


def test_support_enumeration_probabilities():
    dist = unit_demand_dist([Discrete.uniform_over([1, 2])] * 2, 2)
    pairs = list(support_profiles(dist, 1))
    assert len(pairs) == 4
    assert math.fsum(p for _, p in pairs) == pytest.approx(1)
    with pytest.raises(SupportTooLarge):
        list(support_profiles(dist, 3, limit=10))


def test_profile_json_roundtrip_keeps_table_flags():
    gen = SubadditiveGenerator(iid(Uniform(0, 1), 2, 1), "MAX")
    prof = ValuationProfile((gen.build([0.2, 0.7]),))
    back = ValuationProfile.from_json(json.loads(json.dumps(prof.to_json())))
    assert back == prof and back[0].unit_demand
    s = SampleSet((additive_profile((1, 2), (3, 4)),))
    assert SampleSet.from_json(s.to_json()).profiles == s.profiles


def test_profiles_must_be_homogeneous():
    with pytest.raises(ValuationError):
        ValuationProfile((Additive((1, 2)), UnitDemand((1, 2))))
    with pytest.raises(ValuationError):
        ValuationProfile((Additive((1, 2)), Additive((1,))))


def test_mask_roundtrip():
    for items in itertools.combinations(range(5), 3):
        assert mask_of(items) == sum(1 << i for i in items)


def test_subadditive_buyer_distribution_ceiling():
    gen = SubadditiveGenerator(iid(Discrete.uniform_over([1, 4]), 2, 4), "SUM")
    d = BuyerDistribution("subadditive", generator=gen)
    assert d.ceiling == 8
    assert np.isclose(sample_profile(d, 1, 3)[0].values[3], sum(sample_profile(d, 1, 3)[0].values[1:3]))
