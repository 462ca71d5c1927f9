import pytest

from simpleauctions.shattering import (ANON_BUNDLE, ANON_ITEM, CLASS_IDS, IND_BUNDLE, IND_ITEM,
                                       NOT_SHATTERED, REDUCED_ITEM, RESTRICTED_IND_BUNDLE,
                                       RESTRICTED_IND_ITEM, SHATTERED, SP_RESERVES_ANON, UNKNOWN,
                                       ShatterError, ShatterInstance, labeling_count,
                                       pd_lower_bound_search, pricing_class, realized_labeling,
                                       shatter_check, verify_evidence)
from simpleauctions.valuations import (Additive, Discrete, Uniform, UnitDemand, additive_dist, draw_samples,
                                       sample_set)


def totals(*ts):
    return sample_set([Additive((t,)) for t in ts])


def test_bundle_pair_is_shattered():
    inst = ShatterInstance(totals(1, 3), (0.5, 0.8), ANON_BUNDLE)
    v = shatter_check(inst)
    assert v.status == SHATTERED and len(v.evidence) == 4
    assert verify_evidence(inst, v)


def test_bundle_pair_with_high_witness_is_not_shattered():
    inst = ShatterInstance(totals(1, 3), (0.5, 2), ANON_BUNDLE)
    v = shatter_check(inst)
    assert v.status == NOT_SHATTERED and v.failed_labeling == frozenset({0, 1})
    assert verify_evidence(inst, v)


def test_same_instances_on_two_items():
    s = sample_set([Additive((0.25, 0.75)), Additive((1.5, 1.5))])
    assert shatter_check(ShatterInstance(s, (0.5, 0.8), ANON_BUNDLE)).status == SHATTERED
    assert shatter_check(ShatterInstance(s, (0.5, 2), ANON_BUNDLE)).status == NOT_SHATTERED


def test_zero_witness_cannot_be_shattered():
    v = shatter_check(ShatterInstance(totals(1, 3), (0, 0), ANON_BUNDLE))
    assert v.status == NOT_SHATTERED and v.failed_labeling == frozenset()


def test_two_items_shatter_independently():
    s = sample_set([Additive((1, 0)), Additive((0, 1))])
    v = shatter_check(ShatterInstance(s, (0.5, 0.5), ANON_ITEM))
    assert v.status == SHATTERED


def test_non_exhaustive_class_reports_unknown():
    s = sample_set([UnitDemand((1, 0)), UnitDemand((3, 0))])
    v = shatter_check(ShatterInstance(s, (0.5, 2), ANON_ITEM))
    assert v.status == UNKNOWN


def test_budget_exhaustion_reports_unknown():
    s = draw_samples(additive_dist([Uniform(0, 5)] * 2, 5), 1, 4, seed=2)
    v = shatter_check(ShatterInstance(s, (9, 9, 9, 9), ANON_ITEM), budget=3)
    assert v.status == UNKNOWN and v.certificate["reason"] == "budget exhausted"


def test_too_many_samples_rejected():
    with pytest.raises(ShatterError):
        shatter_check(ShatterInstance(totals(*range(1, 22)), (1,) * 21, ANON_BUNDLE))


def test_adding_a_sample_keeps_failure(rng):
    base = ShatterInstance(totals(1, 3), (0.5, 2), ANON_BUNDLE)
    assert shatter_check(base).status == NOT_SHATTERED
    for _ in range(10):
        t, w = rng.uniform(0, 5, 2)
        bigger = ShatterInstance(totals(1, 3, t), (0.5, 2, w), ANON_BUNDLE)
        assert shatter_check(bigger).status == NOT_SHATTERED


@pytest.mark.parametrize("class_id", [ANON_ITEM, IND_ITEM, REDUCED_ITEM, IND_BUNDLE,
                                      SP_RESERVES_ANON, RESTRICTED_IND_ITEM, RESTRICTED_IND_BUNDLE])
def test_failed_labelings_survive_random_pricings(class_id, rng):
    """Exact NOT_SHATTERED verdicts are never contradicted by random search."""
    n = 1 if class_id in (ANON_ITEM, REDUCED_ITEM) else 2
    dist = additive_dist([Discrete.uniform_over([0, 1, 2, 3])] * 2, 3)
    checked = 0
    for seed in range(30):
        s = draw_samples(dist, n, 2, seed)
        w = tuple(rng.uniform(0.2, 4, 2))
        v = shatter_check(ShatterInstance(s, w, class_id))
        assert v.status in (SHATTERED, NOT_SHATTERED)
        if v.status == SHATTERED:
            continue
        checked += 1
        pc = pricing_class(class_id, s)
        for _ in range(300):
            x = tuple(rng.choice([0.0, *rng.uniform(0, 7, 3)]) for _ in range(pc.dim))
            assert realized_labeling(pc.rule(x), s, w) != v.failed_labeling
    assert checked > 0


def test_search_examples():
    dist = additive_dist([Uniform(0, 10)] * 2, 10)
    assert pd_lower_bound_search(ANON_ITEM, dist, 4, 0, seed=1).size == 0
    found = pd_lower_bound_search(ANON_ITEM, dist, 4, 10_000, seed=1)
    assert found.size >= 2 and found.verdict.status == SHATTERED
    assert verify_evidence(found.instance, found.verdict)
    bundle = pd_lower_bound_search(ANON_BUNDLE, additive_dist([Uniform(0, 10)], 10), 4, 10_000, seed=1)
    assert bundle.size >= 2


def test_bundle_search_stays_far_below_25():
    dist = additive_dist([Uniform(0, 10)], 10)
    assert pd_lower_bound_search(ANON_BUNDLE, dist, 20, 100_000, seed=3).size < 25


def test_labeling_count_examples():
    assert labeling_count(ANON_ITEM, totals(1, 3)) == 3
    assert labeling_count(ANON_BUNDLE, totals(4)) == 2


def test_labeling_count_bound(rng):
    for _ in range(40):
        m, k = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        if (2 * m + 2) ** k > 20_000:
            continue
        s = sample_set([Additive(tuple(r)) for r in rng.integers(0, 8, (m, k)).astype(float)])
        assert labeling_count(ANON_ITEM, s) <= (m + 1) ** k


def test_instance_json_roundtrip():
    inst = ShatterInstance(totals(1, 3), (0.5, 0.8), ANON_BUNDLE)
    assert ShatterInstance.from_json(inst.to_json()) == inst
    assert shatter_check(inst).to_json()["status"] == SHATTERED


def test_unknown_class_rejected():
    with pytest.raises(ShatterError):
        ShatterInstance(totals(1), (1,), "NOPE")
    assert len(CLASS_IDS) == 9
