import numpy as np
import pytest
from scipy.optimize import linprog

from simpleauctions.oracles import (FiniteTypeSpace, lp_optimal_revenue, menu_violation,
                                    verify_approx_factor)
from simpleauctions.simplex import LPError, Unbounded, simplex_max
from simpleauctions.valuations import (Additive, Constant, Discrete, SubadditiveGenerator, ValuationError,
                                       additive_dist, iid)
from simpleauctions.valuations import BuyerDistribution


def test_simplex_small_lp():
    sol = simplex_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    assert sol.value == pytest.approx(36)
    assert sol.x == pytest.approx([2, 6])


def test_simplex_exact_mode():
    sol = simplex_max([1, 1], [[3, 1], [1, 3]], [1, 1], exact=True)
    assert sol.value == 0.5


def test_simplex_unbounded_and_infeasible_origin():
    with pytest.raises(Unbounded):
        simplex_max([1, 0], [[0, 1]], [1])
    with pytest.raises(LPError):
        simplex_max([1], [[1]], [-1])


def test_simplex_agrees_with_scipy(rng):
    for _ in range(50):
        m, n = rng.integers(2, 8, 2)
        A = rng.integers(-2, 5, (m, n)).astype(float)
        b = rng.integers(0, 6, m).astype(float)
        c = rng.integers(-1, 5, n).astype(float)
        A = np.vstack([A, np.ones(n)])  # keeps it bounded
        b = np.append(b, 10)
        ours = simplex_max(c, A, b)
        ref = linprog(-c, A_ub=A, b_ub=b, method="highs")
        assert ours.value == pytest.approx(-ref.fun, abs=1e-8)


def iid_space(values, k):
    return FiniteTypeSpace.from_distribution(additive_dist([Discrete.uniform_over(values)] * k, max(values)))


def test_menu_lp_on_two_iid_items():
    ts = iid_space([1, 2], 2)
    res = lp_optimal_revenue(ts)
    assert res.value == pytest.approx(2.25)
    assert menu_violation(ts, res.menu) < 1e-9
    assert lp_optimal_revenue(ts, exact=True).value == 2.25


def test_deterministic_buyer_ratio_is_one():
    ts = FiniteTypeSpace.from_distribution(additive_dist([Constant(2), Constant(3)], 3))
    rep = verify_approx_factor(ts, 6)
    assert rep["rev"] == pytest.approx(5) and rep["ratio"] == pytest.approx(1) and rep["factor_ok"]


def test_check_can_fail():
    rep = verify_approx_factor(iid_space([1, 2], 2), 0.5)
    assert not rep["factor_ok"]


def test_independence_flag():
    assert iid_space([1, 2], 2).independence() is True
    corr = FiniteTypeSpace(((Additive((1, 1)), 0.5), (Additive((2, 2)), 0.5)), 2)
    assert corr.independence() is False


def test_type_space_limits_and_roundtrip():
    with pytest.raises(ValuationError):
        iid_space(list(range(1, 10)), 2)  # 81 types
    with pytest.raises(ValuationError):
        FiniteTypeSpace(((Additive((1, 1)), 0.5),), 2)
    ts = iid_space([1, 3], 2)
    assert FiniteTypeSpace.from_json(ts.to_json()) == ts


def test_subadditive_types_report_reduced_benchmark():
    gen = SubadditiveGenerator(iid(Discrete.uniform_over([1, 3]), 2, 3), "MAX")
    ts = FiniteTypeSpace.from_distribution(BuyerDistribution("subadditive", generator=gen))
    rep = verify_approx_factor(ts, 6)
    assert rep["independent_items"] is None
    assert rep["reduced_prev"] <= rep["prev"] + 1e-12 <= rep["rev"] + 1e-9
