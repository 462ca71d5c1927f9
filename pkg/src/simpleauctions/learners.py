"""Empirical revenue maximization over pricing classes, exact expected
revenue on finite-support distributions, and the uniform-convergence
sample-size calculator.

Candidate grids are built from sample values: a pricing's revenue on a
fixed sample only changes when a price crosses a sample value, so the grid
optimum is the global empirical optimum for bundle prices, additive item
prices and revenue-reduced item prices.  For unit-demand and general
bundle-table buyers the grid also carries midpoints between adjacent values
and is a heuristic.

Tie rule everywhere: lexicographically smallest price vector, ``inf``
(not for sale) sorted last.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mechanisms import (AnonBundle, AnonItem, IndItem, MechanismError, ReducedItem, SecondPrice,
                         empirical_revenue)
from .reductions import RestrictedMix, max_mech
from .valuations import ADDITIVE, SampleSet, SupportTooLarge, draw_samples, support_profiles

INF = math.inf

EXACT_GRID = "EXACT_GRID"
EXHAUSTIVE_PRODUCT = "EXHAUSTIVE_PRODUCT"
HILL_CLIMB = "HILL_CLIMB"

DEFAULT_MAX_GRID = 200_000


class GridTooLarge(ValueError):
    """The requested exhaustive search exceeds its size limit."""


@dataclass
class ErmResult:
    chosen: object
    empirical_mean_revenue: float
    search_mode: str
    candidates_examined: int
    details: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.search_mode != HILL_CLIMB

    def to_json(self) -> dict:
        from .mechanisms import rule_to_json

        out = {
            "chosen": rule_to_json(self.chosen),
            "empirical_mean_revenue": self.empirical_mean_revenue,
            "search_mode": self.search_mode,
            "candidates_examined": self.candidates_examined,
        }
        for key, val in self.details.items():
            out[key] = rule_to_json(val) if hasattr(val, "revenue") else val
        return out


def _require(samples: SampleSet, n: int | None = None, tag: str | None = None):
    if samples.m == 0:
        raise ValueError("empty sample")
    if n is not None and samples.n != n:
        raise MechanismError(f"expected {n}-buyer samples, got {samples.n}")
    if tag is not None and samples.tag != tag:
        raise MechanismError(f"expected {tag} buyers, got {samples.tag}")


def _best_1d(candidates: Sequence[float], scores: Sequence[float]) -> int:
    """Index of the highest score; ties go to the smallest candidate."""
    best = 0
    for t in range(1, len(candidates)):
        if scores[t] > scores[best] or (scores[t] == scores[best] and candidates[t] < candidates[best]):
            best = t
    return best


def _price_sales_scores(cands, values, weights=None):
    """``p * (total weight of values >= p)`` for each candidate ``p``."""
    values = np.asarray(values, dtype=float)
    w = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
    order = np.argsort(values, kind="stable")
    sv, sw = values[order], w[order]
    out = []
    for p in cands:
        if p == INF:
            out.append(0.0)
            continue
        idx = np.searchsorted(sv, p, side="left")
        mass = math.fsum(sw[idx:]) if weights is not None else float(len(sv) - idx)
        out.append(p * mass if mass else 0.0)
    return out


# --------------------------------------------------------------------------
# single-buyer ERM


def erm_bundle_pricing(samples: SampleSet) -> ErmResult:
    """Best grand-bundle price; candidates are the sampled grand-bundle values."""
    _require(samples, n=1)
    totals = samples.grand_values()[:, 0]
    cands = sorted(set(totals.tolist()))
    scores = _price_sales_scores(cands, totals)
    r = cands[_best_1d(cands, scores)]
    rule = AnonBundle(r)
    return ErmResult(rule, empirical_revenue(rule, samples), EXACT_GRID, len(cands),
                     {"class": "bundle"})


def erm_item_pricing_additive(samples: SampleSet) -> ErmResult:
    """Best item prices for one additive buyer, optimized item by item."""
    _require(samples, n=1, tag=ADDITIVE)
    singles = samples.singles()[:, 0, :]
    prices, examined = [], 0
    for j in range(samples.k):
        cands = sorted(set(singles[:, j].tolist()))
        scores = _price_sales_scores(cands, singles[:, j])
        prices.append(cands[_best_1d(cands, scores)])
        examined += len(cands)
    rule = AnonItem(tuple(prices))
    return ErmResult(rule, empirical_revenue(rule, samples), EXACT_GRID, examined,
                     {"class": "item_additive"})


def erm_item_or_bundle(samples: SampleSet) -> ErmResult:
    """ERM over item pricings together with grand-bundle pricings
    (single additive buyer); ties favor the item pricing."""
    item = erm_item_pricing_additive(samples)
    bundle = erm_bundle_pricing(samples)
    best = item if item.empirical_mean_revenue >= bundle.empirical_mean_revenue else bundle
    return ErmResult(best.chosen, best.empirical_mean_revenue, EXACT_GRID,
                     item.candidates_examined + bundle.candidates_examined,
                     {"class": "item_or_bundle", "item": item.chosen, "bundle": bundle.chosen,
                      "item_revenue": item.empirical_mean_revenue,
                      "bundle_revenue": bundle.empirical_mean_revenue})


# --------------------------------------------------------------------------
# grid machinery


def with_midpoints(values: Sequence[float]) -> list:
    vals = sorted(set(values))
    mids = [(a + b) / 2 for a, b in zip(vals, vals[1:])]
    return sorted(set(vals) | set(mids))


def pooled_candidates(samples: SampleSet, midpoints: bool = True) -> list:
    """Every sampled single-item value (any buyer, any item), optionally
    with midpoints, plus ``inf``."""
    vals = sorted(set(samples.singles().ravel().tolist()))
    if midpoints:
        vals = with_midpoints(vals)
    return vals + [INF]


def column_candidates(samples: SampleSet, item: int) -> list:
    return sorted(set(samples.singles()[:, :, item].ravel().tolist())) + [INF]


def _grid_size(axes) -> int:
    return math.prod(len(a) for a in axes)


def exhaustive_search(axes: Sequence[Sequence[float]], score: Callable, max_grid: int = DEFAULT_MAX_GRID):
    """Maximize ``score`` over the product grid; ties keep the lexicographically
    first point (axes must be sorted ascending)."""
    size = _grid_size(axes)
    if size > max_grid:
        raise GridTooLarge(f"grid has {size} points, limit is {max_grid}")
    best, best_s = None, -INF
    for point in itertools.product(*axes):
        s = score(point)
        if s > best_s:
            best, best_s = point, s
    return best, best_s, size


def hill_climb(axes, score, start=None, restarts: int = 5, seed: int = 0, max_evals: int = 10**6):
    """Coordinate ascent over the grid, moving only on strict improvement."""
    rng = np.random.default_rng(seed)
    evals = 0
    best, best_s = None, -INF
    starts = [tuple(start)] if start is not None else []
    while len(starts) < max(restarts, 1):
        starts.append(tuple(a[int(rng.integers(len(a)))] for a in axes))
    for point in starts:
        cur, cur_s = list(point), score(tuple(point))
        evals += 1
        improved = True
        while improved and evals < max_evals:
            improved = False
            for c, axis in enumerate(axes):
                for cand in axis:
                    if cand == cur[c]:
                        continue
                    trial = cur.copy()
                    trial[c] = cand
                    s = score(tuple(trial))
                    evals += 1
                    if s > cur_s:
                        cur, cur_s, improved = trial, s, True
        if cur_s > best_s or (cur_s == best_s and tuple(cur) < best):
            best, best_s = tuple(cur), cur_s
    return best, best_s, evals


def _total(rule, samples) -> float:
    return math.fsum(rule.revenue(p) for p in samples)


def _item_rule(point, n, k, anonymous):
    if anonymous or n == 1:
        return AnonItem(tuple(point))
    return IndItem(tuple(tuple(point[i * k:(i + 1) * k]) for i in range(n)))


def erm_item_pricing_general(samples: SampleSet, mode: str = EXHAUSTIVE_PRODUCT, *,
                             anonymous: bool = False, midpoints: bool = True,
                             restarts: int = 5, seed: int = 0, start=None,
                             max_grid: int = DEFAULT_MAX_GRID) -> ErmResult:
    """Item-pricing ERM for any buyer class via the full sequential mechanism.

    Every price coordinate (one per buyer and item, or one per item when
    ``anonymous``) ranges over :func:`pooled_candidates`.
    """
    _require(samples)
    n, k = samples.n, samples.k
    d = k if anonymous or n == 1 else n * k
    axis = pooled_candidates(samples, midpoints)
    axes = [axis] * d

    def score(point):
        return _total(_item_rule(point, n, k, anonymous), samples)

    if mode == EXHAUSTIVE_PRODUCT:
        if d > 12:
            raise GridTooLarge(f"exhaustive search needs at most 12 price coordinates, got {d}")
        point, _, examined = exhaustive_search(axes, score, max_grid)
    elif mode == HILL_CLIMB:
        point, _, examined = hill_climb(axes, score, start, restarts, seed)
    else:
        raise ValueError(f"unknown search mode {mode!r}")
    rule = _item_rule(point, n, k, anonymous)
    return ErmResult(rule, empirical_revenue(rule, samples), mode, examined,
                     {"class": "item_general", "grid_axis": axis})


def _reduced_totals(singles: np.ndarray, prices) -> float:
    p = np.asarray(prices)
    clear = singles >= p
    unique = clear.sum(axis=1) == 1
    items = np.argmax(clear[unique], axis=1)
    return math.fsum(p[items].tolist())


def erm_reduced_item_pricing(samples: SampleSet, mode: str = EXHAUSTIVE_PRODUCT, *,
                             restarts: int = 5, seed: int = 0, start=None,
                             max_grid: int = DEFAULT_MAX_GRID) -> ErmResult:
    """ERM over revenue-reduced item pricings for a single buyer.

    Item ``j``'s price ranges over the sampled values of item ``j`` and
    ``inf``.  Reports both the reduced score and the empirical revenue of the
    ordinary item pricing with the same prices (which dominates it).
    """
    _require(samples, n=1)
    singles = samples.singles()[:, 0, :]
    axes = [sorted(set(singles[:, j].tolist())) + [INF] for j in range(samples.k)]

    def score(point):
        return _reduced_totals(singles, point)

    if mode == EXHAUSTIVE_PRODUCT:
        if samples.k > 12:
            raise GridTooLarge("exhaustive reduced-pricing search needs k <= 12")
        point, _, examined = exhaustive_search(axes, score, max_grid)
    elif mode == HILL_CLIMB:
        point, _, examined = hill_climb(axes, score, start, restarts, seed)
    else:
        raise ValueError(f"unknown search mode {mode!r}")
    rule = ReducedItem(tuple(point))
    reduced = empirical_revenue(rule, samples)
    full = empirical_revenue(rule.full(), samples)
    return ErmResult(rule, reduced, mode, examined,
                     {"class": "reduced", "reduced_score": reduced, "full_score": full,
                      "deploy": rule.full()})


def erm_reduced_or_bundle(samples: SampleSet, mode: str = EXHAUSTIVE_PRODUCT, **kw) -> ErmResult:
    """ERM over revenue-reduced item pricings together with grand-bundle
    pricings.  A winning reduced pricing is deployed as the ordinary item
    pricing with the same prices (``details['deploy']``)."""
    reduced = erm_reduced_item_pricing(samples, mode, **kw)
    bundle = erm_bundle_pricing(samples)
    examined = reduced.candidates_examined + bundle.candidates_examined
    if reduced.empirical_mean_revenue >= bundle.empirical_mean_revenue:
        return ErmResult(reduced.chosen, reduced.empirical_mean_revenue, reduced.search_mode,
                         examined, dict(reduced.details, bundle_revenue=bundle.empirical_mean_revenue,
                                        **{"class": "reduced_or_bundle"}))
    return ErmResult(bundle.chosen, bundle.empirical_mean_revenue, reduced.search_mode, examined,
                     {"class": "reduced_or_bundle", "deploy": bundle.chosen,
                      "reduced_score": reduced.empirical_mean_revenue})


# --------------------------------------------------------------------------
# many additive buyers


def _thresholds(singles: np.ndarray):
    """Per-sample thresholds and modified bids for an ``m x n x k`` cube."""
    m, n, k = singles.shape
    beta = np.empty_like(singles)
    for i in range(n):
        others = np.delete(singles, i, axis=1)
        beta[:, i, :] = others.max(axis=1)
    vbar = np.where(singles > beta, singles, 0.0)
    return beta, vbar


def restricted_item_scores(cands, beta_col, vbar_col, weights=None) -> list:
    """Total (weighted) revenue from one buyer-item coordinate at each
    candidate price: price ``max(beta, p)``, sold iff ``vbar > 0`` and
    ``vbar >= max(beta, p)``."""
    out = []
    for p in cands:
        price = np.maximum(beta_col, p)
        sold = (vbar_col > 0) & (vbar_col >= price)
        terms = price[sold] if weights is None else (price * weights)[sold]
        out.append(math.fsum(terms.tolist()))
    return out


def restricted_bundle_scores(cands, beta_row, vbar_row, weights=None) -> list:
    """Same for one buyer's restricted grand-bundle price; rows are ``m x k``."""
    active = (vbar_row > 0).any(axis=1)
    floor = np.where(vbar_row > 0, beta_row, 0.0).sum(axis=1)
    total = vbar_row.sum(axis=1)
    out = []
    for r in cands:
        price = np.maximum(floor, r)
        sold = active & (total >= price)
        terms = price[sold] if weights is None else (price * weights)[sold]
        out.append(math.fsum(terms.tolist()))
    return out


def erm_restricted(samples: SampleSet) -> ErmResult:
    """Per-buyer ERM over restricted item and restricted grand-bundle
    pricings, composed into one mechanism (ties favor item pricing)."""
    _require(samples, tag=ADDITIVE)
    if samples.n < 2:
        raise MechanismError("restricted pricings need at least two buyers")
    singles = samples.singles()
    beta, vbar = _thresholds(singles)
    n, k = samples.n, samples.k
    parts, examined, choices = [], 0, []
    for i in range(n):
        row, item_total = [], 0.0
        item_scores = []
        for j in range(k):
            cands = sorted(set(singles[:, :, j].ravel().tolist()))
            scores = restricted_item_scores(cands, beta[:, i, j], vbar[:, i, j])
            t = _best_1d(cands, scores)
            row.append(cands[t])
            item_scores.append(scores[t])
            examined += len(cands)
        item_total = math.fsum(item_scores)
        floors = np.where(vbar[:, i, :] > 0, beta[:, i, :], 0.0).sum(axis=1)
        bcands = sorted(set(vbar[:, i, :].sum(axis=1).tolist()) | set(floors.tolist()) | {0.0})
        bscores = restricted_bundle_scores(bcands, beta[:, i, :], vbar[:, i, :])
        t = _best_1d(bcands, bscores)
        examined += len(bcands)
        if item_total >= bscores[t]:
            parts.append(AnonItem(tuple(row)))
            choices.append("item")
        else:
            parts.append(AnonBundle(bcands[t]))
            choices.append("bundle")
    rule = RestrictedMix(tuple(parts))
    return ErmResult(rule, empirical_revenue(rule, samples), EXACT_GRID, examined,
                     {"class": "restricted", "buyer_choices": choices})


def erm_multi_additive_pipeline(samples: SampleSet) -> ErmResult:
    """Restricted per-buyer ERM, then the better (on the sample) of the
    composed mechanism and the plain second-price item auction."""
    composed = erm_restricted(samples)
    chosen, means = max_mech([composed.chosen, SecondPrice()], samples)
    return ErmResult(chosen, empirical_revenue(chosen, samples), EXACT_GRID,
                     composed.candidates_examined + 1,
                     {"class": "multi_pipeline", "composed": composed.chosen,
                      "composed_revenue": means[0],
                      "second_price_revenue": means[1],
                      "buyer_choices": composed.details["buyer_choices"]})


# --------------------------------------------------------------------------
# expected revenue


class RevenueEvaluator:
    """Weighted set of profiles standing in for a distribution: the exact
    support (weights are probabilities) or a Monte Carlo test set (weights
    ``1/N``)."""

    def __init__(self, profiles, weights, exact: bool):
        self.samples = SampleSet(tuple(profiles))
        self.weights = np.asarray(weights, dtype=float)
        self.exact = exact

    @classmethod
    def from_distribution(cls, dist, n: int = 1, limit: int = 10**6) -> "RevenueEvaluator":
        pairs = list(support_profiles(dist, n, limit))
        return cls([p for p, _ in pairs], [w for _, w in pairs], True)

    @classmethod
    def monte_carlo(cls, dist, n: int, size: int, seed: int) -> "RevenueEvaluator":
        s = draw_samples(dist, n, size, seed)
        return cls(s.profiles, np.full(size, 1.0 / size), False)

    @classmethod
    def for_distribution(cls, dist, n: int, size: int, seed: int, limit: int = 10**6):
        """Exact when the support is finite and small enough, else Monte Carlo."""
        try:
            return cls.from_distribution(dist, n, limit)
        except (SupportTooLarge, ValueError):
            return cls.monte_carlo(dist, n, size, seed)

    def per_profile(self, rule) -> np.ndarray:
        s = self.samples
        if s.n == 1 and s.tag == ADDITIVE and isinstance(rule, AnonItem):
            return (s.singles()[:, 0, :] >= np.array(rule.prices)) @ np.where(
                np.isinf(rule.prices), 0.0, rule.prices)
        if s.n == 1 and isinstance(rule, AnonBundle):
            return np.where(s.grand_values()[:, 0] >= rule.price, rule.price, 0.0)
        return np.array([rule.revenue(p) for p in s])

    def revenue(self, rule) -> float:
        return math.fsum((self.per_profile(rule) * self.weights).tolist())

    def stderr(self, rule) -> float:
        if self.exact:
            return 0.0
        x = self.per_profile(rule)
        return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def true_revenue(mech, dist, n: int = 1, limit: int = 10**6) -> float:
    """Exact expected revenue over a finite-support distribution."""
    return RevenueEvaluator.from_distribution(dist, n, limit).revenue(mech)


def grid_best_true_revenue(result: ErmResult, samples: SampleSet, ev: RevenueEvaluator,
                           max_grid: int = DEFAULT_MAX_GRID) -> float:
    """Best expected revenue (under ``ev``) over the candidate grid the ERM
    searched.  Deployed mechanisms are scored, so a reduced pricing counts as
    the ordinary item pricing with the same prices."""
    cls = result.details.get("class")
    if cls in ("restricted", "multi_pipeline"):
        best = _restricted_grid_best(samples, ev)
        return max(best, ev.revenue(SecondPrice())) if cls == "multi_pipeline" else best
    if cls == "bundle":
        return _bundle_grid_best(samples, ev)
    if cls == "item_additive":
        return _additive_item_grid_best(samples, ev)
    if cls == "item_or_bundle":
        return max(_additive_item_grid_best(samples, ev), _bundle_grid_best(samples, ev))
    if cls in ("reduced", "reduced_or_bundle"):
        singles = samples.singles()[:, 0, :]
        axes = [sorted(set(singles[:, j].tolist())) + [INF] for j in range(samples.k)]
        _, best, _ = exhaustive_search(axes, lambda pt: ev.revenue(AnonItem(pt)), max_grid)
        return max(best, _bundle_grid_best(samples, ev)) if cls == "reduced_or_bundle" else best
    if cls == "item_general":
        n, k = samples.n, samples.k
        anonymous = isinstance(result.chosen, AnonItem)
        d = k if anonymous else n * k
        _, best, _ = exhaustive_search([result.details["grid_axis"]] * d,
                                       lambda pt: ev.revenue(_item_rule(pt, n, k, anonymous)),
                                       max_grid)
        return best
    raise ValueError(f"no candidate grid recorded for ERM class {cls!r}")


def _bundle_grid_best(samples, ev) -> float:
    cands = sorted(set(samples.grand_values()[:, 0].tolist()))
    return max(ev.revenue(AnonBundle(r)) for r in cands)


def _additive_item_grid_best(samples, ev) -> float:
    singles = samples.singles()[:, 0, :]
    ev_singles = ev.samples.singles()[:, 0, :]
    total = []
    for j in range(samples.k):
        cands = sorted(set(singles[:, j].tolist()))
        total.append(max(_price_sales_scores(cands, ev_singles[:, j], ev.weights)))
    return math.fsum(total)


def _restricted_grid_best(samples, ev) -> float:
    singles = samples.singles()
    beta, vbar = _thresholds(ev.samples.singles())
    w = ev.weights
    sb, sv = _thresholds(singles)
    parts = []
    for i in range(samples.n):
        item = []
        for j in range(samples.k):
            cands = sorted(set(singles[:, :, j].ravel().tolist()))
            item.append(max(restricted_item_scores(cands, beta[:, i, j], vbar[:, i, j], w)))
        floors = np.where(sv[:, i, :] > 0, sb[:, i, :], 0.0).sum(axis=1)
        bcands = sorted(set(sv[:, i, :].sum(axis=1).tolist()) | set(floors.tolist()) | {0.0})
        bundle = max(restricted_bundle_scores(bcands, beta[:, i, :], vbar[:, i, :], w))
        parts.append(max(math.fsum(item), bundle))
    return math.fsum(parts)


@dataclass(frozen=True)
class BenchmarkRevenues:
    brev: float
    prev: float
    reduced_prev: float
    brev_rule: AnonBundle
    prev_rule: AnonItem
    reduced_rule: ReducedItem
    prev_exact: bool


def exact_brev_prev(dist, limit: int = 10**6, max_grid: int = DEFAULT_MAX_GRID) -> BenchmarkRevenues:
    """Best expected revenue of a grand-bundle price, an item pricing and a
    revenue-reduced item pricing for one buyer with finite-support values.

    ``dist`` is a single-buyer distribution or a ready :class:`RevenueEvaluator`.
    Bundle and reduced optima are exact.  Item pricing is exact for additive
    buyers (item by item); for other buyers it is the optimum over the
    support-value grid with midpoints (``prev_exact`` is then False).
    """
    ev = dist if isinstance(dist, RevenueEvaluator) else RevenueEvaluator.from_distribution(dist, 1, limit)
    s = ev.samples
    if s.n != 1:
        raise MechanismError("benchmark revenues are defined for a single buyer")
    if s.k > 6:
        raise GridTooLarge("benchmark revenues are computed for k <= 6")
    totals = sorted(set(s.grand_values()[:, 0].tolist()))
    bscores = [ev.revenue(AnonBundle(r)) for r in totals]
    b = _best_1d(totals, bscores)
    singles = s.singles()[:, 0, :]
    if s.tag == ADDITIVE:
        prices = []
        for j in range(s.k):
            cands = sorted(set(singles[:, j].tolist()))
            sc = _price_sales_scores(cands, singles[:, j], ev.weights)
            prices.append(cands[_best_1d(cands, sc)])
        prev_rule, prev_exact = AnonItem(tuple(prices)), True
        prev = ev.revenue(prev_rule)
    else:
        axis = with_midpoints(singles.ravel().tolist()) + [INF]
        pt, prev, _ = exhaustive_search([axis] * s.k, lambda p: ev.revenue(AnonItem(p)), max_grid)
        prev_rule, prev_exact = AnonItem(pt), False
    axes = [sorted(set(singles[:, j].tolist())) + [INF] for j in range(s.k)]
    rpt, reduced, _ = exhaustive_search(axes, lambda p: ev.revenue(ReducedItem(p)), max_grid)
    return BenchmarkRevenues(bscores[b], prev, reduced, AnonBundle(totals[b]), prev_rule,
                             ReducedItem(rpt), prev_exact)


# --------------------------------------------------------------------------
# sample complexity


@dataclass(frozen=True)
class SampleBoundQuery:
    epsilon: float
    delta: float
    H: float
    pd: float

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if not self.H > 0 or self.pd < 0:
            raise ValueError("need H > 0 and pd >= 0")
        if self.epsilon >= self.H:
            raise ValueError("epsilon >= H makes the bound vacuous")


BOUND_WARNING = ("order-of-magnitude only: the uniform-convergence bound is O(...); "
                 "this value uses leading constant 1")


def sample_bound(q: SampleBoundQuery | None = None, **kw) -> int:
    """``ceil((H/eps)^2 * (pd * ln(H/eps) + ln(1/delta)))``."""
    if q is None:
        q = SampleBoundQuery(**kw)
    ratio = q.H / q.epsilon
    return math.ceil(ratio ** 2 * (q.pd * math.log(ratio) + math.log(1 / q.delta)))
